#include "qmf/emf.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>

#include "qmf/error.hpp"

namespace qmf {

// ---------------------------------------------------------------- AmplitudeField

AmplitudeField::AmplitudeField(std::shared_ptr<const Graph> graph, int d)
    : graph_(std::move(graph)), d_(d) {
  if (!graph_) throw InvalidParameter("amplitude field needs a graph");
  if (d < 2) throw InvalidParameter("local dimension must be >= 2");
}

AmplitudeField AmplitudeField::homogeneous(std::shared_ptr<const Graph> graph, const Matrix& psi) {
  AmplitudeField f(std::move(graph), static_cast<int>(psi.rows()));
  for (const auto& [x, y] : f.graph().edges()) f.set(x, y, psi);
  return f;
}

void AmplitudeField::set(const Vertex& x, const Vertex& y, const Matrix& psi) {
  if (psi.rows() != d_ || psi.cols() != d_)
    throw DimensionMismatch("amplitude matrix must be " + std::to_string(d_) + "x" +
                            std::to_string(d_));
  if (!graph_->adjacent(x, y))
    throw PreconditionError(x.to_string() + " and " + y.to_string() + " are not adjacent");
  if (x < y)
    psi_[{x, y}] = psi;
  else
    psi_[{y, x}] = psi.transpose();
}

bool AmplitudeField::has(const Vertex& x, const Vertex& y) const {
  return psi_.count(x < y ? std::pair{x, y} : std::pair{y, x}) != 0;
}

Matrix AmplitudeField::matrix(const Vertex& x, const Vertex& y) const {
  const bool fwd = x < y;
  auto it = psi_.find(fwd ? std::pair{x, y} : std::pair{y, x});
  if (it == psi_.end())
    throw PreconditionError("no amplitudes on edge {" + x.to_string() + ", " + y.to_string() +
                            "}");
  return fwd ? it->second : Matrix(it->second.transpose());
}

cplx AmplitudeField::amplitude(const Vertex& x, const Vertex& y, int ix, int iy) const {
  const bool fwd = x < y;
  auto it = psi_.find(fwd ? std::pair{x, y} : std::pair{y, x});
  if (it == psi_.end())
    throw PreconditionError("no amplitudes on edge {" + x.to_string() + ", " + y.to_string() +
                            "}");
  return fwd ? it->second(ix, iy) : it->second(iy, ix);
}

const Tree& AmplitudeField::tree() const {
  const auto* t = dynamic_cast<const Tree*>(graph_.get());
  if (!t) throw NotATreeError("this operation needs a field on a rooted tree");
  return *t;
}

double AmplitudeField::bistochastic_defect() const {
  double worst = 0.0;
  for (const auto& [edge, psi] : psi_) {
    const Eigen::MatrixXd p = psi.cwiseAbs2();
    worst = std::max(worst, (p.rowwise().sum().array() - 1.0).abs().maxCoeff());
    worst = std::max(worst, (p.colwise().sum().array() - 1.0).abs().maxCoeff());
  }
  return worst;
}

double AmplitudeField::uniform_modulus_defect() const {
  double worst = 0.0;
  for (const auto& [edge, psi] : psi_)
    worst = std::max(worst, (psi.cwiseAbs2().array() - 1.0 / d_).abs().maxCoeff());
  return worst;
}

void AmplitudeField::validate(double tol) const {
  for (const auto& [x, y] : graph_->edges())
    if (!has(x, y))
      throw InvalidParameter("edge {" + x.to_string() + ", " + y.to_string() +
                             "} has no amplitude matrix");
  const double defect = bistochastic_defect();
  if (defect > tol)
    throw InvalidParameter("|psi|^2 is not bi-stochastic (defect " + std::to_string(defect) +
                           ")");
}

// ---------------------------------------------------------------- psi vectors

namespace {

// Product formula over the edges inside `region`; no connectivity requirement.
StateVector psi_product(const AmplitudeField& field, const Region& region) {
  const int d = field.d();
  const SiteLayout layout(region, d);
  struct Edge {
    std::size_t p, q;
    Matrix psi;
  };
  std::vector<Edge> edges;
  for (std::size_t p = 0; p < region.size(); ++p)
    for (std::size_t q = p + 1; q < region.size(); ++q)
      if (field.graph().adjacent(region[p], region[q]))
        edges.push_back({p, q, field.matrix(region[p], region[q])});

  Vector amp(layout.dim());
  for (std::int64_t idx = 0; idx < layout.dim(); ++idx) {
    cplx v = 1.0;
    for (const auto& e : edges) v *= e.psi(layout.digit(idx, e.p), layout.digit(idx, e.q));
    amp(idx) = v;
  }
  return StateVector(region, d, std::move(amp));
}

// Adjoins vertex y to the support of u with amplitude weight(i_y, digits of `links`).
template <class Weight>
StateVector attach(const StateVector& u, const Vertex& y, const std::vector<Vertex>& links,
                   Weight weight) {
  if (u.support().contains(y))
    throw PreconditionError("vertex " + y.to_string() + " is already in the support");
  const int d = u.d();
  const Region out = u.support().with(y);
  const SiteLayout ln(out, d);
  const std::size_t py = static_cast<std::size_t>(out.index_of(y));
  const std::int64_t sy = ln.stride(py);
  std::vector<std::size_t> lpos;
  for (const auto& l : links) {
    if (!u.support().contains(l))
      throw PreconditionError("link vertex " + l.to_string() + " is not in the support");
    lpos.push_back(static_cast<std::size_t>(out.index_of(l)));
  }
  Vector amp(ln.dim());
  std::vector<int> digits(lpos.size());
  for (std::int64_t idx = 0; idx < ln.dim(); ++idx) {
    const std::int64_t old = (idx / (sy * d)) * sy + idx % sy;
    for (std::size_t l = 0; l < lpos.size(); ++l) digits[l] = ln.digit(idx, lpos[l]);
    amp(idx) = weight(ln.digit(idx, py), digits) * u.amplitudes()(old);
  }
  return StateVector(out, d, std::move(amp));
}

Region all_vertices(const Graph& g) { return Region(g.vertices()); }

}  // namespace

StateVector psi_vector(const AmplitudeField& field, const Region& region) {
  if (region.empty()) throw PreconditionError("psi_vector needs a non-empty region");
  for (const auto& v : region)
    if (!field.graph().contains(v)) throw TruncationError("vertex " + v.to_string() + " is not stored");
  if (!is_connected(field.graph(), region))
    throw PreconditionError("region " + region.to_string() + " is not connected");
  return psi_product(field, region);
}

cplx emf_expect(const AmplitudeField& field, const LocalOperator& a, double tol) {
  if (a.d() != field.d()) throw DimensionMismatch("observable and field dimensions differ");
  const Tree& tree = field.tree();
  const Graph& g = field.graph();
  const Region hull = connected_hull(tree, a.support());
  const Region lam = closure(g, closure(g, hull));
  const auto eval = [&](const Region& r) {
    const StateVector psi = psi_product(field, r);
    return vec_inner(psi, apply(a, psi)) / static_cast<double>(field.d());
  };
  const cplx value = eval(lam);

  // One-step volume invariance; skipped when the enlarged vector would exceed the cap
  // or reach past the stored depth.
  Region bd;
  try {
    bd = boundary(g, lam);
  } catch (const TruncationError&) {
    return value;
  }
  if (!bd.empty() && lam.size() + 1 <= kMaxVectorSites) {
    const cplx again = eval(lam.with(bd[0]));
    if (std::abs(again - value) > tol * std::max(1.0, std::abs(value)))
      throw InvariantViolation("expectation changed from " + std::to_string(value.real()) +
                               " to " + std::to_string(again.real()) +
                               " when adjoining " + bd[0].to_string());
  }
  return value;
}

// ---------------------------------------------------------------- isometries

BoundaryIsometry boundary_isometry(const AmplitudeField& field, const Vertex& z, const Vertex& x) {
  if (!field.graph().adjacent(z, x))
    throw PreconditionError(z.to_string() + " and " + x.to_string() + " are not adjacent");
  const int d = field.d();
  BoundaryIsometry iso{z, x, Region{z, x}, Matrix::Zero(d * d, d)};
  const bool z_first = z < x;
  for (int iz = 0; iz < d; ++iz)
    for (int ix = 0; ix < d; ++ix) {
      const int row = z_first ? iz * d + ix : ix * d + iz;
      iso.v(row, iz) = field.amplitude(x, z, ix, iz);
    }
  return iso;
}

StateVector apply_isometry(const BoundaryIsometry& iso, const StateVector& v) {
  const int d = v.d();
  if (iso.v.rows() != d * d || iso.v.cols() != d)
    throw DimensionMismatch("isometry and vector dimensions differ");
  const bool z_first = iso.z < iso.x;
  return attach(v, iso.x, {iso.z}, [&](int ix, const std::vector<int>& dz) {
    const int iz = dz[0];
    return iso.v(z_first ? iz * d + ix : ix * d + iz, iz);
  });
}

Region emf_region(const Tree& tree, int n) {
  if (n < 1) throw InvalidParameter("emf regions start at n = 1");
  if (!tree.truncated() && n - 1 > tree.depth()) return all_vertices(tree);
  return levels(tree, n - 1).ball;
}

cplx emf_as_chain(const AmplitudeField& field, int n_max, const LocalOperator& a) {
  if (n_max < 2) throw InvalidParameter("emf_as_chain needs n_max >= 2");
  if (a.d() != field.d()) throw DimensionMismatch("observable and field dimensions differ");
  const Tree& tree = field.tree();
  const Graph& g = field.graph();
  const int d = field.d();
  const int n = n_max - 1;
  const Region top = emf_region(tree, n);
  if (!top.contains(a.support()))
    throw PreconditionError("observable support " + a.support().to_string() +
                            " is not inside Lambda_" + std::to_string(n));

  // Heisenberg recursion X <- V_m^* X V_m from m = n down to 1.
  Matrix x = embed(a, closure(g, top)).matrix();
  for (int m = n; m >= 1; --m) {
    const Region inner = emf_region(tree, m);
    const Region outer = closure(g, inner);
    if (outer.size() > kMaxOperatorSites)
      throw InvalidParameter("Lambda_" + std::to_string(m + 1) +
                             " is too large for the operator recursion");
    const auto parents = check_tree_property(g, inner);
    const std::int64_t din = ipow(d, inner.size());
    Matrix vm(ipow(d, outer.size()), din);
    for (std::int64_t col = 0; col < din; ++col) {
      StateVector e(inner, d);
      e.amplitudes()(col) = 1.0;
      for (const auto& [y, z] : parents) e = apply_isometry(boundary_isometry(field, z, y), e);
      vm.col(col) = e.amplitudes();
    }
    x = vm.adjoint() * x * vm;
  }
  // rho(b) = (1/d) <sum_i e_i, b sum_j e_j>
  return x.sum() / static_cast<double>(d);
}

cplx gqms_reconstruct(const AmplitudeField& field, const LocalOperator& a, int n, double tol) {
  if (n < 1) throw InvalidParameter("gqms_reconstruct needs n >= 1");
  if (a.d() != field.d()) throw DimensionMismatch("observable and field dimensions differ");
  const double defect = field.uniform_modulus_defect();
  if (defect > tol)
    throw UnsupportedField("reconstruction needs |psi(i, j)|^2 = 1/d on every edge (defect " +
                           std::to_string(defect) + ")");
  const Tree& tree = field.tree();
  const int d = field.d();
  std::vector<Region> lam(n + 3);
  for (int m = 1; m <= n + 2; ++m) lam[m] = emf_region(tree, m);
  if (!lam[n].contains(a.support()))
    throw PreconditionError("observable support is not inside Lambda_" + std::to_string(n));

  const Region shell_next = lam[n + 1].minus(lam[n]);
  StateVector u = psi_product(field, lam[n + 2].minus(lam[n]));
  u.amplitudes() *= std::pow(static_cast<double>(d), -0.5 * static_cast<double>(shell_next.size()));

  // V_m adjoins each vertex y of Lambda_m \ Lambda_{m-1} with weight
  // d^{(c-1)/2} prod_l psi_{x_l y}(i_l, j), x_1..x_c its neighbours in the next shell.
  for (int m = n; m >= 1; --m) {
    const Region shell = m == 1 ? lam[1] : lam[m].minus(lam[m - 1]);
    const Region below = lam[m + 1].minus(lam[m]);
    for (const auto& y : shell) {
      std::vector<Vertex> xs;
      for (const auto& x : tree.stored_neighbors(y))
        if (below.contains(x)) xs.push_back(x);
      const double scale =
          std::pow(static_cast<double>(d), 0.5 * (static_cast<double>(xs.size()) - 1.0));
      u = attach(u, y, xs, [&](int j, const std::vector<int>& is) {
        cplx w = scale;
        for (std::size_t l = 0; l < xs.size(); ++l) w *= field.amplitude(xs[l], y, is[l], j);
        return w;
      });
    }
  }
  return vec_inner(u, apply(a, u));
}

// ---------------------------------------------------------------- classicality

namespace {

std::vector<Vertex> farthest_path(const Graph& g, const Vertex& start) {
  std::map<Vertex, Vertex> prev;
  std::set<Vertex> seen{start};
  std::deque<Vertex> queue{start};
  Vertex last = start;
  while (!queue.empty()) {
    last = queue.front();
    queue.pop_front();
    for (const auto& b : g.stored_neighbors(last))
      if (seen.insert(b).second) {
        prev[b] = last;
        queue.push_back(b);
      }
  }
  std::vector<Vertex> path{last};
  while (path.back() != start) path.push_back(prev.at(path.back()));
  return path;
}

}  // namespace

ClassicalityReport classicality_report(const AmplitudeField& field, int n,
                                       const std::optional<std::vector<Vertex>>& path) {
  if (n < 1) throw InvalidParameter("segment length must be >= 1");
  const Graph& g = field.graph();
  const int d = field.d();
  std::vector<Vertex> line;
  if (path) {
    line = *path;
    for (std::size_t i = 0; i + 1 < line.size(); ++i)
      if (!g.adjacent(line[i], line[i + 1]))
        throw PreconditionError("given vertices do not form a path");
    if (std::set<Vertex>(line.begin(), line.end()).size() != line.size())
      throw PreconditionError("given path repeats a vertex");
  } else {
    const auto far = farthest_path(g, g.vertices().front());
    line = farthest_path(g, far.front());
  }
  if (static_cast<int>(line.size()) < n + 2)
    throw PreconditionError("no path with " + std::to_string(n + 2) + " vertices is available");
  const std::size_t start = (line.size() - static_cast<std::size_t>(n)) / 2;

  ClassicalityReport rep;
  rep.segment.assign(line.begin() + static_cast<std::ptrdiff_t>(start),
                     line.begin() + static_cast<std::ptrdiff_t>(start) + n);
  const Region seg(rep.segment);

  // Reduced density D with phi(a) = tr(D a): D = (1/d) tr_{Lambda \ seg} |psi><psi|.
  const Region lam = closure(g, closure(g, seg));
  const StateVector psi = psi_product(field, lam);
  const SiteLayout layout(lam, d);
  const auto table = layout.split_table(seg);
  const std::int64_t ds = ipow(d, seg.size());
  const std::int64_t dc = layout.dim() / ds;
  Matrix coeff(ds, dc);
  for (std::int64_t s = 0; s < ds; ++s)
    for (std::int64_t c = 0; c < dc; ++c) coeff(s, c) = psi.amplitudes()(table[s * dc + c]);
  rep.density = coeff * coeff.adjoint() / static_cast<double>(d);

  rep.eigenvalues = hermitian_eigenvalues(rep.density);
  const double top = std::max(rep.eigenvalues.back(), 0.0);
  rep.rank = static_cast<int>(std::count_if(rep.eigenvalues.begin(), rep.eigenvalues.end(),
                                            [&](double e) { return e > 1e-10 * top; }));

  // Product deviation over matrix units on the two halves of the segment.
  const std::size_t half = static_cast<std::size_t>(n) / 2;
  if (half > 0) {
    const Region left(std::vector<Vertex>(rep.segment.begin(),
                                          rep.segment.begin() + static_cast<std::ptrdiff_t>(half)));
    const Region right = seg.minus(left);
    const auto phi = [&](const LocalOperator& x) {
      return (rep.density * embed(x, seg).matrix()).trace();
    };
    const auto units = [&](const Region& r) {
      std::vector<LocalOperator> out;
      const std::int64_t dim = ipow(d, r.size());
      for (std::int64_t i = 0; i < dim; ++i)
        for (std::int64_t j = 0; j < dim; ++j) {
          LocalOperator e(r, d);
          e.matrix()(i, j) = 1.0;
          out.push_back(std::move(e));
        }
      return out;
    };
    const auto ul = units(left);
    const auto ur = units(right);
    std::vector<cplx> pr;
    for (const auto& v : ur) pr.push_back(phi(v));
    for (const auto& u : ul) {
      const cplx pu = phi(u);
      for (std::size_t j = 0; j < ur.size(); ++j)
        rep.product_deviation =
            std::max(rep.product_deviation, std::abs(phi(op_mul(u, ur[j])) - pu * pr[j]));
    }
  }

  if (n == 2) {
    Matrix pt(d * d, d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k)
          for (int l = 0; l < d; ++l) pt(i * d + j, k * d + l) = rep.density(i * d + l, k * d + j);
    const double lo = min_eigenvalue(pt);
    rep.ppt_min_eigenvalue = lo;
    rep.ppt = lo >= -1e-12;
  }
  return rep;
}

}  // namespace qmf
