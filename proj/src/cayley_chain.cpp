#include "qmf/cayley_chain.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "qmf/error.hpp"
#include "qmf/random.hpp"

namespace qmf {

namespace {

Region block_region(const Vertex& x, int k) {
  std::vector<Vertex> v{x};
  for (int i = 1; i <= k; ++i) v.push_back(x.child(i));
  return Region(std::move(v));
}

double norm_trace(const Matrix& m) { return (m.trace() / static_cast<double>(m.rows())).real(); }

double max_norm(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// prod over children of an on-site factor, on the block region of the root.
LocalOperator on_children(const Region& block, const Matrix& m, int k) {
  const int d = static_cast<int>(m.rows());
  LocalOperator out = LocalOperator::identity(block, d);
  for (int i = 1; i <= k; ++i)
    out = op_mul(out, LocalOperator::on_site(block[static_cast<std::size_t>(i)], m));
  return out;
}

void require_square(const Matrix& m, Eigen::Index n, const char* what) {
  if (m.rows() != n || m.cols() != n)
    throw DimensionMismatch(std::string(what) + " must be " + std::to_string(n) + "x" +
                            std::to_string(n));
}

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

LocalOperator block_product(const Matrix& K, int d, int k) {
  if (k < 1) throw InvalidParameter("order k must be >= 1");
  require_square(K, static_cast<Eigen::Index>(d) * d, "edge kernel");
  const Region block = block_region(Vertex::root(), k);
  LocalOperator out = LocalOperator::identity(block, d);
  for (int i = 1; i <= k; ++i)
    out = op_mul(out, LocalOperator(Region{Vertex::root(), Vertex{i}}, d, K));
  return embed(out, block);
}

Matrix boundary_map(const LocalOperator& block, const Matrix& h) {
  const int k = static_cast<int>(block.support().size()) - 1;
  const LocalOperator hk = on_children(block.support(), h, k);
  const LocalOperator inner(block.support(), block.d(),
                            block.matrix() * hk.matrix() * block.matrix().adjoint());
  return normalized_partial_trace(inner, Region{Vertex::root()}).matrix();
}

// ---------------------------------------------------------------- solvers

HSolution solve_h(const Matrix& K, int d, int k, HAnsatz ansatz, double tol, int max_iter) {
  const LocalOperator block = block_product(K, d, k);
  const Matrix id = Matrix::Identity(d, d);

  if (ansatz == HAnsatz::Scalar) {
    const Matrix m = boundary_map(block, id);
    const cplx c = m(0, 0);
    if (max_norm(m - c * id) <= 1e-10 && std::abs(c.imag()) <= 1e-10 && c.real() > 0.0) {
      if (k >= 2) {
        const double alpha = std::pow(c.real(), -1.0 / (k - 1));
        return {alpha * id, alpha, "scalar", 0};
      }
      if (std::abs(c.real() - 1.0) <= 1e-10) return {id, 1.0, "scalar", 0};
    }
  }

  // Normalised fixed-point iteration from several starts.
  Rng rng(0x5eed);
  std::vector<Matrix> starts{id};
  for (int s = 0; s < 3; ++s) {
    const Matrix a = random_complex(rng, d);
    Matrix p = a * a.adjoint() + 0.1 * id;
    starts.push_back(p / norm_trace(p));
  }
  std::vector<Matrix> dirs;
  int iterations = 0;
  for (const auto& s : starts) {
    Matrix cur = s;
    bool converged = false;
    for (int it = 1; it <= max_iter; ++it) {
      Matrix next = hermitize(boundary_map(block, cur));
      const double t = norm_trace(next);
      if (!(t > 0.0)) throw SolverError("boundary map lost positivity during iteration");
      next /= t;
      const double delta = max_norm(next - cur);
      cur = std::move(next);
      if (delta < tol) {
        converged = true;
        iterations = std::max(iterations, it);
        break;
      }
    }
    if (!converged)
      throw SolverError("boundary fixed-point iteration did not converge in " +
                        std::to_string(max_iter) + " steps");
    dirs.push_back(cur);
  }
  int distinct = 1;
  std::vector<Matrix> reps{dirs.front()};
  for (const auto& dvec : dirs) {
    bool known = false;
    for (const auto& r : reps) known = known || max_norm(dvec - r) <= 1e-8;
    if (!known) {
      reps.push_back(dvec);
      ++distinct;
    }
  }
  if (distinct > 1)
    throw SolverError("boundary equation has " + std::to_string(distinct) +
                      " distinct fixed directions from " + std::to_string(starts.size()) +
                      " starts");

  const Matrix& dir = dirs.front();
  const double c = norm_trace(boundary_map(block, dir));
  Matrix h;
  if (k == 1) {
    if (std::abs(c - 1.0) > 1e-10)
      throw SolverError("for k = 1 the boundary map has no fixed point (eigenvalue " +
                        std::to_string(c) + ")");
    h = dir;
  } else {
    h = std::pow(c, -1.0 / (k - 1)) * dir;
  }
  if (min_eigenvalue(h) < -1e-12) throw SolverError("solved h is not positive");
  HSolution out{h, std::nullopt, "full", iterations};
  if (max_norm(h - h(0, 0) * id) <= 1e-12) out.alpha = h(0, 0).real();
  return out;
}

Matrix solve_w0(const Matrix& K, const Matrix& h, int k, double eig_tol) {
  const int d = static_cast<int>(h.rows());
  require_square(h, d, "h");
  const LocalOperator block = block_product(K, d, k);
  const Region& r = block.support();
  const Matrix a = block.matrix() * on_children(r, h, k).matrix() * block.matrix().adjoint();
  const Matrix hi = psd_inv_sqrt(h);

  // N(w) = h^{-1/2} Tr_(1)((w (x) 1) A) h^{-1/2} as a d^2 x d^2 matrix.
  Matrix n(d * d, d * d);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q) {
      LocalOperator w(r, d, embed(matrix_unit(Vertex::root(), p + 1, q + 1, d), r).matrix() * a);
      const Matrix img = hi * normalized_partial_trace(w, Region{r[1]}).matrix() * hi;
      n.col(p * d + q) = vec_rowmajor(img);
    }
  Eigen::ComplexEigenSolver<Matrix> es(n);
  std::vector<Eigen::Index> hits;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i) - 1.0) <= eig_tol) hits.push_back(i);
  if (hits.empty()) throw SolverError("initial condition has no solution at eigenvalue 1");
  if (hits.size() > 1)
    throw SolverError("eigenvalue 1 of the initial-condition map has multiplicity " +
                      std::to_string(hits.size()));
  Matrix w = unvec_rowmajor(es.eigenvectors().col(hits.front()), d);
  const cplx t = (w * h).trace() / static_cast<double>(d);
  if (std::abs(t) < 1e-14) throw SolverError("solution of the initial condition has Tr(w0 h) = 0");
  w /= t;
  if (max_norm(w - w.adjoint()) > 1e-8 * std::max(1.0, max_norm(w)))
    throw SolverError("solution of the initial condition is not Hermitian");
  w = hermitize(w);
  const auto ev = hermitian_eigenvalues(w);
  if (ev.front() < -1e-10 * std::max(1.0, ev.back()))
    throw SolverError("solution of the initial condition is not positive");
  return w;
}

ChainSpec solve_chain(const Matrix& K, int d, int k, std::string kernel_id, cplx beta,
                      HAnsatz ansatz) {
  HSolution hs = solve_h(K, d, k, ansatz);
  ChainSpec s;
  s.k = k;
  s.d = d;
  s.K = K;
  s.h = hs.h;
  s.alpha = hs.alpha;
  s.w0 = solve_w0(K, hs.h, k);
  s.kernel_id = std::move(kernel_id);
  s.beta = beta;
  return s;
}

// ---------------------------------------------------------------- transfer data

Matrix TransferSuperoperator::apply(const Matrix& b) const {
  return unvec_rowmajor(T * vec_rowmajor(b), static_cast<int>(b.rows()));
}

double TransferSuperoperator::second_modulus() const {
  return eigenvalues.size() > 1 ? std::abs(eigenvalues[1]) : 0.0;
}

// ---------------------------------------------------------------- CayleyChain

CayleyChain::CayleyChain(ChainSpec spec, bool validate, double tol)
    : spec_(std::move(spec)), block_(block_product(spec_.K, spec_.d, spec_.k)) {
  const int d = spec_.d;
  require_square(spec_.h, d, "h");
  require_square(spec_.w0, d, "w0");
  if (!is_hermitian(spec_.h, tol) || min_eigenvalue(spec_.h) < -tol)
    throw InvariantViolation("h must be positive semidefinite");
  if (!is_hermitian(spec_.w0, tol) || min_eigenvalue(spec_.w0) < -tol)
    throw InvariantViolation("w0 must be positive semidefinite");
  h_sqrt_ = psd_sqrt(spec_.h);
  w0_sqrt_ = psd_sqrt(spec_.w0);
  try {
    h_inv_sqrt_ = psd_inv_sqrt(spec_.h);
    h_invertible_ = true;
  } catch (const InvalidParameter&) {
    h_invertible_ = false;
  }
  if (validate) {
    if (const double r = normalization_residual(); r > tol)
      throw InvariantViolation("Tr(w0 h) = 1 violated by " + std::to_string(r));
    if (const double r = boundary_residual(); r > tol)
      throw InvariantViolation("boundary equation violated by " + std::to_string(r));
  }
}

double CayleyChain::normalization_residual() const {
  return std::abs((spec_.w0 * spec_.h).trace() / static_cast<double>(spec_.d) - 1.0);
}

double CayleyChain::boundary_residual() const {
  return max_norm(boundary_map(block_, spec_.h) - spec_.h);
}

double CayleyChain::initial_residual() const {
  const int d = spec_.d;
  const Region& r = block_.support();
  const Matrix a =
      block_.matrix() * on_children(r, spec_.h, spec_.k).matrix() * block_.matrix().adjoint();
  const LocalOperator lhs(r, d, embed(LocalOperator::on_site(Vertex::root(), spec_.w0), r).matrix() * a);
  const Matrix rhs = h_sqrt_ * spec_.w0 * h_sqrt_;
  double worst = 0.0;
  for (int i = 1; i <= spec_.k; ++i)
    worst = std::max(worst,
                     max_norm(normalized_partial_trace(lhs, Region{r[static_cast<std::size_t>(i)]})
                                  .matrix() -
                              rhs));
  return worst;
}

LocalOperator CayleyChain::block_on(const Vertex& x) const {
  return block_.relabelled(block_region(x, spec_.k));
}

Matrix CayleyChain::site_map(const Matrix& pre, const Matrix& post, int child,
                             bool adjoint) const {
  const int d = spec_.d;
  const Region& r = block_.support();
  const Matrix g = embed(LocalOperator::on_site(r[0], pre), r).matrix() * block_.matrix() *
                   on_children(r, post, spec_.k).matrix();
  Matrix out(d * d, d * d);
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q) {
      const LocalOperator b =
          embed(matrix_unit(r[static_cast<std::size_t>(child)], p + 1, q + 1, d), r);
      const Matrix conj = adjoint ? Matrix(g.adjoint() * b.matrix() * g)
                                  : Matrix(g * b.matrix() * g.adjoint());
      out.col(p * d + q) =
          vec_rowmajor(normalized_partial_trace(LocalOperator(r, d, conj), Region{r[0]}).matrix());
    }
  return out;
}

LocalOperator CayleyChain::phi_density(int n, PhiMethod method) const {
  if (n < 0) throw InvalidParameter("n must be >= 0");
  const int d = spec_.d;
  const Tree tree = build_cayley(spec_.k, n + 1);
  const Region ball = levels(tree, n).ball;
  const Region next = levels(tree, n + 1).ball;
  if (method == PhiMethod::Auto)
    method = next.size() <= kMaxOperatorSites ? PhiMethod::Explicit : PhiMethod::Sweep;

  if (method == PhiMethod::Explicit) {
    if (next.size() > kMaxOperatorSites)
      throw InvalidParameter("explicit phi^(" + std::to_string(n) + ") needs " +
                             std::to_string(next.size()) + " sites, above the cap");
    // K_{n+1} = w0^{1/2} prod_levels prod_x prod_i K_<x,(x,i)> prod_{W_{n+1}} h^{1/2}
    Matrix kn = embed(LocalOperator::on_site(Vertex::root(), w0_sqrt_), next).matrix();
    for (int m = 1; m <= n + 1; ++m)
      for (const auto& x : levels(tree, m - 1).shell)
        for (int i = 1; i <= spec_.k; ++i)
          kn = kn * embed(LocalOperator(Region{x, x.child(i)}, d, spec_.K), next).matrix();
    for (const auto& y : levels(tree, n + 1).shell)
      kn = kn * embed(LocalOperator::on_site(y, h_sqrt_), next).matrix();
    const LocalOperator w(next, d, kn.adjoint() * kn);
    return normalized_partial_trace(w, ball);
  }

  if (ball.size() > kMaxOperatorSites)
    throw InvalidParameter("phi^(" + std::to_string(n) + ") needs " +
                           std::to_string(ball.size()) + " sites, above the cap");
  LocalOperator y = sweep(tree, n);
  const Matrix leg = site_map(Matrix::Identity(d, d), h_sqrt_, 0, true);
  y = embed(y, ball);
  for (const auto& x : levels(tree, n).shell) y = apply_site_map(y, x, leg);
  return y;
}

LocalOperator CayleyChain::sweep(const Tree& tree, int n) const {
  // Y_m = M_m^* Y_{m-1} M_m with M_m the product of the blocks rooted at level m - 1.
  const int d = spec_.d;
  LocalOperator y = LocalOperator::on_site(Vertex::root(), spec_.w0);
  for (int m = 1; m <= n; ++m) {
    const Region lm = levels(tree, m).ball;
    Matrix mm = Matrix::Identity(ipow(d, lm.size()), ipow(d, lm.size()));
    for (const auto& x : levels(tree, m - 1).shell) mm = mm * embed(block_on(x), lm).matrix();
    y = LocalOperator(lm, d, mm.adjoint() * embed(y, lm).matrix() * mm);
  }
  return y;
}

LocalOperator CayleyChain::phi_marginal(int n, const Region& keep) const {
  if (n < 1) throw InvalidParameter("phi_marginal needs n >= 1");
  const int d = spec_.d;
  const Tree tree = build_cayley(spec_.k, n);
  if (!levels(tree, n).ball.contains(keep))
    throw PreconditionError("region " + keep.to_string() + " is not inside Lambda_" + std::to_string(n));
  if (levels(tree, n - 1).ball.size() > kMaxOperatorSites)
    throw InvalidParameter("phi_marginal(" + std::to_string(n) + ") needs Lambda_" +
                           std::to_string(n - 1) + " above the cap");
  LocalOperator y = sweep(tree, n - 1);
  const Matrix leg = site_map(Matrix::Identity(d, d), h_sqrt_, 0, true);
  // One block of the last level at a time; children outside `keep` are traced at once.
  for (const auto& x : levels(tree, n - 1).shell) {
    Region kids;
    for (int i = 1; i <= spec_.k; ++i) kids = kids.with(x.child(i));
    const Region r = y.support().united(kids);
    if (r.size() > kMaxOperatorSites)
      throw InvalidParameter("phi_marginal(" + std::to_string(n) + ") needs " +
                             std::to_string(r.size()) + " sites, above the cap");
    const Matrix b = embed(block_on(x), r).matrix();
    y = LocalOperator(r, d, b.adjoint() * embed(y, r).matrix() * b);
    for (const auto& c : kids) y = apply_site_map(y, c, leg);
    y = normalized_partial_trace(y, r.minus(kids.minus(keep)));
  }
  return y;
}

cplx CayleyChain::phi_n(int n, const LocalOperator& a, PhiMethod method) const {
  if (a.d() != spec_.d) throw DimensionMismatch("observable dimension differs from the chain");
  const LocalOperator rho = phi_density(n, method);
  if (!rho.support().contains(a.support()))
    throw PreconditionError("observable support " + a.support().to_string() +
                            " is not inside Lambda_" + std::to_string(n));
  return (rho.matrix() * embed(a, rho.support()).matrix()).trace() /
         static_cast<double>(rho.dim());
}

LocalOperator CayleyChain::quasi_cond_expectation(int n, const LocalOperator& a) const {
  if (!h_invertible_) throw InvalidParameter("quasi-conditional expectations need invertible h");
  if (n < 0) throw InvalidParameter("n must be >= 0");
  if (a.d() != spec_.d) throw DimensionMismatch("observable dimension differs from the chain");
  const int d = spec_.d;
  const Tree tree = build_cayley(spec_.k, n + 1);
  for (const auto& v : a.support())
    if (v.level() > n + 1)
      throw PreconditionError("support " + a.support().to_string() + " is not inside Lambda_" +
                              std::to_string(n + 1));
  const Region ball = levels(tree, n).ball;

  std::vector<Vertex> deep, shallow;
  for (const auto& x : levels(tree, n).shell) {
    bool touched = false;
    for (int i = 1; i <= spec_.k; ++i) touched = touched || a.support().contains(x.child(i));
    if (touched)
      deep.push_back(x);
    else if (a.support().contains(x))
      shallow.push_back(x);
  }

  Region omega = a.support();
  for (const auto& x : deep) omega = omega.united(block_region(x, spec_.k));
  LocalOperator xop = embed(a, omega);
  if (!deep.empty()) {
    const Region& r = block_.support();
    const Matrix g = embed(LocalOperator::on_site(r[0], h_inv_sqrt_), r).matrix() *
                     block_.matrix() * on_children(r, h_sqrt_, spec_.k).matrix();
    for (const auto& x : deep) {
      const Matrix gx = embed(LocalOperator(block_region(x, spec_.k), d, g), omega).matrix();
      xop = LocalOperator(omega, d, gx * xop.matrix() * gx.adjoint());
    }
  }
  xop = normalized_partial_trace(xop, omega.intersected(ball));
  if (!shallow.empty()) {
    const Matrix vmap = site_map(h_inv_sqrt_, h_sqrt_, 0, false);
    for (const auto& x : shallow) xop = apply_site_map(xop, x, vmap);
  }
  return xop;
}

cplx CayleyChain::chain_expect(const LocalOperator& a) const {
  int m = 0;
  for (const auto& v : a.support()) m = std::max(m, v.level());
  LocalOperator x = a;
  for (int n = m; n >= 0; --n) x = quasi_cond_expectation(n, x);
  if (x.support() != Region{Vertex::root()})
    throw InvariantViolation("chain recursion did not end on the root");
  const Matrix rho = h_sqrt_ * spec_.w0 * h_sqrt_;
  return (rho * x.matrix()).trace() / static_cast<double>(spec_.d);
}

double CayleyChain::compatibility_check(int n) const {
  const LocalOperator lower = phi_density(n, PhiMethod::Auto);
  const LocalOperator reduced = phi_marginal(n + 1, lower.support());
  // phi(e_{pq}) = rho(q, p) / dim for the matrix unit e_{pq} of B_{Lambda_n}.
  return max_norm(reduced.matrix() - lower.matrix()) / static_cast<double>(lower.dim());
}

double CayleyChain::shift_invariance_check(int i, const std::vector<LocalOperator>& samples) const {
  double worst = 0.0;
  for (const auto& a : samples) {
    const LocalOperator shifted = a.relabelled(shift_region(i, a.support(), spec_.k));
    worst = std::max(worst, std::abs(chain_expect(shifted) - chain_expect(a)));
  }
  return worst;
}

TransferSuperoperator CayleyChain::transfer_superoperator() const {
  if (!h_invertible_) throw InvalidParameter("transfer superoperator needs invertible h");
  TransferSuperoperator t;
  t.T = site_map(h_inv_sqrt_, h_sqrt_, 1, false);
  t.vertex_map = site_map(h_inv_sqrt_, h_sqrt_, 0, false);
  Eigen::ComplexEigenSolver<Matrix> es(t.T, false);
  const auto& ev = es.eigenvalues();
  t.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::stable_sort(t.eigenvalues.begin(), t.eigenvalues.end(),
                   [](cplx a, cplx b) { return std::abs(a) > std::abs(b); });
  t.kernel_id = spec_.kernel_id;
  t.beta = spec_.beta;
  return t;
}

ClusteringResult CayleyChain::clustering_decay(const Matrix& a, const Matrix& b, int N) const {
  const int d = spec_.d;
  require_square(a, d, "observable a");
  require_square(b, d, "observable b");
  if (N < 1) throw InvalidParameter("N must be >= 1");
  const Vertex root = Vertex::root();
  ClusteringResult res;
  const cplx pa = chain_expect(LocalOperator::on_site(root, a));
  const cplx pb = chain_expect(LocalOperator::on_site(root, b));
  res.phi_a = pa.real();
  res.phi_b = pb.real();

  const TransferSuperoperator t = transfer_superoperator();
  res.rate = t.second_modulus();
  const LocalOperator bop = LocalOperator::on_site(root, b);
  const Matrix wt = h_sqrt_ * spec_.w0 * h_sqrt_;

  Matrix c = unvec_rowmajor(t.vertex_map * vec_rowmajor(a), d);
  std::vector<cplx> fast;
  for (int n = 1; n <= N; ++n) {
    const LocalOperator joint = op_mul(bop, LocalOperator::on_site(Vertex{1}, c));
    const LocalOperator e0 = quasi_cond_expectation(0, joint);
    const cplx f = (wt * e0.matrix()).trace() / static_cast<double>(d);
    fast.push_back(f);
    res.delta.push_back(std::abs(f - pa * pb));
    c = t.apply(c);
  }

  Vertex deep = root;
  for (int n = 1; n <= std::min(N, 2); ++n) {
    deep = deep.child(1);
    const LocalOperator joint = op_mul(LocalOperator::on_site(deep, a), bop);
    cplx v;
    if (n == 1) {
      v = phi_n(n, joint, PhiMethod::Auto);
    } else {
      const LocalOperator rho = phi_marginal(n, joint.support());
      v = (rho.matrix() * embed(joint, rho.support()).matrix()).trace() / static_cast<double>(rho.dim());
    }
    res.brute_force.push_back(std::abs(v - pa * pb));
    res.max_brute_force_gap =
        std::max(res.max_brute_force_gap, std::abs(v - fast[static_cast<std::size_t>(n - 1)]));
  }
  return res;
}

}  // namespace qmf
