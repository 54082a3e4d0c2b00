#include <doctest.h>

#include <algorithm>
#include <memory>

#include "oracles.hpp"
#include "qmf/emf.hpp"
#include "qmf/error.hpp"
#include "qmf/random.hpp"

using namespace qmf;

namespace {

/// Whole-graph reference: positions follow (level, path) order; edges carry psi oriented (x, y).
struct Reference {
  std::vector<Vertex> order;
  std::vector<oracle::Edge> edges;
  int d;

  int pos(const Vertex& v) const {
    return static_cast<int>(std::find(order.begin(), order.end(), v) - order.begin());
  }
  int n() const { return static_cast<int>(order.size()); }
};

Reference reference(const AmplitudeField& f) {
  Reference r;
  r.order = f.graph().vertices();
  std::sort(r.order.begin(), r.order.end(), [](const Vertex& a, const Vertex& b) {
    if (a.level() != b.level()) return a.level() < b.level();
    return a.path() < b.path();
  });
  r.d = f.d();
  for (const auto& [x, y] : f.graph().edges()) r.edges.push_back({r.pos(x), r.pos(y), f.matrix(x, y)});
  return r;
}

/// (1/d) <psi, a psi> with psi over the whole stored graph.
cplx reference_expect(const Reference& r, const Matrix& a, const std::vector<Vertex>& support) {
  std::vector<int> pos;
  for (const auto& v : support) pos.push_back(r.pos(v));
  const oracle::Vector psi = oracle::psi_state(r.n(), r.d, r.edges);
  return psi.dot(oracle::apply_positions(a, pos, psi, r.n(), r.d)) / static_cast<double>(r.d);
}

Matrix example_psi() {
  Matrix psi(2, 2);
  psi << 1.0 / std::sqrt(3.0), std::sqrt(2.0 / 3.0), std::sqrt(2.0 / 3.0), 1.0 / std::sqrt(3.0);
  return psi;
}

AmplitudeField random_field(std::shared_ptr<const Graph> g, Rng& rng, int d, bool uniform) {
  AmplitudeField f(g, d);
  for (const auto& [x, y] : g->edges())
    f.set(x, y, uniform ? random_uniform_modulus_amplitudes(rng, d) : random_bistochastic_amplitudes(rng, d));
  return f;
}

}  // namespace

TEST_CASE("random amplitudes have bi-stochastic or uniform moduli") {
  Rng rng(1);
  for (int d : {2, 3, 4}) {
    const Matrix psi = random_bistochastic_amplitudes(rng, d);
    const Eigen::MatrixXd p = psi.cwiseAbs2();
    CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-13);
    CHECK((p.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-13);
    const Matrix u = random_uniform_modulus_amplitudes(rng, d);
    CHECK((u.cwiseAbs2().array() - 1.0 / d).abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("stored amplitudes transpose when the edge is reversed") {
  const auto t = std::make_shared<Tree>(build_cayley(2, 1));
  AmplitudeField f(t, 2);
  Matrix psi(2, 2);
  psi << 0.6, 0.8, 0.8, -0.6;
  f.set(Vertex{1}, Vertex{}, psi);  // rows indexed by (1)
  CHECK(f.amplitude(Vertex{1}, Vertex{}, 0, 1) == cplx(0.8));
  CHECK(f.matrix(Vertex{}, Vertex{1}) == psi.transpose());
  CHECK_THROWS_AS(f.set(Vertex{1}, Vertex{2}, psi), PreconditionError);
  CHECK_THROWS_AS(f.validate(), InvalidParameter);  // edge (root, 2) missing
  f.set(Vertex{}, Vertex{2}, psi);
  CHECK_NOTHROW(f.validate());
  Matrix bad = psi;
  bad(0, 0) = 0.9;
  f.set(Vertex{}, Vertex{2}, bad);
  CHECK(f.bistochastic_defect() > 0.1);
  CHECK_THROWS_AS(f.validate(), InvalidParameter);
}

TEST_CASE("psi on the full binary tree of depth 2 has squared norm d") {
  Rng rng(2);
  const auto t = std::make_shared<Tree>(build_cayley(2, 2));
  const AmplitudeField f = random_field(t, rng, 2, false);
  const Region all = levels(*t, 2).ball;
  const StateVector psi = psi_vector(f, all);
  CHECK(psi.amplitudes().size() == 128);
  const Reference r = reference(f);
  const double brute = oracle::psi_norm_squared(r.n(), 2, r.edges);
  CHECK(std::abs(brute - 2.0) < 1e-10);
  CHECK(std::abs(psi.norm_squared() - brute) < 1e-12);
  CHECK((psi.amplitudes() - oracle::psi_state(r.n(), 2, r.edges)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("uniform amplitudes on a three-site path have modulus 1/d") {
  for (int d : {2, 3}) {
    const auto path = std::make_shared<Tree>(build_cayley(1, 2));
    const Matrix u = Matrix::Constant(d, d, 1.0 / std::sqrt(static_cast<double>(d)));
    const AmplitudeField f = AmplitudeField::homogeneous(path, u);
    const StateVector psi = psi_vector(f, levels(*path, 2).ball);
    CHECK((psi.amplitudes().cwiseAbs().array() - 1.0 / d).abs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("norm law holds on every connected region of random trees") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::pair<Vertex, Vertex>> edges;
    const int n = 3 + trial % 6;
    for (int i = 1; i < n; ++i) edges.emplace_back(Vertex{static_cast<int>(rng() % i)}, Vertex{i});
    const auto t = std::make_shared<Tree>(tree_from_edges(edges, Vertex{0}));
    const int d = 2 + trial % 2;
    const AmplitudeField f = random_field(t, rng, d, false);
    for (const auto& r : connected_subsets(*t, t->vertex_count()))
      if (r.size() >= 2) CHECK(std::abs(psi_vector(f, r).norm_squared() - d) < 1e-10);
  }
}

TEST_CASE("psi needs a connected region") {
  const auto t = std::make_shared<Tree>(build_cayley(2, 2));
  const AmplitudeField f = AmplitudeField::homogeneous(t, example_psi());
  CHECK_THROWS_AS(psi_vector(f, Region{Vertex{1}, Vertex{2}}), PreconditionError);
}

TEST_CASE("expectations agree with the whole-tree configuration sum") {
  Rng rng(4);
  const auto t = std::make_shared<Tree>(build_cayley(2, 3));
  for (int s = 0; s < 4; ++s) {
    const AmplitudeField f = random_field(t, rng, 2, false);
    const Reference r = reference(f);
    const Matrix a = random_hermitian(rng, 2);
    CHECK(std::abs(emf_expect(f, LocalOperator::on_site(Vertex{}, a)) - reference_expect(r, a, {Vertex{}})) < 1e-12);
    const Matrix b = random_complex(rng, 4);
    const LocalOperator two(Region{Vertex{1}, Vertex{2}}, 2, b);
    CHECK(std::abs(emf_expect(f, two) - reference_expect(r, b, {Vertex{1}, Vertex{2}})) < 1e-12);
  }
}

TEST_CASE("expectations near the stored depth raise TruncationError") {
  const auto t = std::make_shared<Tree>(build_cayley(2, 2));
  const AmplitudeField f = AmplitudeField::homogeneous(t, example_psi());
  CHECK_THROWS_AS(emf_expect(f, matrix_unit(Vertex{1}, 1, 1, 2)), TruncationError);
  CHECK_NOTHROW(emf_expect(f, matrix_unit(Vertex{}, 1, 1, 2)));
}

TEST_CASE("the example field on a line") {
  const auto line = std::make_shared<Tree>(build_cayley(1, 6));
  const AmplitudeField f = AmplitudeField::homogeneous(line, example_psi());
  const Reference r = reference(f);
  const Vertex x{1}, y{1, 1};

  // Marginal and adjacent correlation as stated for this field.
  CHECK(std::abs(emf_expect(f, matrix_unit(x, 1, 1, 2)) - 0.5) < 1e-12);
  CHECK(std::abs(emf_expect(f, op_mul(matrix_unit(x, 1, 1, 2), matrix_unit(y, 1, 1, 2))) - 1.0 / 6.0) < 1e-12);

  // Off-diagonal correlation: reference value 8/27 from the configuration sum.
  const LocalOperator hop = op_mul(matrix_unit(x, 1, 2, 2), matrix_unit(y, 2, 1, 2));
  const cplx ref = reference_expect(r, hop.matrix(), {x, y});
  CHECK(std::abs(ref - 8.0 / 27.0) < 1e-13);
  CHECK(std::abs(emf_expect(f, hop) - ref) < 1e-12);
}

TEST_CASE("classicality report of the example field") {
  const auto line = std::make_shared<Tree>(build_cayley(1, 6));
  const AmplitudeField f = AmplitudeField::homogeneous(line, example_psi());
  const ClassicalityReport rep = classicality_report(f, 2);
  REQUIRE(rep.segment.size() == 2);
  CHECK(rep.rank == 4);
  CHECK(rep.product_deviation > 1.0 / 20.0);
  REQUIRE(rep.ppt.has_value());

  // Reference density rho = sum_pq phi(e_pq) e_qp on the segment.
  const Reference r = reference(f);
  Matrix rho = Matrix::Zero(4, 4);
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      Matrix e = Matrix::Zero(4, 4);
      e(p, q) = 1.0;
      rho(q, p) = reference_expect(r, e, rep.segment);
    }
  CHECK((rho - rep.density).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(es.eigenvalues()(i) - rep.eigenvalues[static_cast<std::size_t>(i)]) < 1e-12);

  Matrix pt(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) pt(i * 2 + p, j * 2 + q) = rho(i * 2 + q, j * 2 + p);
  const double pt_min = Eigen::SelfAdjointEigenSolver<Matrix>(pt).eigenvalues()(0);
  CHECK(std::abs(pt_min - *rep.ppt_min_eigenvalue) < 1e-12);
  CHECK(*rep.ppt == (pt_min >= -1e-12));
}

TEST_CASE("uniform positive amplitudes give a pure product state") {
  const auto line = std::make_shared<Tree>(build_cayley(1, 6));
  const AmplitudeField f = AmplitudeField::homogeneous(line, Matrix::Constant(2, 2, 1.0 / std::sqrt(2.0)));
  const ClassicalityReport rep = classicality_report(f, 2);
  // Reference: psi is proportional to the all-ones vector, so the restriction is |+><+| (x) |+><+|.
  const Reference r = reference(f);
  Matrix e = Matrix::Zero(4, 4);
  e(0, 3) = 1.0;
  CHECK(std::abs(reference_expect(r, e, rep.segment) - 0.25) < 1e-13);
  CHECK(rep.rank == 1);
  CHECK(rep.product_deviation < 1e-12);
  CHECK(*rep.ppt);
}

TEST_CASE("classicality needs a long enough path") {
  const auto line = std::make_shared<Tree>(build_cayley(1, 2));
  const AmplitudeField f = AmplitudeField::homogeneous(line, example_psi());
  CHECK_THROWS_AS(classicality_report(f, 3), PreconditionError);
}

TEST_CASE("boundary isometries") {
  Rng rng(5);
  const auto t = std::make_shared<Tree>(build_cayley(2, 3));
  const AmplitudeField f = random_field(t, rng, 3, false);
  const Vertex z{1}, x{1, 2};
  const Matrix psi = f.matrix(z, x);

  const BoundaryIsometry down = boundary_isometry(f, z, x);
  CHECK((down.v.adjoint() * down.v - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(down.v(i * 3 + j, i) == psi(i, j));

  // Towards the parent the pair order puts the parent first.
  const BoundaryIsometry up = boundary_isometry(f, x, z);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(up.v(j * 3 + i, i) == psi(j, i));
  CHECK((up.v.adjoint() * up.v - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

  CHECK_THROWS_AS(boundary_isometry(f, Vertex{1}, Vertex{2}), PreconditionError);

  // Sibling isometries commute.
  const BoundaryIsometry a = boundary_isometry(f, z, Vertex{1, 1});
  for (int w = 1; w <= 3; ++w) {
    const StateVector e = StateVector::basis(Region{z}, 3, {w});
    const StateVector ab = apply_isometry(down, apply_isometry(a, e));
    const StateVector ba = apply_isometry(a, apply_isometry(down, e));
    CHECK((ab.amplitudes() - ba.amplitudes()).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("the Heisenberg recursion reproduces the field state") {
  Rng rng(6);
  const auto t = std::make_shared<Tree>(build_cayley(2, 4));
  for (int s = 0; s < 6; ++s) {
    const AmplitudeField f = random_field(t, rng, 2, false);
    const LocalOperator a = op_mul(LocalOperator::on_site(Vertex{}, random_hermitian(rng, 2)),
                                   LocalOperator::on_site(Vertex{2}, random_hermitian(rng, 2)));
    CHECK(std::abs(emf_as_chain(f, 3, a) - emf_expect(f, a)) < 1e-10);
    CHECK(std::abs(emf_as_chain(f, 2, LocalOperator::on_site(Vertex{}, a.matrix().topLeftCorner(2, 2))) -
                   emf_expect(f, LocalOperator::on_site(Vertex{}, a.matrix().topLeftCorner(2, 2)))) < 1e-10);
  }
  const AmplitudeField f = random_field(t, rng, 2, false);
  CHECK_THROWS_AS(emf_as_chain(f, 2, matrix_unit(Vertex{1}, 1, 1, 2)), PreconditionError);
}

TEST_CASE("uniform-modulus fields are reconstructed shell by shell") {
  Rng rng(7);
  const auto t = std::make_shared<Tree>(build_cayley(2, 4));
  for (int s = 0; s < 6; ++s) {
    const AmplitudeField u = random_field(t, rng, 2, true);
    const LocalOperator a(Region{Vertex{}, Vertex{1}}, 2, random_complex(rng, 4));
    CHECK(std::abs(gqms_reconstruct(u, a, 2) - emf_expect(u, a)) < 1e-10);
  }
  const AmplitudeField b = random_field(t, rng, 2, false);
  CHECK_THROWS_AS(gqms_reconstruct(b, matrix_unit(Vertex{}, 1, 1, 2), 2), UnsupportedField);
}

TEST_CASE("a loop breaks the norm law") {
  const Vertex a{0}, b{1}, c{2}, e{3};
  const auto cycle = std::make_shared<Graph>(Graph::from_edges({{a, b}, {b, c}, {c, e}, {e, a}}));
  Matrix psi(2, 2);
  psi << std::sqrt(0.9), std::sqrt(0.1), std::sqrt(0.1), std::sqrt(0.9);
  const AmplitudeField f = AmplitudeField::homogeneous(cycle, psi);
  CHECK(f.bistochastic_defect() < 1e-15);
  // Sum over the cycle of prod |psi|^2 is Tr(P^4) = 1 + 0.8^4.
  const Reference r = reference(f);
  const double brute = oracle::psi_norm_squared(4, 2, r.edges);
  CHECK(std::abs(brute - 1.4096) < 1e-12);
  CHECK(std::abs(psi_vector(f, Region{a, b, c, e}).norm_squared() - brute) < 1e-12);
  CHECK_THROWS_AS(f.tree(), NotATreeError);
  CHECK_THROWS_AS(emf_expect(f, matrix_unit(a, 1, 1, 2)), NotATreeError);
}

TEST_CASE("nested regions for the field recursion") {
  const Tree t = build_cayley(2, 3);
  CHECK(emf_region(t, 1) == Region{Vertex{}});
  CHECK(emf_region(t, 2) == levels(t, 1).ball);
  CHECK_THROWS_AS(emf_region(t, 0), InvalidParameter);
  const Tree finite = tree_from_edges({{Vertex{0}, Vertex{1}}}, Vertex{0});
  CHECK(emf_region(finite, 5).size() == 2);
}
