#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qmf/cayley_chain.hpp"
#include "qmf/error.hpp"
#include "qmf/kernels.hpp"
#include "qmf/random.hpp"

using namespace qmf;

namespace {

double diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// exp of a random Hermitian generator: a kernel with no symmetry.
Matrix generic_kernel(Rng& rng, double beta) { return oracle::expm_series(beta * random_hermitian(rng, 4)); }

/// phi^(1)(a) from the Kronecker-product density on the 7-site ball.
cplx reference_phi1(const ChainSpec& s, const Matrix& a, const std::vector<int>& pos) {
  const Matrix w = oracle::binary_chain_density(s.K, s.h, s.w0);
  return (w * oracle::embed_positions(a, pos, 7, 2)).trace() / 128.0;
}

}  // namespace

TEST_CASE("block product and boundary map from Kronecker products") {
  Rng rng(1);
  const Matrix K = generic_kernel(rng, 0.4);
  const LocalOperator L = block_product(K, 2, 2);
  CHECK(L.support() == Region{Vertex{}, Vertex{1}, Vertex{2}});
  const Matrix ref = oracle::embed_positions(K, {0, 1}, 3, 2) * oracle::embed_positions(K, {0, 2}, 3, 2);
  CHECK(diff(L.matrix(), ref) < 1e-13);

  const Matrix a = random_complex(rng, 2);
  const Matrix h = a * a.adjoint();
  const Matrix conj = ref * oracle::kron_all({Matrix::Identity(2, 2), h, h}) * ref.adjoint();
  CHECK(diff(boundary_map(L, h), oracle::partial_trace_keep(conj, {0}, 3, 2)) < 1e-13);
}

TEST_CASE("scalar boundary solutions") {
  const Matrix K = hopping_kernel(0.5);
  const HSolution s = solve_h(K, 2, 2);
  CHECK(s.mode == "scalar");
  REQUIRE(s.alpha.has_value());
  CHECK(std::abs(*s.alpha - std::pow(std::cosh(0.5), -4.0)) < 1e-12);
  CHECK(diff(boundary_map(block_product(K, 2, 2), s.h), s.h) < 1e-12);

  // Order three: alpha = c^{-1/2} with c = cosh^6.
  const HSolution s3 = solve_h(K, 2, 3);
  CHECK(std::abs(*s3.alpha - std::pow(std::cosh(0.5), -3.0)) < 1e-12);
  CHECK(diff(boundary_map(block_product(K, 2, 3), s3.h), s3.h) < 1e-12);

  // A single child has a fixed point only when Tr_x(K K^*) = I.
  CHECK_THROWS_AS(solve_h(K, 2, 1), SolverError);
  CHECK(solve_h(Matrix::Identity(4, 4), 2, 1).alpha.value() == doctest::Approx(1.0));
}

TEST_CASE("full boundary solutions for a generic kernel") {
  Rng rng(2);
  const Matrix K = generic_kernel(rng, 0.3);
  const HSolution s = solve_h(K, 2, 2);
  CHECK(s.mode == "full");
  CHECK(diff(boundary_map(block_product(K, 2, 2), s.h), s.h) < 1e-10);
  CHECK(min_eigenvalue(s.h) > 0.0);

  // Hopping: full mode lands on the scalar solution.
  const HSolution f = solve_h(hopping_kernel(0.2), 2, 2, HAnsatz::Full);
  CHECK(diff(f.h, std::pow(std::cosh(0.2), -4.0) * Matrix::Identity(2, 2)) < 1e-10);
}

TEST_CASE("several fixed directions are reported, not chosen") {
  // Limit of the diagonal kernel: every diagonal matrix direction e11, e22 is fixed.
  const Matrix P = diagonal_projector();
  CHECK_THROWS_AS(solve_h(P, 2, 2, HAnsatz::Full), SolverError);
}

TEST_CASE("initial weight solves its eigenproblem") {
  Rng rng(3);
  const Matrix K = generic_kernel(rng, 0.3);
  const ChainSpec s = solve_chain(K, 2, 2);
  CHECK(is_hermitian(s.w0));
  CHECK(min_eigenvalue(s.w0) >= -1e-12);
  CHECK(std::abs((s.w0 * s.h).trace() / 2.0 - 1.0) < 1e-12);
  const CayleyChain chain(s);
  CHECK(chain.boundary_residual() < 1e-10);
  CHECK(chain.normalization_residual() < 1e-12);
  for (auto fam : {KernelFamily::Hopping, KernelFamily::Diagonal})
    CHECK(CayleyChain(solve_chain(analytic_oracle(fam, 0.7).K, 2, 2)).initial_residual() < 1e-10);
}

TEST_CASE("explicit finite-volume state against the Kronecker reference") {
  Rng rng(4);
  for (int trial = 0; trial < 3; ++trial) {
    const ChainSpec s = solve_chain(generic_kernel(rng, 0.5), 2, 2);
    const CayleyChain chain(s);
    const Matrix a = random_complex(rng, 8);
    const LocalOperator op(Region{Vertex{}, Vertex{1}, Vertex{2}}, 2, a);
    const cplx ref = reference_phi1(s, a, {0, 1, 2});
    CHECK(std::abs(chain.phi_n(1, op, PhiMethod::Explicit) - ref) < 1e-12);
    CHECK(std::abs(chain.phi_n(1, op, PhiMethod::Sweep) - ref) < 1e-12);
    CHECK(std::abs(chain.chain_expect(op) - ref) < 1e-10);
  }
}

TEST_CASE("hopping chain: frozen correlations from the Kronecker reference") {
  const ChainSpec s = solve_chain(hopping_kernel(0.5), 2, 2, "hopping", 0.5);
  const CayleyChain chain(s);
  const Matrix hop = oracle::kron(oracle::unit(2, 1, 2), oracle::unit(2, 2, 1));
  const cplx ref = reference_phi1(s, hop, {0, 1});
  CHECK(std::abs(ref - 0.1611487327827173) < 1e-13);
  const LocalOperator op = op_mul(matrix_unit(Vertex{}, 1, 2, 2), matrix_unit(Vertex{1}, 2, 1, 2));
  CHECK(std::abs(chain.chain_expect(op) - ref) < 1e-12);
  CHECK(std::abs(chain.chain_expect(matrix_unit(Vertex{2}, 1, 1, 2)) - 0.5) < 1e-12);
}

TEST_CASE("branch-wise marginals agree with full densities") {
  Rng rng(5);
  const CayleyChain chain(solve_chain(generic_kernel(rng, 0.4), 2, 2));
  const LocalOperator full = chain.phi_density(1, PhiMethod::Explicit);
  const LocalOperator marg = chain.phi_marginal(1, full.support());
  CHECK(max_abs_diff(full, marg) < 1e-12);
  const LocalOperator two = chain.phi_density(2, PhiMethod::Sweep);
  const Region keep{Vertex{}, Vertex{1}, Vertex{2}, Vertex{1, 2}};
  CHECK(max_abs_diff(chain.phi_marginal(2, keep), normalized_partial_trace(two, keep)) < 1e-12);
  CHECK_THROWS_AS(chain.phi_marginal(2, Region{Vertex{1, 1, 1}}), PreconditionError);
  CHECK_THROWS_AS(chain.phi_density(2, PhiMethod::Explicit), InvalidParameter);
}

TEST_CASE("compatibility of consecutive finite-volume states") {
  Rng rng(6);
  const CayleyChain generic(solve_chain(generic_kernel(rng, 0.4), 2, 2));
  CHECK(generic.compatibility_check(0) < 1e-10);
  CHECK(generic.compatibility_check(1) < 1e-10);
  for (auto fam : {KernelFamily::Hopping, KernelFamily::Diagonal}) {
    const AnalyticOracle o = analytic_oracle(fam, 0.7, 3);
    const CayleyChain chain(solve_chain(o.K, 2, 3));
    CHECK(chain.compatibility_check(0) < 1e-10);
    CHECK(chain.compatibility_check(1) < 1e-10);
  }
}

TEST_CASE("quasi-conditional expectations are unital") {
  Rng rng(7);
  const CayleyChain chain(solve_chain(generic_kernel(rng, 0.4), 2, 2));
  const Region l1{Vertex{}, Vertex{1}, Vertex{2}};
  const LocalOperator e = chain.quasi_cond_expectation(0, LocalOperator::identity(l1, 2));
  CHECK(e.support() == Region{Vertex{}});
  CHECK(diff(e.matrix(), Matrix::Identity(2, 2)) < 1e-12);
  CHECK(std::abs(chain.chain_expect(LocalOperator::identity(l1, 2)) - 1.0) < 1e-12);
  CHECK_THROWS_AS(chain.quasi_cond_expectation(0, matrix_unit(Vertex{1, 1}, 1, 1, 2)), PreconditionError);
}

TEST_CASE("shift invariance and its perturbed control") {
  std::vector<LocalOperator> samples;
  for (int p = 1; p <= 2; ++p)
    for (int q = 1; q <= 2; ++q) {
      samples.push_back(matrix_unit(Vertex{}, p, q, 2));
      samples.push_back(op_mul(matrix_unit(Vertex{}, p, q, 2), matrix_unit(Vertex{2}, q, p, 2)));
    }
  for (auto fam : {KernelFamily::Hopping, KernelFamily::Diagonal}) {
    ChainSpec s = solve_chain(analytic_oracle(fam, 0.5).K, 2, 2);
    const CayleyChain chain(s);
    CHECK(chain.shift_invariance_check(1, samples) < 1e-10);
    CHECK(chain.shift_invariance_check(2, samples) < 1e-10);
    s.w0(0, 0) *= 1.3;
    s.w0(1, 1) *= 0.7;
    const CayleyChain bent(s, false);
    CHECK(bent.shift_invariance_check(1, samples) > 1e-3);
    CHECK(bent.initial_residual() > 1e-3);
    CHECK_NOTHROW(CayleyChain{s});
    s.w0 *= 2.0;
    CHECK_THROWS_AS(CayleyChain{s}, InvariantViolation);
  }
}

TEST_CASE("transfer spectrum of the hopping kernel") {
  const double beta = 0.8;
  const CayleyChain chain(solve_chain(hopping_kernel(beta), 2, 2));
  const TransferSuperoperator t = chain.transfer_superoperator();
  const double lambda = std::sinh(beta) / std::pow(std::cosh(beta), 2);
  REQUIRE(t.eigenvalues.size() == 4);
  CHECK(std::abs(std::abs(t.eigenvalues[0]) - 1.0) < 1e-12);
  CHECK(std::abs(std::abs(t.eigenvalues[1]) - lambda) < 1e-12);
  CHECK(std::abs(std::abs(t.eigenvalues[2]) - lambda) < 1e-12);
  CHECK(std::abs(t.eigenvalues[3]) < 1e-12);
  CHECK(diff(t.apply(Matrix::Identity(2, 2)), Matrix::Identity(2, 2)) < 1e-12);
}

TEST_CASE("clustering via transfer powers") {
  Matrix e11 = Matrix::Zero(2, 2);
  e11(0, 0) = 1.0;
  const double beta = 0.6;
  const CayleyChain diag(solve_chain(diagonal_kernel(beta), 2, 2));
  const ClusteringResult r = diag.clustering_decay(e11, e11, 8);
  CHECK(r.max_brute_force_gap < 1e-9);
  for (std::size_t n = 1; n < r.delta.size(); ++n)
    CHECK(std::abs(r.delta[n] / r.delta[n - 1] - std::tanh(beta)) < 1e-8);
  CHECK(std::abs(r.rate - std::tanh(beta)) < 1e-12);

  const ClusteringResult id = diag.clustering_decay(Matrix::Identity(2, 2), e11, 5);
  for (double v : id.delta) CHECK(v < 1e-14);

  Rng rng(8);
  const CayleyChain generic(solve_chain(generic_kernel(rng, 0.5), 2, 2));
  const ClusteringResult g = generic.clustering_decay(random_hermitian(rng, 2), random_hermitian(rng, 2), 4);
  CHECK(g.max_brute_force_gap < 1e-9);
}

TEST_CASE("complex beta only changes phases of the diagonal kernel") {
  const cplx beta(0.5, 0.3);
  ChainSpec s = solve_chain(diagonal_kernel(beta), 2, 2, "diagonal", beta);
  const CayleyChain chain(s);
  CHECK(std::abs(*s.alpha - 4.0 / std::pow(std::exp(1.0) + 1.0, 2)) < 1e-12);
  CHECK(chain.compatibility_check(1) < 1e-10);
}

TEST_CASE("invalid chain data is rejected") {
  ChainSpec s = solve_chain(hopping_kernel(0.3), 2, 2);
  s.h = -s.h;
  CHECK_THROWS_AS(CayleyChain{s}, InvariantViolation);
  ChainSpec t = solve_chain(hopping_kernel(0.3), 2, 2);
  t.K = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(CayleyChain{t}, DimensionMismatch);
}
