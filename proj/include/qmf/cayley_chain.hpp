#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qmf/algebra.hpp"
#include "qmf/graph.hpp"

namespace qmf {

/// Homogeneous d-Markov chain data on the Cayley tree of order k.
///
/// K acts on (parent, child) with the parent leg first. The boundary weights h_x = h
/// and the root weight w0 are d x d. Traces are normalised so that Tr(1) = 1.
struct ChainSpec {
  int k = 2;
  int d = 2;
  Matrix K;
  Matrix h;
  Matrix w0;
  std::optional<double> alpha;
  std::string kernel_id = "custom";
  cplx beta = 0.0;
};

enum class HAnsatz { Scalar, Full };

struct HSolution {
  Matrix h;
  std::optional<double> alpha;
  std::string mode;  // "scalar" or "full"
  int iterations = 0;
};

/// Solves Tr_x(prod_i K_i (h (x) ... (x) h) prod_i K_i^*) = h.
/// Scalar mode tries h = alpha I and falls back to the full fixed-point iteration.
/// Throws SolverError on non-convergence, several distinct fixed directions, or a
/// non-positive result.
HSolution solve_h(const Matrix& K, int d, int k, HAnsatz ansatz = HAnsatz::Scalar,
                  double tol = 1e-12, int max_iter = 10000);

/// Solves Tr_(1)(w0 prod_j K_j prod_j h_j (prod_j K_j)^*) = h^{1/2} w0 h^{1/2} as an
/// eigenvector at eigenvalue 1, normalised by Tr(w0 h) = 1.
Matrix solve_w0(const Matrix& K, const Matrix& h, int k, double eig_tol = 1e-8);

/// Full spec from a kernel: h by solve_h, then w0 by solve_w0.
ChainSpec solve_chain(const Matrix& K, int d, int k, std::string kernel_id = "custom",
                      cplx beta = 0.0, HAnsatz ansatz = HAnsatz::Scalar);

/// Single-site transfer data; T and the vertex map act on row-major vectorisations.
struct TransferSuperoperator {
  /// Child-to-parent map: E_n applied to b at (x,1), read at x.
  Matrix T;
  /// E_n applied to b at a vertex x of W_n itself (children untouched).
  Matrix vertex_map;
  std::vector<cplx> eigenvalues;  // by decreasing modulus
  std::string kernel_id;
  cplx beta;

  Matrix apply(const Matrix& b) const;
  double second_modulus() const;
};

struct ClusteringResult {
  std::vector<double> delta;        // delta_n for n = 1..N
  std::vector<double> brute_force;  // delta_n from phi_n for n <= 2
  double max_brute_force_gap = 0.0;
  double rate = 0.0;                // second-largest |eigenvalue| of T
  double phi_a = 0.0;
  double phi_b = 0.0;
};

enum class PhiMethod { Auto, Explicit, Sweep };

class CayleyChain {
 public:
  /// Validates dimensions, Hermiticity/positivity of h and w0, and the normalisation and
  /// boundary equations within `tol` (InvariantViolation otherwise) unless validate is false.
  explicit CayleyChain(ChainSpec spec, bool validate = true, double tol = 1e-10);

  const ChainSpec& spec() const { return spec_; }
  int k() const { return spec_.k; }
  int d() const { return spec_.d; }

  /// |Tr(w0 h) - 1|.
  double normalization_residual() const;
  /// Max-norm residual of the boundary equation on the (k+1)-site block.
  double boundary_residual() const;
  /// Max over child index i of the residual of the initial condition.
  double initial_residual() const;

  /// Operator rho_n on Lambda_n with phi^(n)(a) = Tr(rho_n a).
  LocalOperator phi_density(int n, PhiMethod method = PhiMethod::Auto) const;
  /// phi^(n)(a) = Tr(W_{n+1]} (a (x) 1)); supp(a) must lie in Lambda_n.
  cplx phi_n(int n, const LocalOperator& a, PhiMethod method = PhiMethod::Auto) const;
  /// Density of phi^(n) reduced to Lambda_{n-1} together with the sites of `keep` in W_n.
  /// Blocks of the last level are contracted one at a time, so only Lambda_{n-1} plus k
  /// sites are ever dense.
  LocalOperator phi_marginal(int n, const Region& keep) const;

  /// E_n(a) for supp(a) inside Lambda_{n+1}; the result is supported in Lambda_n.
  LocalOperator quasi_cond_expectation(int n, const LocalOperator& a) const;
  /// Tr(h^{1/2} w0 h^{1/2} E_0 o ... o E_m(a)) with m the deepest level of supp(a).
  cplx chain_expect(const LocalOperator& a) const;

  /// Max over matrix units a of B_{Lambda_n} of |phi^(n+1)(a (x) 1) - phi^(n)(a)|.
  double compatibility_check(int n) const;
  /// Max over samples of |chain_expect(gamma_i(a)) - chain_expect(a)|.
  double shift_invariance_check(int i, const std::vector<LocalOperator>& samples) const;

  TransferSuperoperator transfer_superoperator() const;
  /// delta_n = |phi(gamma_1^n(a) b) - phi(a) phi(b)| for single-site a, b (d x d).
  ClusteringResult clustering_decay(const Matrix& a, const Matrix& b, int N) const;

  /// prod_{i=1..k} K_<0,i> on the block {root, (1), ..., (k)}.
  const LocalOperator& block_kernel() const { return block_; }

 private:
  LocalOperator block_on(const Vertex& x) const;
  /// Y_n on Lambda_n before the boundary legs are attached.
  LocalOperator sweep(const Tree& tree, int n) const;
  /// Map b -> Tr_x(G (b_x (x) 1) G^*) or the child version, G = pre L post.
  Matrix site_map(const Matrix& pre, const Matrix& post, int child, bool adjoint) const;

  ChainSpec spec_;
  LocalOperator block_;  // L on {root, (1), ..., (k)}
  Matrix h_sqrt_, h_inv_sqrt_, w0_sqrt_;
  bool h_invertible_ = false;
};

/// prod_{i=1..k} K_<0,i> on {root, (1), ..., (k)}, ascending child order.
LocalOperator block_product(const Matrix& K, int d, int k);

/// The boundary map h -> Tr_x(L (h (x) ... (x) h) L^*) on the block.
Matrix boundary_map(const LocalOperator& block, const Matrix& h);

}  // namespace qmf
