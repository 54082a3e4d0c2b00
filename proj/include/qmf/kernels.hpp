#pragma once

#include <map>
#include <string>
#include <vector>

#include "qmf/algebra.hpp"
#include "qmf/cayley_chain.hpp"

namespace qmf {

enum class KernelFamily { Hopping, Diagonal };

std::string to_string(KernelFamily f);
/// "hopping" or "diagonal"; throws InvalidParameter otherwise.
KernelFamily parse_kernel_family(const std::string& s);

/// H = e12 (x) e21 + e21 (x) e12 on two qubits.
Matrix hopping_generator();
/// P = e11 (x) e11 + e22 (x) e22 on two qubits.
Matrix diagonal_projector();

/// exp(beta H) = I + sinh(beta) H + (cosh(beta) - 1) H^2.
Matrix hopping_kernel(double beta);
/// exp(beta P) = I + (e^beta - 1) P. Complex beta is accepted.
Matrix diagonal_kernel(cplx beta);

/// Closed forms for one kernel family at one beta, order k.
struct AnalyticOracle {
  KernelFamily family;
  cplx beta;
  int k = 2;
  Matrix K;
  /// c with Tr_x(K K^*) = c I.
  double edge_trace = 1.0;
  double alpha = 1.0;
  Matrix h;
  /// Solution of the initial condition: proportional to I, fixed by Tr(w0 h) = 1.
  Matrix w0;
  /// Tr_x(prod_i K_i (b at child 1) prod_i K_i^*) for the matrix units b, keyed "e11" etc.
  std::map<std::string, Matrix> child_traces;
  /// Child-to-parent transfer map on row-major vectorisations.
  Matrix transfer;
  /// Second-largest |eigenvalue| of the transfer map.
  double transfer_rate = 0.0;
};

AnalyticOracle analytic_oracle(KernelFamily family, cplx beta, int k = 2);

struct OracleRow {
  double beta = 0.0;
  double alpha_error = 0.0;
  double h_error = 0.0;
  double w0_error = 0.0;
  double kernel_error = 0.0;      // herm_exp vs closed-form K
  double edge_trace_error = 0.0;  // Tr_x(K K^*) vs c I
  double child_trace_error = 0.0;
  double transfer_error = 0.0;
  double normalization_residual = 0.0;
  double boundary_residual = 0.0;
  double initial_residual = 0.0;

  double max_error() const;
};

struct OracleReport {
  KernelFamily family;
  std::vector<OracleRow> rows;
  double max_error() const;
};

/// Compares solve_h / solve_w0 and direct trace computations with the closed forms.
OracleReport oracle_vs_numeric(KernelFamily family, const std::vector<double>& betas, int k = 2);

}  // namespace qmf
