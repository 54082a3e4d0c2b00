#include "qmf/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "qmf/error.hpp"

namespace qmf {

namespace {

Matrix unit2(int i, int j) {
  Matrix e = Matrix::Zero(2, 2);
  e(i - 1, j - 1) = 1.0;
  return e;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double max_norm(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

const char* const kUnitNames[2][2] = {{"e11", "e12"}, {"e21", "e22"}};

}  // namespace

std::string to_string(KernelFamily f) { return f == KernelFamily::Hopping ? "hopping" : "diagonal"; }

KernelFamily parse_kernel_family(const std::string& s) {
  if (s == "hopping") return KernelFamily::Hopping;
  if (s == "diagonal") return KernelFamily::Diagonal;
  throw InvalidParameter("unknown kernel family '" + s + "'");
}

Matrix hopping_generator() { return kron(unit2(1, 2), unit2(2, 1)) + kron(unit2(2, 1), unit2(1, 2)); }

Matrix diagonal_projector() { return kron(unit2(1, 1), unit2(1, 1)) + kron(unit2(2, 2), unit2(2, 2)); }

Matrix hopping_kernel(double beta) {
  const Matrix h = hopping_generator();
  return Matrix::Identity(4, 4) + std::sinh(beta) * h + (std::cosh(beta) - 1.0) * h * h;
}

Matrix diagonal_kernel(cplx beta) {
  return Matrix::Identity(4, 4) + (std::exp(beta) - 1.0) * diagonal_projector();
}

AnalyticOracle analytic_oracle(KernelFamily family, cplx beta, int k) {
  if (k < 2) throw InvalidParameter("closed forms are stated for k >= 2");
  if (family == KernelFamily::Hopping && beta.imag() != 0.0)
    throw InvalidParameter("the hopping kernel takes a real beta");
  AnalyticOracle o;
  o.family = family;
  o.beta = beta;
  o.k = k;
  const Matrix id = Matrix::Identity(2, 2);

  // Single-edge traces Tr_x(K b K^*) for the matrix units b at the child.
  Matrix single[2][2];
  double lambda = 0.0;
  if (family == KernelFamily::Hopping) {
    const double b = beta.real();
    o.K = hopping_kernel(b);
    o.edge_trace = std::cosh(b) * std::cosh(b);
    single[0][0] = single[1][1] = 0.5 * o.edge_trace * id;
    single[0][1] = std::sinh(b) * unit2(1, 2);
    single[1][0] = std::sinh(b) * unit2(2, 1);
    lambda = std::sinh(b) / o.edge_trace;
  } else {
    o.K = diagonal_kernel(beta);
    const double q = std::exp(2.0 * beta.real());  // |e^beta|^2
    o.edge_trace = (q + 1.0) / 2.0;
    single[0][0] = 0.5 * (q * unit2(1, 1) + unit2(2, 2));
    single[1][1] = 0.5 * (unit2(1, 1) + q * unit2(2, 2));
    single[0][1] = Matrix::Zero(2, 2);
    single[1][0] = Matrix::Zero(2, 2);
    lambda = std::tanh(beta.real());
  }
  const double c = o.edge_trace;
  o.alpha = std::pow(c, -static_cast<double>(k) / (k - 1));
  o.h = o.alpha * id;
  o.w0 = id / o.alpha;

  // With h = alpha I, T(b) = alpha^{k-1} c^{k-1} Tr_x(K b K^*) = Tr_x(K b K^*) / c.
  o.transfer = Matrix::Zero(4, 4);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      o.child_traces[kUnitNames[p][q]] = std::pow(c, k - 1) * single[p][q];
      o.transfer.col(p * 2 + q) = vec_rowmajor(single[p][q] / c);
    }
  o.transfer_rate = std::abs(lambda);
  return o;
}

double OracleRow::max_error() const {
  return std::max({alpha_error, h_error, w0_error, kernel_error, edge_trace_error,
                   child_trace_error, transfer_error, normalization_residual, boundary_residual,
                   initial_residual});
}

double OracleReport::max_error() const {
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.max_error());
  return worst;
}

OracleReport oracle_vs_numeric(KernelFamily family, const std::vector<double>& betas, int k) {
  OracleReport rep{family, {}};
  const Matrix gen = family == KernelFamily::Hopping ? hopping_generator() : diagonal_projector();
  for (double beta : betas) {
    const AnalyticOracle o = analytic_oracle(family, beta, k);
    OracleRow row;
    row.beta = beta;
    row.kernel_error = max_norm(herm_exp(gen, beta) - o.K);

    const ChainSpec spec = solve_chain(o.K, 2, k, to_string(family), beta);
    row.alpha_error = spec.alpha ? std::abs(*spec.alpha - o.alpha) : std::abs(spec.h(0, 0) - o.alpha);
    row.h_error = max_norm(spec.h - o.h);
    row.w0_error = max_norm(spec.w0 - o.w0);

    const LocalOperator edge(Region{Vertex::root(), Vertex{1}}, 2, o.K * o.K.adjoint());
    row.edge_trace_error =
        max_norm(normalized_partial_trace(edge, Region{Vertex::root()}).matrix() -
                 o.edge_trace * Matrix::Identity(2, 2));

    const LocalOperator block = block_product(o.K, 2, k);
    for (int p = 1; p <= 2; ++p)
      for (int q = 1; q <= 2; ++q) {
        const Matrix b = embed(matrix_unit(Vertex{1}, p, q, 2), block.support()).matrix();
        const LocalOperator conj(block.support(), 2,
                                 block.matrix() * b * block.matrix().adjoint());
        row.child_trace_error = std::max(
            row.child_trace_error,
            max_norm(normalized_partial_trace(conj, Region{Vertex::root()}).matrix() -
                     o.child_traces.at(kUnitNames[p - 1][q - 1])));
      }

    const CayleyChain chain(spec);
    row.transfer_error = max_norm(chain.transfer_superoperator().T - o.transfer);
    row.normalization_residual = chain.normalization_residual();
    row.boundary_residual = chain.boundary_residual();
    row.initial_residual = chain.initial_residual();
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace qmf
