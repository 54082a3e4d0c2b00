#include "qmf/random.hpp"

#include <cmath>
#include <numbers>

#include "qmf/error.hpp"

namespace qmf {

Matrix random_complex(Rng& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  return m;
}

Matrix random_hermitian(Rng& rng, int n) {
  const Matrix m = random_complex(rng, n);
  return 0.5 * (m + m.adjoint());
}

Eigen::MatrixXd sinkhorn(Eigen::MatrixXd m, double tol, int max_iter) {
  if ((m.array() <= 0.0).any()) throw InvalidParameter("sinkhorn needs a strictly positive matrix");
  for (int it = 0; it < max_iter; ++it) {
    m = m.array().colwise() / m.rowwise().sum().array();
    m = m.array().rowwise() / m.colwise().sum().array();
    const double err = (m.rowwise().sum().array() - 1.0).abs().maxCoeff();
    if (err < tol) return m;
  }
  throw SolverError("sinkhorn balancing did not converge");
}

Matrix random_bistochastic_amplitudes(Rng& rng, int d) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Eigen::MatrixXd p(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) p(i, j) = u(rng);
  p = sinkhorn(std::move(p));
  Matrix psi(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) psi(i, j) = std::polar(std::sqrt(p(i, j)), phase(rng));
  return psi;
}

Matrix random_uniform_modulus_amplitudes(Rng& rng, int d) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  Matrix psi(d, d);
  const double r = 1.0 / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) psi(i, j) = std::polar(r, phase(rng));
  return psi;
}

}  // namespace qmf
