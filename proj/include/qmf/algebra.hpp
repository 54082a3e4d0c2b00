#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qmf/graph.hpp"

namespace qmf {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Numerical tolerances used by equality assertions.
struct Tolerance {
  double equality = 1e-10;
  double trace = 1e-12;
};

/// Sites above this count are refused for explicit operators.
inline constexpr std::size_t kMaxOperatorSites = 9;
/// Sites above this count are refused for state vectors.
inline constexpr std::size_t kMaxVectorSites = 16;

/// Mixed-radix index bookkeeping for a region: configuration omega is encoded as
/// sum_p omega(site_p) * d^(n-1-p), so the last site in canonical order varies fastest.
class SiteLayout {
 public:
  SiteLayout(const Region& region, int d);

  std::int64_t dim() const { return dim_; }
  int d() const { return d_; }
  const Region& region() const { return region_; }

  /// Digit of configuration `index` at position p.
  int digit(std::int64_t index, std::size_t p) const {
    return static_cast<int>((index / strides_[p]) % d_);
  }
  std::int64_t stride(std::size_t p) const { return strides_[p]; }

  /// Table full[sub * dim(complement) + comp] -> index in this layout, where sub
  /// enumerates configurations of `part` and comp those of region \ part.
  std::vector<std::int64_t> split_table(const Region& part) const;

 private:
  Region region_;
  int d_;
  std::int64_t dim_;
  std::vector<std::int64_t> strides_;
};

std::int64_t ipow(int base, std::size_t exp);

/// Dense vector on H_Lambda indexed by configurations in canonical site order.
class StateVector {
 public:
  StateVector(Region support, int d);
  StateVector(Region support, int d, Vector amplitudes);

  /// e_omega for configuration values in [1, d], listed in canonical site order.
  static StateVector basis(const Region& support, int d, const std::vector<int>& omega);

  const Region& support() const { return support_; }
  int d() const { return d_; }
  const Vector& amplitudes() const { return amp_; }
  Vector& amplitudes() { return amp_; }
  double norm_squared() const { return amp_.squaredNorm(); }

 private:
  Region support_;
  int d_;
  Vector amp_;
};

/// Dense operator in B(H_Lambda) with rows and columns in canonical order.
class LocalOperator {
 public:
  LocalOperator(Region support, int d);
  LocalOperator(Region support, int d, Matrix entries);

  static LocalOperator identity(const Region& support, int d);
  /// Operator on a single site built from a d x d matrix.
  static LocalOperator on_site(const Vertex& x, Matrix m);

  const Region& support() const { return support_; }
  int d() const { return d_; }
  std::int64_t dim() const { return entries_.rows(); }
  const Matrix& matrix() const { return entries_; }
  Matrix& matrix() { return entries_; }

  /// Same matrix on a relabelled support; the relabelling must preserve canonical order.
  LocalOperator relabelled(const Region& support) const;

  LocalOperator& operator*=(cplx c) {
    entries_ *= c;
    return *this;
  }

 private:
  Region support_;
  int d_;
  Matrix entries_;
};

/// Standard matrix unit e_ij on site x (1-based indices).
LocalOperator matrix_unit(const Vertex& x, int i, int j, int d);

/// a tensor identity on region \ support(a), legs in canonical order of region.
LocalOperator embed(const LocalOperator& a, const Region& region);

/// Partial trace onto `keep`, divided by the dimension of the traced factor.
LocalOperator normalized_partial_trace(const LocalOperator& a, const Region& keep);

/// Trace divided by the full dimension, so the identity has trace 1.
cplx full_normalized_trace(const LocalOperator& a);

/// exp(beta * H) via Hermitian eigendecomposition. Throws InvalidParameter when H
/// is not Hermitian within tol.
LocalOperator herm_exp(const LocalOperator& h, cplx beta, double tol = 1e-10);
Matrix herm_exp(const Matrix& h, cplx beta, double tol = 1e-10);

/// Product after embedding both factors into the union of supports.
LocalOperator op_mul(const LocalOperator& a, const LocalOperator& b);
LocalOperator op_add(const LocalOperator& a, const LocalOperator& b);
LocalOperator op_adjoint(const LocalOperator& a);

/// <u, v>, conjugate-linear in u. Supports must coincide.
cplx vec_inner(const StateVector& u, const StateVector& v);

/// a applied to v; support(a) must be contained in support(v).
StateVector apply(const LocalOperator& a, const StateVector& v);

/// Applies a linear map on B(H_x), given as a d^2 x d^2 matrix acting on row-major
/// vectorisations vec(b)[i*d + j] = b(i, j), to the leg of `a` at site x.
LocalOperator apply_site_map(const LocalOperator& a, const Vertex& x, const Matrix& map);

/// Max-norm distance after aligning both operators on the union of supports.
double max_abs_diff(const LocalOperator& a, const LocalOperator& b);

// Small dense helpers on plain matrices.

bool is_hermitian(const Matrix& m, double tol = 1e-10);
/// Smallest eigenvalue of the Hermitian part.
double min_eigenvalue(const Matrix& m);
/// Positive square root of a positive semidefinite matrix (negative rounding clipped).
Matrix psd_sqrt(const Matrix& m);
/// Inverse square root; throws InvalidParameter when m is singular.
Matrix psd_inv_sqrt(const Matrix& m, double tol = 1e-12);
/// Eigenvalues of a Hermitian matrix in ascending order.
std::vector<double> hermitian_eigenvalues(const Matrix& m);
/// Row-major vectorisation b(i, j) -> v[i*d + j] and its inverse.
Vector vec_rowmajor(const Matrix& b);
Matrix unvec_rowmajor(const Vector& v, int d);

}  // namespace qmf
