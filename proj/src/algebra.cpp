#include "qmf/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmf/error.hpp"

namespace qmf {

std::int64_t ipow(int base, std::size_t exp) {
  std::int64_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

namespace {

void require_d(int d) {
  if (d < 2) throw InvalidParameter("local dimension must be >= 2, got " + std::to_string(d));
}

void require_same_d(int a, int b) {
  if (a != b)
    throw DimensionMismatch("local dimensions differ: " + std::to_string(a) + " vs " +
                            std::to_string(b));
}

}  // namespace

// ---------------------------------------------------------------- SiteLayout

SiteLayout::SiteLayout(const Region& region, int d)
    : region_(region), d_(d), dim_(ipow(d, region.size())), strides_(region.size()) {
  require_d(d);
  std::int64_t s = 1;
  for (std::size_t p = region.size(); p-- > 0;) {
    strides_[p] = s;
    s *= d;
  }
}

std::vector<std::int64_t> SiteLayout::split_table(const Region& part) const {
  if (!region_.contains(part))
    throw PreconditionError("region " + part.to_string() + " is not inside " +
                            region_.to_string());
  const Region rest = region_.minus(part);
  std::vector<std::int64_t> part_strides, rest_strides;
  for (const auto& v : part) part_strides.push_back(strides_[region_.index_of(v)]);
  for (const auto& v : rest) rest_strides.push_back(strides_[region_.index_of(v)]);
  const std::int64_t dim_part = ipow(d_, part.size());
  const std::int64_t dim_rest = ipow(d_, rest.size());

  auto offsets = [this](const std::vector<std::int64_t>& strides, std::int64_t count) {
    std::vector<std::int64_t> off(count, 0);
    const std::size_t n = strides.size();
    for (std::int64_t i = 0; i < count; ++i) {
      std::int64_t rem = i, acc = 0;
      for (std::size_t p = n; p-- > 0;) {
        acc += (rem % d_) * strides[p];
        rem /= d_;
      }
      off[i] = acc;
    }
    return off;
  };
  const auto po = offsets(part_strides, dim_part);
  const auto ro = offsets(rest_strides, dim_rest);
  std::vector<std::int64_t> table(dim_);
  for (std::int64_t s = 0; s < dim_part; ++s)
    for (std::int64_t c = 0; c < dim_rest; ++c) table[s * dim_rest + c] = po[s] + ro[c];
  return table;
}

// ---------------------------------------------------------------- StateVector

StateVector::StateVector(Region support, int d)
    : support_(std::move(support)), d_(d) {
  require_d(d);
  if (support_.size() > kMaxVectorSites)
    throw InvalidParameter("state vectors are limited to " + std::to_string(kMaxVectorSites) +
                           " sites");
  amp_ = Vector::Zero(ipow(d, support_.size()));
}

StateVector::StateVector(Region support, int d, Vector amplitudes)
    : StateVector(std::move(support), d) {
  if (amplitudes.size() != amp_.size())
    throw DimensionMismatch("amplitude vector has length " + std::to_string(amplitudes.size()) +
                            ", expected " + std::to_string(amp_.size()));
  amp_ = std::move(amplitudes);
}

StateVector StateVector::basis(const Region& support, int d, const std::vector<int>& omega) {
  if (omega.size() != support.size()) throw DimensionMismatch("configuration length mismatch");
  StateVector v(support, d);
  std::int64_t idx = 0;
  for (int w : omega) {
    if (w < 1 || w > d) throw InvalidParameter("configuration value out of range");
    idx = idx * d + (w - 1);
  }
  v.amp_(idx) = 1.0;
  return v;
}

// ---------------------------------------------------------------- LocalOperator

LocalOperator::LocalOperator(Region support, int d) : support_(std::move(support)), d_(d) {
  require_d(d);
  if (support_.size() > kMaxOperatorSites)
    throw InvalidParameter("explicit operators are limited to " +
                           std::to_string(kMaxOperatorSites) + " sites");
  const auto n = ipow(d, support_.size());
  entries_ = Matrix::Zero(n, n);
}

LocalOperator::LocalOperator(Region support, int d, Matrix entries)
    : support_(std::move(support)), d_(d) {
  require_d(d);
  if (support_.size() > kMaxOperatorSites)
    throw InvalidParameter("explicit operators are limited to " +
                           std::to_string(kMaxOperatorSites) + " sites");
  const auto n = ipow(d, support_.size());
  if (entries.rows() != n || entries.cols() != n)
    throw DimensionMismatch("operator on " + std::to_string(support_.size()) +
                            " sites needs a " + std::to_string(n) + "x" + std::to_string(n) +
                            " matrix");
  entries_ = std::move(entries);
}

LocalOperator LocalOperator::identity(const Region& support, int d) {
  LocalOperator a(support, d);
  a.entries_.setIdentity();
  return a;
}

LocalOperator LocalOperator::on_site(const Vertex& x, Matrix m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("site operator must be square");
  const int d = static_cast<int>(m.rows());
  return LocalOperator(Region{x}, d, std::move(m));
}

LocalOperator LocalOperator::relabelled(const Region& support) const {
  if (support.size() != support_.size())
    throw DimensionMismatch("relabelling changes the number of sites");
  return LocalOperator(support, d_, entries_);
}

LocalOperator matrix_unit(const Vertex& x, int i, int j, int d) {
  if (i < 1 || i > d || j < 1 || j > d)
    throw InvalidParameter("matrix unit index out of range [1, " + std::to_string(d) + "]");
  LocalOperator e(Region{x}, d);
  e.matrix()(i - 1, j - 1) = 1.0;
  return e;
}

// ---------------------------------------------------------------- structural ops

LocalOperator embed(const LocalOperator& a, const Region& region) {
  if (!region.contains(a.support()))
    throw PreconditionError("support " + a.support().to_string() + " is not inside " +
                            region.to_string());
  if (region == a.support()) return a;
  const SiteLayout layout(region, a.d());
  const auto table = layout.split_table(a.support());
  const std::int64_t da = a.dim();
  const std::int64_t dc = layout.dim() / da;
  Matrix out = Matrix::Zero(layout.dim(), layout.dim());
  const Matrix& m = a.matrix();
  for (std::int64_t c = 0; c < dc; ++c)
    for (std::int64_t s = 0; s < da; ++s)
      for (std::int64_t r = 0; r < da; ++r) {
        const cplx v = m(r, s);
        if (v != cplx(0.0)) out(table[r * dc + c], table[s * dc + c]) = v;
      }
  return LocalOperator(region, a.d(), std::move(out));
}

LocalOperator normalized_partial_trace(const LocalOperator& a, const Region& keep) {
  if (!a.support().contains(keep))
    throw PreconditionError("kept region " + keep.to_string() + " is not inside the support " +
                            a.support().to_string());
  if (keep == a.support()) return a;
  const SiteLayout layout(a.support(), a.d());
  const auto table = layout.split_table(keep);
  const std::int64_t dk = ipow(a.d(), keep.size());
  const std::int64_t dt = layout.dim() / dk;
  Matrix out = Matrix::Zero(dk, dk);
  const Matrix& m = a.matrix();
  for (std::int64_t s = 0; s < dk; ++s)
    for (std::int64_t r = 0; r < dk; ++r) {
      cplx acc = 0.0;
      for (std::int64_t t = 0; t < dt; ++t) acc += m(table[r * dt + t], table[s * dt + t]);
      out(r, s) = acc / static_cast<double>(dt);
    }
  return LocalOperator(keep, a.d(), std::move(out));
}

cplx full_normalized_trace(const LocalOperator& a) {
  return a.matrix().trace() / static_cast<double>(a.dim());
}

Matrix herm_exp(const Matrix& h, cplx beta, double tol) {
  if (h.rows() != h.cols()) throw DimensionMismatch("herm_exp needs a square matrix");
  if (!is_hermitian(h, tol)) throw InvalidParameter("herm_exp: matrix is not Hermitian");
  const Matrix herm = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
  Vector ev(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) ev(i) = std::exp(beta * es.eigenvalues()(i));
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

LocalOperator herm_exp(const LocalOperator& h, cplx beta, double tol) {
  return LocalOperator(h.support(), h.d(), herm_exp(h.matrix(), beta, tol));
}

LocalOperator op_mul(const LocalOperator& a, const LocalOperator& b) {
  require_same_d(a.d(), b.d());
  const Region u = a.support().united(b.support());
  return LocalOperator(u, a.d(), embed(a, u).matrix() * embed(b, u).matrix());
}

LocalOperator op_add(const LocalOperator& a, const LocalOperator& b) {
  require_same_d(a.d(), b.d());
  const Region u = a.support().united(b.support());
  return LocalOperator(u, a.d(), embed(a, u).matrix() + embed(b, u).matrix());
}

LocalOperator op_adjoint(const LocalOperator& a) {
  return LocalOperator(a.support(), a.d(), a.matrix().adjoint());
}

cplx vec_inner(const StateVector& u, const StateVector& v) {
  require_same_d(u.d(), v.d());
  if (u.support() != v.support())
    throw DimensionMismatch("inner product of vectors on different regions");
  return u.amplitudes().dot(v.amplitudes());  // Eigen's dot conjugates the left operand
}

StateVector apply(const LocalOperator& a, const StateVector& v) {
  require_same_d(a.d(), v.d());
  if (!v.support().contains(a.support()))
    throw PreconditionError("operator support " + a.support().to_string() +
                            " is not inside the vector support " + v.support().to_string());
  const SiteLayout layout(v.support(), v.d());
  const auto table = layout.split_table(a.support());
  const std::int64_t da = a.dim();
  const std::int64_t dc = layout.dim() / da;
  const Vector& in = v.amplitudes();
  Vector out = Vector::Zero(layout.dim());
  Vector slice(da);
  for (std::int64_t c = 0; c < dc; ++c) {
    for (std::int64_t s = 0; s < da; ++s) slice(s) = in(table[s * dc + c]);
    const Vector r = a.matrix() * slice;
    for (std::int64_t s = 0; s < da; ++s) out(table[s * dc + c]) = r(s);
  }
  return StateVector(v.support(), v.d(), std::move(out));
}

LocalOperator apply_site_map(const LocalOperator& a, const Vertex& x, const Matrix& map) {
  const int d = a.d();
  if (map.rows() != d * d || map.cols() != d * d)
    throw DimensionMismatch("site map must be d^2 x d^2");
  if (!a.support().contains(x))
    throw PreconditionError("site " + x.to_string() + " is not in the operator support");
  const SiteLayout layout(a.support(), d);
  const auto table = layout.split_table(Region{x});
  const std::int64_t dc = layout.dim() / d;
  const Matrix& m = a.matrix();
  Matrix out = Matrix::Zero(layout.dim(), layout.dim());
  Vector block(d * d);
  for (std::int64_t rc = 0; rc < dc; ++rc)
    for (std::int64_t cc = 0; cc < dc; ++cc) {
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) block(i * d + j) = m(table[i * dc + rc], table[j * dc + cc]);
      if (block.isZero(0.0)) continue;
      const Vector mapped = map * block;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out(table[i * dc + rc], table[j * dc + cc]) = mapped(i * d + j);
    }
  return LocalOperator(a.support(), d, std::move(out));
}

double max_abs_diff(const LocalOperator& a, const LocalOperator& b) {
  require_same_d(a.d(), b.d());
  const Region u = a.support().united(b.support());
  return (embed(a, u).matrix() - embed(b, u).matrix()).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------- matrix helpers

bool is_hermitian(const Matrix& m, double tol) {
  return m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

std::vector<double> hermitian_eigenvalues(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double min_eigenvalue(const Matrix& m) { return hermitian_eigenvalues(m).front(); }

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

Matrix psd_inv_sqrt(const Matrix& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  const auto& ev = es.eigenvalues();
  if (ev.minCoeff() <= tol * std::max(1.0, ev.cwiseAbs().maxCoeff()))
    throw InvalidParameter("matrix is singular or not positive definite");
  const Eigen::VectorXd inv = ev.cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

Vector vec_rowmajor(const Matrix& b) {
  const auto d = b.rows();
  Vector v(d * b.cols());
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) v(i * b.cols() + j) = b(i, j);
  return v;
}

Matrix unvec_rowmajor(const Vector& v, int d) {
  if (v.size() != static_cast<Eigen::Index>(d) * d) throw DimensionMismatch("unvec length");
  Matrix b(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) b(i, j) = v(i * d + j);
  return b;
}

}  // namespace qmf
