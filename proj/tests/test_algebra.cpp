#include <doctest.h>

#include "oracles.hpp"
#include "qmf/algebra.hpp"
#include "qmf/error.hpp"
#include "qmf/random.hpp"

using namespace qmf;

namespace {

double diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("mixed-radix layout: last site varies fastest") {
  const Region r{Vertex{}, Vertex{1}, Vertex{2}};
  const SiteLayout layout(r, 3);
  CHECK(layout.dim() == 27);
  CHECK(layout.stride(0) == 9);
  CHECK(layout.stride(2) == 1);
  // index 5 = (0, 1, 2)
  CHECK(layout.digit(5, 0) == 0);
  CHECK(layout.digit(5, 1) == 1);
  CHECK(layout.digit(5, 2) == 2);

  const StateVector e = StateVector::basis(r, 3, {1, 2, 3});
  CHECK(e.amplitudes()(5) == cplx(1.0));
  CHECK(e.norm_squared() == doctest::Approx(1.0));
  CHECK_THROWS_AS(StateVector(r, 2, Vector::Zero(7)), DimensionMismatch);
}

TEST_CASE("split tables enumerate part-major index pairs") {
  const Region r{Vertex{}, Vertex{1}, Vertex{2}};
  const SiteLayout layout(r, 2);
  const auto table = layout.split_table(Region{Vertex{1}});
  REQUIRE(table.size() == 8);
  // sub = omega(1), comp = (omega(root), omega(2)).
  for (std::int64_t sub = 0; sub < 2; ++sub)
    for (std::int64_t comp = 0; comp < 4; ++comp) {
      const std::int64_t full = table[static_cast<std::size_t>(sub * 4 + comp)];
      CHECK(layout.digit(full, 1) == sub);
      CHECK(layout.digit(full, 0) == comp / 2);
      CHECK(layout.digit(full, 2) == comp % 2);
    }
}

TEST_CASE("matrix units and their validation") {
  const LocalOperator e = matrix_unit(Vertex{1}, 1, 2, 3);
  CHECK(e.matrix()(0, 1) == cplx(1.0));
  CHECK(e.matrix().cwiseAbs().sum() == doctest::Approx(1.0));
  CHECK_THROWS_AS(matrix_unit(Vertex{1}, 0, 1, 2), InvalidParameter);
  CHECK_THROWS_AS(matrix_unit(Vertex{1}, 1, 3, 2), InvalidParameter);
}

TEST_CASE("embedding agrees with Kronecker products") {
  Rng rng(11);
  const Region big{Vertex{}, Vertex{1}, Vertex{2}, Vertex{1, 1}};
  for (int d : {2, 3}) {
    const Matrix a = random_complex(rng, d * d);
    const LocalOperator op(Region{Vertex{1}, Vertex{1, 1}}, d, a);
    const LocalOperator e = embed(op, big);
    CHECK(diff(e.matrix(), oracle::embed_positions(a, {1, 3}, 4, d)) < 1e-14);

    const Matrix m = random_complex(rng, d);
    const LocalOperator s = embed(LocalOperator::on_site(Vertex{2}, m), big);
    CHECK(diff(s.matrix(), oracle::site_op(m, 2, 4, d)) < 1e-14);
  }
  const LocalOperator op(Region{Vertex{5}}, 2);
  CHECK_THROWS_AS(embed(op, big), PreconditionError);
}

TEST_CASE("products of operators on overlapping supports") {
  Rng rng(12);
  const Matrix a = random_complex(rng, 4), b = random_complex(rng, 4);
  const LocalOperator A(Region{Vertex{}, Vertex{1}}, 2, a);
  const LocalOperator B(Region{Vertex{1}, Vertex{2}}, 2, b);
  const LocalOperator ab = op_mul(A, B);
  CHECK(ab.support().size() == 3);
  const Matrix expected = oracle::embed_positions(a, {0, 1}, 3, 2) * oracle::embed_positions(b, {1, 2}, 3, 2);
  CHECK(diff(ab.matrix(), expected) < 1e-13);

  const LocalOperator sum = op_add(A, B);
  CHECK(diff(sum.matrix(), oracle::embed_positions(a, {0, 1}, 3, 2) + oracle::embed_positions(b, {1, 2}, 3, 2)) < 1e-13);
  CHECK(diff(op_adjoint(A).matrix(), a.adjoint()) == 0.0);

  const LocalOperator C(Region{Vertex{3}}, 3);
  CHECK_THROWS_AS(op_mul(A, C), DimensionMismatch);
}

TEST_CASE("normalised partial traces") {
  Rng rng(13);
  const Matrix a = random_complex(rng, 2);
  const Matrix c = random_complex(rng, 2);
  const Region r{Vertex{}, Vertex{1}, Vertex{2}};
  const LocalOperator x(r, 2, oracle::kron_all({a, random_complex(rng, 2), c}));
  // Tracing the middle site multiplies by its normalised trace.
  const LocalOperator y = normalized_partial_trace(x, Region{Vertex{}, Vertex{2}});
  CHECK(diff(y.matrix(), oracle::partial_trace_keep(x.matrix(), {0, 2}, 3, 2)) < 1e-14);

  const LocalOperator big(r, 3, random_complex(rng, 27));
  CHECK(diff(normalized_partial_trace(big, Region{Vertex{1}}).matrix(),
             oracle::partial_trace_keep(big.matrix(), {1}, 3, 3)) < 1e-13);
  CHECK(std::abs(full_normalized_trace(LocalOperator::identity(r, 3)) - 1.0) < 1e-15);
  CHECK(std::abs(full_normalized_trace(big) - big.matrix().trace() / 27.0) < 1e-14);
}

TEST_CASE("Hermitian exponential matches the power series") {
  Rng rng(14);
  for (int n : {2, 4, 9}) {
    const Matrix h = random_hermitian(rng, n);
    for (double beta : {0.1, 0.7, -1.3}) {
      const Matrix e = herm_exp(h, beta);
      const Matrix ref = oracle::expm_series(beta * h);
      CHECK(diff(e, ref) / ref.cwiseAbs().maxCoeff() < 1e-12);
    }
    const cplx z(0.3, 0.4);
    CHECK(diff(herm_exp(h, z), oracle::expm_series(z * h)) < 1e-11);
  }
  CHECK_THROWS_AS(herm_exp(random_complex(rng, 3), 1.0), InvalidParameter);
}

TEST_CASE("site maps act on one leg") {
  Rng rng(15);
  const Region r{Vertex{}, Vertex{1}};
  const LocalOperator x(r, 2, random_complex(rng, 4));
  const Matrix id = Matrix::Identity(4, 4);
  CHECK(max_abs_diff(apply_site_map(x, Vertex{1}, id), x) < 1e-15);

  // The transpose map, column p*d+q holds vec(e_qp).
  Matrix transpose = Matrix::Zero(4, 4);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) transpose(q * 2 + p, p * 2 + q) = 1.0;
  const LocalOperator pt = apply_site_map(x, Vertex{1}, transpose);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) CHECK(pt.matrix()(i * 2 + p, j * 2 + q) == x.matrix()(i * 2 + q, j * 2 + p));
}

TEST_CASE("row-major vectorisation round trip") {
  Matrix b(2, 2);
  b << 1.0, 2.0, 3.0, 4.0;
  const Vector v = vec_rowmajor(b);
  CHECK(v(1) == cplx(2.0));
  CHECK(v(2) == cplx(3.0));
  CHECK(unvec_rowmajor(v, 2) == b);
}

TEST_CASE("positive square roots and inverses") {
  Rng rng(16);
  const Matrix a = random_complex(rng, 3);
  const Matrix p = a * a.adjoint() + Matrix::Identity(3, 3);
  const Matrix s = psd_sqrt(p);
  CHECK(diff(s * s, p) < 1e-12);
  CHECK(diff(psd_inv_sqrt(p) * s, Matrix::Identity(3, 3)) < 1e-12);
  CHECK(is_hermitian(p));
  CHECK_FALSE(is_hermitian(a));
  CHECK(min_eigenvalue(p) >= 1.0 - 1e-12);
  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(psd_inv_sqrt(singular), InvalidParameter);
  const auto ev = hermitian_eigenvalues(p);
  CHECK(ev.front() <= ev.back());
}

TEST_CASE("inner products are conjugate-linear in the first argument") {
  const Region r{Vertex{}};
  const StateVector u(r, 2, (Vector(2) << cplx(0, 1), 0.0).finished());
  const StateVector v(r, 2, (Vector(2) << 1.0, 0.0).finished());
  CHECK(vec_inner(u, v) == cplx(0, -1));
  const LocalOperator flip(r, 2, (Matrix(2, 2) << 0.0, 1.0, 1.0, 0.0).finished());
  CHECK(apply(flip, v).amplitudes()(1) == cplx(1.0));
}
