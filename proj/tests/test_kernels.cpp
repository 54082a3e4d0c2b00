#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qmf/error.hpp"
#include "qmf/kernels.hpp"

using namespace qmf;

namespace {

double diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

const std::vector<double> kGrid{0.1, 0.2, 0.5, 1.0};

}  // namespace

TEST_CASE("closed-form kernels equal the exponential series") {
  for (double beta : {0.05, 0.3, 1.0, 2.5}) {
    CHECK(diff(hopping_kernel(beta), oracle::expm_series(beta * hopping_generator())) < 1e-12);
    CHECK(diff(diagonal_kernel(beta), oracle::expm_series(beta * diagonal_projector())) < 1e-11);
  }
  const cplx z(0.4, -0.9);
  CHECK(diff(diagonal_kernel(z), oracle::expm_series(z * diagonal_projector())) < 1e-12);
}

TEST_CASE("the diagonal kernel is diagonal and its sibling copies commute") {
  const Matrix K = diagonal_kernel(0.7);
  CHECK(diff(K, Matrix(K.diagonal().asDiagonal())) == 0.0);
  const Matrix a = oracle::embed_positions(K, {0, 1}, 3, 2);
  const Matrix b = oracle::embed_positions(K, {0, 2}, 3, 2);
  CHECK(diff(a * b, b * a) < 1e-13);

  // Hopping copies sharing a site do not commute.
  const Matrix ha = oracle::embed_positions(hopping_kernel(0.7), {0, 1}, 3, 2);
  const Matrix hb = oracle::embed_positions(hopping_kernel(0.7), {0, 2}, 3, 2);
  CHECK(diff(ha * hb, hb * ha) > 0.1);
  CHECK(diff(hopping_kernel(0.7), hopping_kernel(0.7).adjoint()) < 1e-15);
}

TEST_CASE("edge traces of the two families") {
  for (double beta : kGrid) {
    // Hopping: Tr_x(K K^*) = cosh^2(beta) I; diagonal: (e^{2 beta} + 1)/2 I.
    for (auto fam : {KernelFamily::Hopping, KernelFamily::Diagonal}) {
      const AnalyticOracle o = analytic_oracle(fam, beta);
      const Matrix t = oracle::partial_trace_keep(o.K * o.K.adjoint(), {0}, 2, 2);
      CHECK(diff(t, o.edge_trace * Matrix::Identity(2, 2)) < 1e-13);
    }
    CHECK(analytic_oracle(KernelFamily::Hopping, beta).edge_trace == doctest::Approx(std::pow(std::cosh(beta), 2)));
    CHECK(analytic_oracle(KernelFamily::Diagonal, beta).edge_trace ==
          doctest::Approx((std::exp(2 * beta) + 1) / 2));
  }
}

TEST_CASE("stated boundary weights") {
  for (double beta : kGrid) {
    CHECK(std::abs(analytic_oracle(KernelFamily::Hopping, beta).alpha - std::pow(std::cosh(beta), -4.0)) < 1e-15);
    CHECK(std::abs(analytic_oracle(KernelFamily::Diagonal, beta).alpha -
                   4.0 / std::pow(std::exp(2 * beta) + 1.0, 2.0)) < 1e-15);
  }
  CHECK_THROWS_AS(analytic_oracle(KernelFamily::Hopping, 0.5, 1), InvalidParameter);
  CHECK_THROWS_AS(analytic_oracle(KernelFamily::Hopping, cplx(0.5, 0.1)), InvalidParameter);
}

TEST_CASE("child traces against direct Kronecker computation") {
  for (auto fam : {KernelFamily::Hopping, KernelFamily::Diagonal}) {
    const AnalyticOracle o = analytic_oracle(fam, 0.5);
    const Matrix L = oracle::embed_positions(o.K, {0, 1}, 3, 2) * oracle::embed_positions(o.K, {0, 2}, 3, 2);
    const char* names[2][2] = {{"e11", "e12"}, {"e21", "e22"}};
    for (int p = 1; p <= 2; ++p)
      for (int q = 1; q <= 2; ++q) {
        const Matrix b = oracle::site_op(oracle::unit(2, p, q), 1, 3, 2);
        const Matrix t = oracle::partial_trace_keep(L * b * L.adjoint(), {0}, 3, 2);
        CHECK(diff(t, o.child_traces.at(names[p - 1][q - 1])) < 1e-13);
      }
  }
}

TEST_CASE("transfer rates: sinh/cosh^2 for hopping, tanh for diagonal") {
  for (double beta = 0.05; beta < 5.0; beta += 0.25) {
    const AnalyticOracle h = analytic_oracle(KernelFamily::Hopping, beta);
    CHECK(h.transfer_rate == doctest::Approx(std::sinh(beta) / std::pow(std::cosh(beta), 2)));
    CHECK(h.transfer_rate <= 0.5 + 1e-15);
    Eigen::ComplexEigenSolver<Matrix> es(h.transfer);
    std::vector<double> mods;
    for (int i = 0; i < 4; ++i) mods.push_back(std::abs(es.eigenvalues()(i)));
    std::sort(mods.rbegin(), mods.rend());
    CHECK(mods[0] == doctest::Approx(1.0));
    CHECK(mods[1] == doctest::Approx(h.transfer_rate));

    const AnalyticOracle d = analytic_oracle(KernelFamily::Diagonal, beta);
    CHECK(d.transfer_rate == doctest::Approx(std::tanh(beta)));
  }
}

TEST_CASE("numeric solvers reproduce the closed forms") {
  for (auto fam : {KernelFamily::Hopping, KernelFamily::Diagonal}) {
    const OracleReport rep = oracle_vs_numeric(fam, kGrid);
    REQUIRE(rep.rows.size() == kGrid.size());
    CHECK(rep.max_error() < 1e-10);
  }
  CHECK(oracle_vs_numeric(KernelFamily::Diagonal, {0.3}, 3).max_error() < 1e-10);
}

TEST_CASE("kernel family names") {
  CHECK(parse_kernel_family("hopping") == KernelFamily::Hopping);
  CHECK(to_string(KernelFamily::Diagonal) == "diagonal");
  CHECK_THROWS_AS(parse_kernel_family("xy"), InvalidParameter);
}
