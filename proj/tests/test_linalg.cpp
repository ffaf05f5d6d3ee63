#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include <mposim/linalg.hpp>
#include <mposim/rng.hpp>

#include "support/jacobi_svd.hpp"

using mposim::ComplexMatrix;
using mposim::cplx;
using mposim::RngStream;

namespace {

ComplexMatrix random_matrix(std::size_t m, std::size_t n, RngStream& rng) {
  ComplexMatrix a(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = cplx(rng.normal(), rng.normal());
  return a;
}

double reconstruction_defect(const ComplexMatrix& a, const mposim::SvdResult& r) {
  ComplexMatrix us = r.u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= r.s[j];
  return mposim::max_abs_diff(a, us * r.vh);
}

double isometry_defect(const mposim::SvdResult& r) {
  const double du = mposim::max_abs_diff(r.u.adjoint() * r.u,
                                         ComplexMatrix::identity(r.u.cols()));
  const double dv = mposim::max_abs_diff(r.vh * r.vh.adjoint(),
                                         ComplexMatrix::identity(r.vh.rows()));
  return std::max(du, dv);
}

}  // namespace

TEST_CASE("svd of the identity") {
  const auto r = mposim::svd(ComplexMatrix::identity(4));
  REQUIRE(r.s.size() == 4);
  for (double s : r.s) CHECK(s == Catch::Approx(1.0).margin(1e-12));
  CHECK(mposim::max_abs_diff(r.u * r.vh, ComplexMatrix::identity(4)) < 1e-12);
}

TEST_CASE("svd of a rank-one outer product") {
  RngStream rng(7);
  const std::size_t m = 5, n = 3;
  std::vector<cplx> x(m), y(n);
  double nx = 0.0, ny = 0.0;
  for (auto& z : x) z = cplx(rng.normal(), rng.normal());
  for (auto& z : y) z = cplx(rng.normal(), rng.normal());
  for (auto& z : x) nx += std::norm(z);
  for (auto& z : y) ny += std::norm(z);

  ComplexMatrix a(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = x[i] * std::conj(y[j]);

  const auto r = mposim::svd(a);
  CHECK(r.s[0] == Catch::Approx(std::sqrt(nx * ny)).epsilon(1e-12));
  for (std::size_t j = 1; j < r.s.size(); ++j) CHECK(r.s[j] <= 1e-12 * r.s[0]);
  CHECK(reconstruction_defect(a, r) < 1e-10);
}

TEST_CASE("svd matches the Jacobi reference") {
  RngStream rng(42);
  const ComplexMatrix a = random_matrix(8, 8, rng);
  const auto fast = mposim::svd(a);
  const auto ref = testsupport::jacobi_svd(a);
  REQUIRE(fast.s.size() == ref.s.size());
  for (std::size_t i = 0; i < fast.s.size(); ++i)
    CHECK(std::abs(fast.s[i] - ref.s[i]) < 1e-10);
  CHECK(reconstruction_defect(a, fast) < 1e-10);
  CHECK(reconstruction_defect(a, {ref.u, ref.s, ref.vh}) < 1e-10);
}

TEST_CASE("svd contract on assorted shapes") {
  RngStream rng(3);
  const std::pair<std::size_t, std::size_t> shapes[] = {
      {3, 7}, {7, 3}, {8, 8}, {1, 5}, {5, 1}, {16, 4}, {4, 16}, {1, 1}, {2, 2}};
  for (const auto& [m, n] : shapes) {
    const ComplexMatrix a = random_matrix(m, n, rng);
    const auto r = mposim::svd(a);
    const std::size_t k = std::min(m, n);
    REQUIRE(r.u.rows() == m);
    REQUIRE(r.u.cols() == k);
    REQUIRE(r.s.size() == k);
    REQUIRE(r.vh.rows() == k);
    REQUIRE(r.vh.cols() == n);
    for (std::size_t i = 0; i + 1 < k; ++i) CHECK(r.s[i] >= r.s[i + 1]);
    for (double s : r.s) CHECK(s >= 0.0);
    CHECK(isometry_defect(r) < 1e-10);
    CHECK(reconstruction_defect(a, r) < 1e-10);

    const auto ref = testsupport::jacobi_svd(a);
    for (std::size_t i = 0; i < k; ++i) CHECK(std::abs(r.s[i] - ref.s[i]) < 1e-10);
  }
}

TEST_CASE("svd column phases are canonical") {
  RngStream rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const ComplexMatrix a = random_matrix(6, 4, rng);
    const auto r = mposim::svd(a);
    for (std::size_t j = 0; j < r.u.cols(); ++j) {
      std::size_t imax = 0;
      double amax = -1.0;
      for (std::size_t i = 0; i < r.u.rows(); ++i)
        if (std::abs(r.u(i, j)) > amax) {
          amax = std::abs(r.u(i, j));
          imax = i;
        }
      CHECK(std::abs(r.u(imax, j).imag()) <= 1e-12);
      CHECK(r.u(imax, j).real() >= -1e-12);
    }
  }
}

TEST_CASE("svd recovers a planted spectrum") {
  RngStream rng(5);
  const std::size_t n = 6;
  const ComplexMatrix u = mposim::haar_unitary(n, rng);
  const ComplexMatrix v = mposim::haar_unitary(n, rng);
  const std::vector<double> d = {3.0, 2.5, 1.0, 0.5, 0.25, 0.0};
  ComplexMatrix ud = u;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ud(i, j) *= d[j];
  const ComplexMatrix a = ud * v.adjoint();
  const auto r = mposim::svd(a);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(r.s[i] - d[i]) < 1e-12);
}

TEST_CASE("svd rejects empty input") {
  CHECK_THROWS_AS(mposim::svd(ComplexMatrix(0, 3)), mposim::SvdError);
}

TEST_CASE("haar unitary basics") {
  RngStream rng(1234);
  SECTION("dim 1 is a pure phase") {
    for (int i = 0; i < 100; ++i) {
      const ComplexMatrix u = mposim::haar_unitary(1, rng);
      CHECK(std::abs(std::abs(u(0, 0)) - 1.0) < 1e-14);
    }
  }
  SECTION("unitarity defect across seeds and dims") {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
      RngStream r2 = RngStream::substream(99, seed);
      CHECK(mposim::unitarity_defect(mposim::haar_unitary(2, r2)) < 1e-12);
      CHECK(mposim::unitarity_defect(mposim::haar_unitary(4, r2)) < 1e-12);
    }
  }
  SECTION("determinism") {
    RngStream a(77), b(77);
    const ComplexMatrix ua = mposim::haar_unitary(4, a);
    const ComplexMatrix ub = mposim::haar_unitary(4, b);
    CHECK(mposim::max_abs_diff(ua, ub) == 0.0);
  }
}

TEST_CASE("haar unitary first-entry moment") {
  // E|U_00|^2 = 1/dim for Haar measure; dim 2 with 1e5 samples.
  RngStream rng(2024);
  const int samples = 100000;
  double acc = 0.0;
  for (int i = 0; i < samples; ++i) acc += std::norm(mposim::haar_unitary(2, rng)(0, 0));
  CHECK(acc / samples == Catch::Approx(0.5).margin(0.01));
}

TEST_CASE("kron on basis examples") {
  const ComplexMatrix i2 = ComplexMatrix::identity(2);
  CHECK(mposim::max_abs_diff(mposim::kron(i2, i2), ComplexMatrix::identity(4)) == 0.0);

  ComplexMatrix x(2, 2);
  x(0, 1) = 1.0;
  x(1, 0) = 1.0;
  const ComplexMatrix xx = mposim::kron(x, x);
  // |01> -> |10>: column 1 maps to row 2.
  CHECK(xx(2, 1) == cplx(1.0, 0.0));
  CHECK(xx(1, 2) == cplx(1.0, 0.0));
  CHECK(xx(0, 3) == cplx(1.0, 0.0));
  CHECK(xx(3, 0) == cplx(1.0, 0.0));
}

TEST_CASE("kron against a nested-loop reference and associativity") {
  RngStream rng(31);
  const ComplexMatrix a = random_matrix(3, 2, rng);
  const ComplexMatrix b = random_matrix(2, 4, rng);
  const ComplexMatrix c = random_matrix(2, 2, rng);

  ComplexMatrix ref(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < ref.rows(); ++i)
    for (std::size_t j = 0; j < ref.cols(); ++j)
      ref(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
  CHECK(mposim::max_abs_diff(mposim::kron(a, b), ref) == 0.0);

  const ComplexMatrix lhs = mposim::kron(mposim::kron(a, b), c);
  const ComplexMatrix rhs = mposim::kron(a, mposim::kron(b, c));
  CHECK(mposim::max_abs_diff(lhs, rhs) < 1e-14);
}

TEST_CASE("thin qr and lq factorizations") {
  RngStream rng(57);
  for (const auto [m, n] : std::vector<std::pair<std::size_t, std::size_t>>{
           {8, 5}, {5, 8}, {6, 6}, {1, 7}, {7, 1}}) {
    const ComplexMatrix a = random_matrix(m, n, rng);
    const std::size_t k = std::min(m, n);

    const auto f = mposim::qr(a);
    REQUIRE(f.q.rows() == m);
    REQUIRE(f.q.cols() == k);
    REQUIRE(f.r.rows() == k);
    REQUIRE(f.r.cols() == n);
    CHECK(mposim::max_abs_diff(f.q.adjoint() * f.q, ComplexMatrix::identity(k)) < 1e-12);
    CHECK(mposim::max_abs_diff(f.q * f.r, a) < 1e-11);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < i && j < n; ++j) CHECK(std::abs(f.r(i, j)) == 0.0);

    const auto g = mposim::lq(a);
    REQUIRE(g.l.rows() == m);
    REQUIRE(g.l.cols() == k);
    REQUIRE(g.q.rows() == k);
    REQUIRE(g.q.cols() == n);
    CHECK(mposim::max_abs_diff(g.q * g.q.adjoint(), ComplexMatrix::identity(k)) < 1e-12);
    CHECK(mposim::max_abs_diff(g.l * g.q, a) < 1e-11);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < k; ++j) CHECK(std::abs(g.l(i, j)) == 0.0);
  }
}

TEST_CASE("reshaped reinterprets the row-major buffer") {
  ComplexMatrix a(2, 6);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 6; ++j) a(i, j) = cplx(double(i), double(j));
  const ComplexMatrix b = std::move(a).reshaped(4, 3);
  CHECK(b(0, 0) == cplx(0.0, 0.0));
  CHECK(b(1, 2) == cplx(0.0, 5.0));
  CHECK(b(2, 0) == cplx(1.0, 0.0));
  CHECK(b(3, 2) == cplx(1.0, 5.0));
  ComplexMatrix c(2, 2);
  CHECK_THROWS(std::move(c).reshaped(3, 3));
}

TEST_CASE("rng streams") {
  SECTION("substream determinism and separation") {
    RngStream a = RngStream::substream(5, 0);
    RngStream b = RngStream::substream(5, 0);
    RngStream c = RngStream::substream(5, 1);
    bool all_equal = true, any_equal_c = false;
    for (int i = 0; i < 64; ++i) {
      const auto va = a.next_u64(), vb = b.next_u64(), vc = c.next_u64();
      all_equal = all_equal && (va == vb);
      any_equal_c = any_equal_c || (va == vc);
    }
    CHECK(all_equal);
    CHECK_FALSE(any_equal_c);
  }
  SECTION("uniform range and mean") {
    RngStream r(17);
    double acc = 0.0;
    for (int i = 0; i < 200000; ++i) {
      const double u = r.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      acc += u;
    }
    CHECK(acc / 200000 == Catch::Approx(0.5).margin(0.005));
  }
  SECTION("normal moments") {
    RngStream r(19);
    double m1 = 0.0, m2 = 0.0;
    const int nn = 400000;
    for (int i = 0; i < nn; ++i) {
      const double z = r.normal();
      m1 += z;
      m2 += z * z;
    }
    CHECK(m1 / nn == Catch::Approx(0.0).margin(0.01));
    CHECK(m2 / nn == Catch::Approx(1.0).margin(0.01));
  }
}
