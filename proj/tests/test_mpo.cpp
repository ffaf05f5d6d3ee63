#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <mposim/dense_oracle.hpp>
#include <mposim/mpo.hpp>
#include <mposim/rng.hpp>

#include "support/mps_states.hpp"

using mposim::Bitstring;
using mposim::cplx;
using mposim::Mpo;
using mposim::RngStream;

namespace {

std::string to_string(const Bitstring& x) {
  std::string s;
  for (auto b : x) s += static_cast<char>('0' + b);
  return s;
}

}  // namespace

TEST_CASE("product zero state") {
  const Mpo m = mposim::product_zero_state(6, 32);
  REQUIRE(m.n == 6);
  REQUIRE(m.gamma.size() == 6);
  REQUIRE(m.lambda.size() == 5);
  m.check_shape();

  CHECK(mposim::trace(m) == Catch::Approx(1.0).margin(1e-14));
  CHECK(mposim::canonical_defect(m) < 1e-14);

  for (std::size_t l = 1; l < m.n; ++l)
    CHECK(mposim::entanglement_entropy(m, l) == 0.0);

  Bitstring zeros(6, 0);
  CHECK(mposim::probability(m, zeros) == Catch::Approx(1.0).margin(1e-14));
  Bitstring one = zeros;
  one[3] = 1;
  CHECK(mposim::probability(m, one) == Catch::Approx(0.0).margin(1e-14));

  RngStream rng(5);
  for (int i = 0; i < 16; ++i) CHECK(mposim::sample(m, rng) == zeros);
}

TEST_CASE("product zero state input validation") {
  CHECK_THROWS_AS(mposim::product_zero_state(1, 8), std::invalid_argument);
  CHECK_THROWS_AS(mposim::product_zero_state(4, 0), std::invalid_argument);
  CHECK_THROWS_AS(mposim::product_zero_state(4, 8, -1.0), std::invalid_argument);
}

TEST_CASE("maximally mixed state") {
  const std::size_t n = 4;
  const Mpo m = testsupport::maximally_mixed_mpo(n, 16);
  m.check_shape();

  CHECK(mposim::trace(m) == Catch::Approx(1.0).margin(1e-13));
  CHECK(mposim::canonical_defect(m) < 1e-13);

  // Rank one across every bond: zero operator entanglement, spectrum 2^{-n/2}.
  for (std::size_t l = 1; l < n; ++l) {
    CHECK(mposim::entanglement_entropy(m, l) == 0.0);
    REQUIRE(m.bond_dim(l) == 1);
    CHECK(m.bond(l)[0] == Catch::Approx(std::pow(2.0, -double(n) / 2)).epsilon(1e-12));
  }

  Bitstring x(n, 0);
  for (std::size_t v = 0; v < 16; ++v) {
    for (std::size_t k = 0; k < n; ++k) x[k] = (v >> (n - 1 - k)) & 1;
    CHECK(mposim::probability(m, x) == Catch::Approx(1.0 / 16).epsilon(1e-12));
  }

  RngStream rng(77);
  std::map<std::string, int> freq;
  const int draws = 4096;
  for (int i = 0; i < draws; ++i) ++freq[to_string(mposim::sample(m, rng))];
  CHECK(freq.size() == 16);
  for (const auto& [s, c] : freq)
    CHECK(std::abs(double(c) / draws - 1.0 / 16) < 0.02);
}

TEST_CASE("classically correlated pair") {
  const Mpo m = testsupport::classical_pair_mpo();
  m.check_shape();

  CHECK(mposim::trace(m) == Catch::Approx(1.0).margin(1e-14));
  CHECK(mposim::canonical_defect(m) < 1e-14);
  CHECK(mposim::entanglement_entropy(m, 1) == Catch::Approx(1.0).margin(1e-12));

  CHECK(mposim::probability(m, {0, 0}) == Catch::Approx(0.5).margin(1e-14));
  CHECK(mposim::probability(m, {1, 1}) == Catch::Approx(0.5).margin(1e-14));
  CHECK(mposim::probability(m, {0, 1}) == Catch::Approx(0.0).margin(1e-14));
  CHECK(mposim::probability(m, {1, 0}) == Catch::Approx(0.0).margin(1e-14));

  RngStream rng(9);
  int ones = 0;
  const int draws = 2000;
  for (int i = 0; i < draws; ++i) {
    const Bitstring x = mposim::sample(m, rng);
    REQUIRE(x[0] == x[1]);
    ones += x[0];
  }
  CHECK(std::abs(double(ones) / draws - 0.5) < 0.05);
}

TEST_CASE("ghz state as an operator") {
  const std::size_t n = 4;
  const Mpo m = testsupport::ghz_mpo(n, 16);
  m.check_shape();

  CHECK(mposim::trace(m) == Catch::Approx(1.0).margin(1e-13));
  CHECK(mposim::canonical_defect(m) < 1e-13);

  // Doubled bond spectrum (1/2, 1/2, 1/2, 1/2): two bits on every bond,
  // twice the state entanglement of one bit.
  for (std::size_t l = 1; l < n; ++l) {
    REQUIRE(m.bond_dim(l) == 4);
    for (double lam : m.bond(l)) CHECK(lam == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(mposim::entanglement_entropy(m, l) == Catch::Approx(2.0).margin(1e-12));
  }
  const auto best = mposim::max_entanglement_entropy(m);
  CHECK(best.value == Catch::Approx(2.0).margin(1e-12));
  CHECK(best.bond >= 1);
  CHECK(best.bond < n);

  CHECK(mposim::probability(m, {0, 0, 0, 0}) == Catch::Approx(0.5).margin(1e-12));
  CHECK(mposim::probability(m, {1, 1, 1, 1}) == Catch::Approx(0.5).margin(1e-12));
  CHECK(mposim::probability(m, {0, 1, 0, 1}) == Catch::Approx(0.0).margin(1e-12));

  // Full reconstruction against the dense projector.
  const mposim::DenseState st = mposim::mpo_to_dense(m);
  mposim::ComplexMatrix expect(16, 16);
  expect(0, 0) = expect(0, 15) = expect(15, 0) = expect(15, 15) = 0.5;
  CHECK(mposim::max_abs_diff(st.rho, expect) < 1e-13);

  for (std::size_t l = 1; l < n; ++l)
    CHECK(mposim::dense_entanglement_entropy(st, l) ==
          Catch::Approx(mposim::entanglement_entropy(m, l)).margin(1e-10));

  RngStream rng(123);
  int ones = 0;
  for (int i = 0; i < 400; ++i) {
    const Bitstring x = mposim::sample(m, rng);
    const bool all0 = x == Bitstring(n, 0), all1 = x == Bitstring(n, 1);
    REQUIRE((all0 || all1));
    ones += all1;
  }
  CHECK(std::abs(ones / 400.0 - 0.5) < 0.15);
}

TEST_CASE("probability input validation") {
  const Mpo m = mposim::product_zero_state(4, 8);
  CHECK_THROWS_AS(mposim::probability(m, Bitstring(3, 0)), std::invalid_argument);
  CHECK_THROWS_AS(mposim::probability(m, Bitstring{0, 0, 2, 0}), std::invalid_argument);
}

TEST_CASE("entropy edge conditions") {
  Mpo m = mposim::product_zero_state(4, 8);
  CHECK_THROWS_AS(mposim::entanglement_entropy(m, 0), std::invalid_argument);
  CHECK_THROWS_AS(mposim::entanglement_entropy(m, 4), std::invalid_argument);
  m.bond(2) = {0.0};
  CHECK_THROWS_AS(mposim::entanglement_entropy(m, 2), std::runtime_error);
}

TEST_CASE("canonical defect flags a broken gauge") {
  Mpo m = testsupport::ghz_mpo(4, 16);
  CHECK(mposim::canonical_defect(m) < 1e-13);
  for (cplx& z : m.site(2).v) z *= 2.0;
  CHECK(mposim::canonical_defect(m) > 0.5);
}

TEST_CASE("sampling a traceless state fails loudly") {
  // Single off-diagonal operator |0><1| x |0><0|: every diagonal is zero.
  Mpo m = mposim::product_zero_state(2, 4);
  m.site(1).at(0, 0, 0) = 0.0;
  m.site(1).at(0, 1, 0) = 1.0;
  RngStream rng(3);
  CHECK_THROWS_WITH(mposim::sample(m, rng),
                    Catch::Matchers::ContainsSubstring("site 1"));
}

TEST_CASE("trace of a non-normalized product operator") {
  // Site vectors [a, 0, 0, b]: diagonal operator diag(a, b) per site.
  std::vector<std::vector<cplx>> site = {
      {cplx(0.7, 0), 0, 0, cplx(0.2, 0)},
      {cplx(0.4, 0), 0, 0, cplx(0.1, 0)},
      {cplx(1.0, 0), 0, 0, cplx(0.5, 0)}};
  const Mpo m = mposim::product_operator_state(site, 8);
  CHECK(mposim::trace(m) == Catch::Approx(0.9 * 0.5 * 1.5).epsilon(1e-12));
  CHECK(mposim::canonical_defect(m) < 1e-13);
}
