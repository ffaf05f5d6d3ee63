#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstddef>
#include <vector>

#include "mposim/channels.hpp"
#include "mposim/dense_oracle.hpp"
#include "mposim/fast_update.hpp"
#include "mposim/linalg.hpp"
#include "mposim/mpo.hpp"
#include "mposim/rng.hpp"
#include "mposim/update.hpp"
#include "support/equivalence.hpp"
#include "support/mps_states.hpp"

using mposim::Bitstring;
using mposim::FastEvolver;
using mposim::Mpo;
using mposim::RngStream;
using mposim::TwoQubitChannel;
using mposim::UpdateStats;

namespace {

TwoQubitChannel random_noisy_gate(RngStream& rng, double p) {
  const TwoQubitChannel u = mposim::unitary_channel(mposim::haar_unitary(4, rng));
  return p > 0.0 ? mposim::compose(mposim::depolarize2(p), u) : u;
}

// Same physical state: spectra, entropies, trace, and every probability
// agree. Missing trailing spectrum entries compare against zero, so a
// numerical-rank tie at the drop floor cannot fail the test by itself.
void require_same_state(const Mpo& a, const Mpo& b, double tol_lam, double tol_prob) {
  REQUIRE(a.n == b.n);
  CHECK(mposim::trace(a) == Catch::Approx(mposim::trace(b)).margin(1e-9));
  for (std::size_t l = 1; l < a.n; ++l) {
    const std::vector<double>& la = a.bond(l);
    const std::vector<double>& lb = b.bond(l);
    const std::size_t nmax = std::max(la.size(), lb.size());
    for (std::size_t i = 0; i < nmax; ++i) {
      const double va = i < la.size() ? la[i] : 0.0;
      const double vb = i < lb.size() ? lb[i] : 0.0;
      CHECK(va == Catch::Approx(vb).margin(tol_lam));
    }
    CHECK(mposim::entanglement_entropy(a, l) ==
          Catch::Approx(mposim::entanglement_entropy(b, l)).margin(1e-8));
  }
  for (std::size_t x = 0; x < (std::size_t{1} << a.n); ++x) {
    Bitstring bits(a.n);
    for (std::size_t k = 0; k < a.n; ++k) bits[k] = (x >> (a.n - 1 - k)) & 1;
    CHECK(mposim::probability(a, bits) ==
          Catch::Approx(mposim::probability(b, bits)).margin(tol_prob));
  }
}

Mpo scrambled_state(std::size_t n, std::size_t chi, double p, std::uint64_t seed,
                    std::size_t layers) {
  Mpo m = mposim::product_zero_state(n, chi);
  RngStream rng(seed);
  for (std::size_t t = 1; t <= layers; ++t)
    for (std::size_t l : testsupport::layer_bonds(t, n))
      mposim::apply_two_site(m, random_noisy_gate(rng, p), l);
  return m;
}

}  // namespace

TEST_CASE("identity channel is a no-op up to gauge") {
  Mpo m = scrambled_state(5, 32, 0.1, 21, 2);
  const Mpo before = m;
  const UpdateStats st = mposim::apply_two_site_fast(m, mposim::identity_channel(), 2, true);
  CHECK(st.discarded_weight < 1e-12);
  CHECK(st.sweep_defect < 1e-8);
  require_same_state(before, m, 1e-10, 1e-10);
}

TEST_CASE("single gates match the reference path at every bond") {
  const std::size_t n = 5;
  const Mpo base = scrambled_state(n, 32, 0.1, 22, 2);
  RngStream rng(23);

  for (std::size_t l = 1; l < n; ++l) {
    const TwoQubitChannel gate = random_noisy_gate(rng, 0.1);
    Mpo slow = base;
    Mpo fast = base;
    const UpdateStats st_slow = mposim::apply_two_site(slow, gate, l);
    const UpdateStats st_fast = mposim::apply_two_site_fast(fast, gate, l, true);

    CHECK(st_fast.sweep_defect < 1e-8);
    CHECK(st_fast.new_bond_dim == st_slow.new_bond_dim);
    CHECK(st_fast.discarded_weight ==
          Catch::Approx(st_slow.discarded_weight).margin(1e-10));
    require_same_state(slow, fast, 1e-9, 1e-8);
  }
}

TEST_CASE("a ten-gate sequence through one engine matches the reference path") {
  const std::size_t n = 6;
  Mpo slow = mposim::product_zero_state(n, 64);
  FastEvolver ev(slow);
  RngStream rng(24);

  const std::vector<std::size_t> bonds{3, 1, 5, 2, 4, 3, 5, 1, 4, 2};
  for (std::size_t i = 0; i < bonds.size(); ++i) {
    const TwoQubitChannel gate = random_noisy_gate(rng, 0.1);
    const UpdateStats st_slow = mposim::apply_two_site(slow, gate, bonds[i]);
    const UpdateStats st_fast = ev.apply(gate, bonds[i]);
    CHECK(st_fast.new_bond_dim == st_slow.new_bond_dim);
    CHECK(st_fast.discarded_weight ==
          Catch::Approx(st_slow.discarded_weight).margin(1e-10));

    if (i == 4) {
      // Mid-sequence conversion must not disturb the engine.
      const Mpo snapshot = ev.to_mpo();
      CHECK(mposim::canonical_defect(snapshot) < 1e-8);
      require_same_state(slow, snapshot, 1e-9, 1e-8);
    }
  }

  const Mpo fast = std::move(ev).to_mpo();
  CHECK(mposim::canonical_defect(fast) < 1e-8);
  require_same_state(slow, fast, 1e-9, 1e-8);
}

TEST_CASE("truncating evolution matches the reference path layer by layer") {
  const std::size_t n = 6, chi = 8;
  Mpo slow = mposim::product_zero_state(n, chi);
  FastEvolver ev(slow);
  RngStream rng(25);

  for (std::size_t t = 1; t <= 4; ++t) {
    for (std::size_t l : testsupport::layer_bonds(t, n)) {
      const TwoQubitChannel gate = random_noisy_gate(rng, 0.15);
      const UpdateStats st_slow = mposim::apply_two_site(slow, gate, l);
      const UpdateStats st_fast = ev.apply(gate, l);
      CHECK(st_fast.new_bond_dim == st_slow.new_bond_dim);
      CHECK(st_fast.discarded_weight ==
            Catch::Approx(st_slow.discarded_weight).margin(1e-9));
    }
    const Mpo fast = ev.to_mpo();
    CHECK(mposim::canonical_defect(fast) < 1e-8);
    require_same_state(slow, fast, 1e-9, 1e-8);
  }
}

TEST_CASE("measurement collapse propagates globally through the fast path") {
  const std::size_t n = 6;
  Mpo m = testsupport::ghz_mpo(n, 16);

  // |0><0| (x) I as the lone Kraus operator: selects the all-zeros branch.
  mposim::ComplexMatrix k0(4, 4);
  k0(0, 0) = k0(1, 1) = 1.0;
  const TwoQubitChannel select = mposim::channel_from_kraus({k0});

  mposim::apply_two_site_fast(m, select, 3);

  CHECK(mposim::trace(m) == Catch::Approx(0.5).margin(1e-10));
  for (std::size_t l = 1; l < n; ++l) {
    CHECK(m.bond_dim(l) == 1);
    CHECK(m.bond(l)[0] == Catch::Approx(0.5).margin(1e-10));
  }
  CHECK(mposim::probability(m, Bitstring(n, 0)) == Catch::Approx(0.5).margin(1e-10));
  CHECK(mposim::probability(m, Bitstring(n, 1)) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("fast-path-only circuit agrees with the dense oracle") {
  const std::size_t n = 4, depth = 4;
  Mpo m = mposim::product_zero_state(n, 256, 0.0);
  FastEvolver ev(m);
  mposim::DenseState dense = mposim::DenseState::zero_state(n);
  RngStream rng = RngStream::substream(26, 0);

  for (std::size_t t = 1; t <= depth; ++t) {
    for (std::size_t l : testsupport::layer_bonds(t, n)) {
      const TwoQubitChannel gate = random_noisy_gate(rng, 0.1);
      ev.apply(gate, l);
      mposim::dense_apply_two_site(dense, gate, l);
    }
    const Mpo snap = ev.to_mpo();
    CHECK(mposim::canonical_defect(snap) < 1e-8);
    CHECK(mposim::trace(snap) == Catch::Approx(mposim::dense_trace(dense)).margin(1e-9));
    for (std::size_t l = 1; l < n; ++l)
      CHECK(mposim::entanglement_entropy(snap, l) ==
            Catch::Approx(mposim::dense_entanglement_entropy(dense, l)).margin(1e-8));
    for (std::size_t x = 0; x < (std::size_t{1} << n); ++x) {
      Bitstring bits(n);
      for (std::size_t k = 0; k < n; ++k) bits[k] = (x >> (n - 1 - k)) & 1;
      CHECK(mposim::probability(snap, bits) ==
            Catch::Approx(mposim::dense_probability(dense, bits)).margin(1e-9));
    }
  }
}

TEST_CASE("argument validation") {
  Mpo m = mposim::product_zero_state(4, 8);
  FastEvolver ev(m);
  CHECK_THROWS(ev.apply(mposim::identity_channel(), 0));
  CHECK_THROWS(ev.apply(mposim::identity_channel(), 4));
  CHECK_THROWS(mposim::apply_two_site_fast(m, mposim::identity_channel(), 0));
}
