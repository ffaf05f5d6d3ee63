#pragma once

// Side-by-side evolution of the matrix product pipeline and the dense
// reference on identical random brickwork circuits, collecting worst-case
// deviations over every gate of every layer.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>

#include "channels.hpp"
#include "dense_oracle.hpp"
#include "driver.hpp"
#include "mpo.hpp"
#include "rng.hpp"
#include "update.hpp"

namespace mposim {

struct EquivalenceReport {
  double max_prob_diff = 0.0;
  double max_entropy_diff = 0.0;
  double max_trace_diff = 0.0;
  double max_canonical_defect = 0.0;
  double max_hermiticity_defect = 0.0;
  double min_eigenvalue = 0.0;
  std::size_t gates = 0;
};

inline EquivalenceReport run_equivalence(std::size_t n, std::size_t depth, double p,
                                         std::uint64_t seed) {
  std::size_t chi = 1;
  for (std::size_t i = 0; i < n / 2; ++i) chi *= 4;  // exact operator Schmidt rank

  RngStream rng = RngStream::substream(seed, 0);
  Mpo m = product_zero_state(n, chi, 0.0);
  DenseState st = DenseState::zero_state(n);

  EquivalenceReport rep;
  rep.min_eigenvalue = 1.0;
  Bitstring x(n, 0);

  for (std::size_t t = 1; t <= depth; ++t) {
    for (std::size_t l : layer_bonds(t, n)) {
      const TwoQubitChannel gate = noisy_haar_gate(rng, p);
      apply_two_site(m, gate, l);
      dense_apply_two_site(st, gate, l);
      ++rep.gates;
    }

    rep.max_trace_diff =
        std::max(rep.max_trace_diff, std::abs(trace(m) - dense_trace(st)));
    rep.max_canonical_defect = std::max(rep.max_canonical_defect, canonical_defect(m));
    rep.max_hermiticity_defect =
        std::max(rep.max_hermiticity_defect, dense_hermiticity_defect(st));
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, dense_min_eigenvalue(st));

    for (std::size_t v = 0; v < (std::size_t{1} << n); ++v) {
      for (std::size_t k = 0; k < n; ++k) x[k] = (v >> (n - 1 - k)) & 1;
      rep.max_prob_diff = std::max(
          rep.max_prob_diff, std::abs(probability(m, x) - dense_probability(st, x)));
    }
    for (std::size_t l = 1; l < n; ++l)
      rep.max_entropy_diff =
          std::max(rep.max_entropy_diff, std::abs(entanglement_entropy(m, l) -
                                                  dense_entanglement_entropy(st, l)));
  }
  return rep;
}

}  // namespace mposim
