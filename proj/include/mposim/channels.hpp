#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "complex_matrix.hpp"
#include "linalg.hpp"

namespace mposim {

inline const ComplexMatrix& pauli(std::size_t k) {
  static const ComplexMatrix mats[4] = {
      ComplexMatrix(2, 2, {{1, 0}, {0, 0}, {0, 0}, {1, 0}}),
      ComplexMatrix(2, 2, {{0, 0}, {1, 0}, {1, 0}, {0, 0}}),
      ComplexMatrix(2, 2, {{0, 0}, {0, -1}, {0, 1}, {0, 0}}),
      ComplexMatrix(2, 2, {{1, 0}, {0, 0}, {0, 0}, {-1, 0}})};
  if (k > 3) throw std::invalid_argument("pauli: index out of range");
  return mats[k];
}

// Superoperator acting on two neighboring sites of a vectorized density
// matrix. Rows and columns pack the merged per-site indices as
// I_l * d^2 + I_{l+1}, where I = d*ket + bra on each site.
struct TwoQubitChannel {
  std::size_t d = 2;
  ComplexMatrix m;  // d^4 x d^4

  std::size_t dim() const { return d * d * d * d; }
};

// Permutation between pair grouping (ket ket, bra bra) and per-site grouping
// (ket bra, ket bra): swap of the middle two base-d digits. Involutive.
inline std::size_t regroup_index(std::size_t k, std::size_t d) {
  const std::size_t d0 = k % d, d1 = (k / d) % d, d2 = (k / (d * d)) % d,
                    d3 = k / (d * d * d);
  return ((d3 * d + d1) * d + d2) * d + d0;
}

inline ComplexMatrix regroup(const ComplexMatrix& m, std::size_t d) {
  const std::size_t dim = d * d * d * d;
  if (m.rows() != dim || m.cols() != dim)
    throw std::invalid_argument("regroup: superoperator has wrong dimension");
  ComplexMatrix r(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const std::size_t pi = regroup_index(i, d);
    for (std::size_t j = 0; j < dim; ++j) r(i, j) = m(pi, regroup_index(j, d));
  }
  return r;
}

// Channel from Kraus operators on the two-site Hilbert space. With row-major
// vectorization, K rho K^dag turns into (K otimes conj(K)) acting on vec(rho)
// in pair grouping; the result is then regrouped per site.
inline TwoQubitChannel channel_from_kraus(const std::vector<ComplexMatrix>& kraus,
                                          std::size_t d = 2) {
  const std::size_t dd = d * d;
  if (kraus.empty()) throw std::invalid_argument("channel_from_kraus: no operators");
  ComplexMatrix acc(dd * dd, dd * dd);
  for (const ComplexMatrix& k : kraus) {
    if (k.rows() != dd || k.cols() != dd)
      throw std::invalid_argument("channel_from_kraus: operator has wrong shape");
    acc += kron(k, k.conjugate());
  }
  return {d, regroup(acc, d)};
}

inline TwoQubitChannel identity_channel(std::size_t d = 2) {
  return {d, ComplexMatrix::identity(d * d * d * d)};
}

inline TwoQubitChannel unitary_channel(const ComplexMatrix& u, std::size_t d = 2) {
  if (u.rows() != d * d || u.cols() != d * d)
    throw std::invalid_argument("unitary_channel: gate has wrong shape");
  if (unitarity_defect(u) > 1e-10)
    throw std::invalid_argument("unitary_channel: gate is not unitary");
  return channel_from_kraus({u}, d);
}

// Two-qubit depolarization with probability p spread uniformly over the 15
// nontrivial Pauli pairs. p = 15/16 is the fully depolarizing channel.
inline TwoQubitChannel depolarize2(double p) {
  if (p < 0.0 || p > 15.0 / 16.0)
    throw std::invalid_argument("depolarize2: p must lie in [0, 15/16]");
  std::vector<ComplexMatrix> kraus;
  kraus.reserve(16);
  const double w0 = std::sqrt(1.0 - p);
  const double w = std::sqrt(p / 15.0);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) {
      ComplexMatrix k = kron(pauli(a), pauli(b));
      k *= cplx(a == 0 && b == 0 ? w0 : w, 0.0);
      kraus.push_back(std::move(k));
    }
  return channel_from_kraus(kraus);
}

// second(first(rho)).
inline TwoQubitChannel compose(const TwoQubitChannel& second, const TwoQubitChannel& first) {
  if (second.d != first.d) throw std::invalid_argument("compose: dimension mismatch");
  return {second.d, second.m * first.m};
}

// Max deviation of the trace functional from invariance under the channel.
inline double trace_preservation_defect(const TwoQubitChannel& c) {
  const std::size_t d = c.d, dd = d * d, dim = c.dim();
  std::vector<double> t(dim, 0.0);
  for (std::size_t x = 0; x < d; ++x)
    for (std::size_t y = 0; y < d; ++y) t[(d + 1) * x * dd + (d + 1) * y] = 1.0;
  double defect = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    cplx acc(0.0, 0.0);
    for (std::size_t r = 0; r < dim; ++r)
      if (t[r] != 0.0) acc += c.m(r, k);
    defect = std::max(defect, std::abs(acc - cplx(t[k], 0.0)));
  }
  return defect;
}

// Choi matrix C[(i,k),(j,l)] = <k| N(|i><j|) |l>; positive semidefinite iff
// the channel is completely positive.
inline ComplexMatrix choi_matrix(const TwoQubitChannel& c) {
  const std::size_t dd = c.d * c.d, dim = c.dim();
  const ComplexMatrix mp = regroup(c.m, c.d);  // pair grouping
  ComplexMatrix choi(dim, dim);
  for (std::size_t i = 0; i < dd; ++i)
    for (std::size_t k = 0; k < dd; ++k)
      for (std::size_t j = 0; j < dd; ++j)
        for (std::size_t l = 0; l < dd; ++l)
          choi(i * dd + k, j * dd + l) = mp(k * dd + l, i * dd + j);
  return choi;
}

inline double choi_min_eigenvalue(const TwoQubitChannel& c) {
  const std::vector<double> w = hermitian_eigenvalues(choi_matrix(c));
  return w.front();
}

}  // namespace mposim
