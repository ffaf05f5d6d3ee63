#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "channels.hpp"
#include "complex_matrix.hpp"
#include "linalg.hpp"
#include "mpo.hpp"

namespace mposim {

// Exact dense reference: the full d^n x d^n density matrix evolved by direct
// superoperator application. Exponential in n, capped so a typo cannot eat
// all memory. Site 1 is the most significant digit of a basis index, the
// same convention the bitstring functions use.
struct DenseState {
  std::size_t n = 0, d = 2;
  ComplexMatrix rho;

  static constexpr std::size_t max_sites = 10;

  static DenseState zero_state(std::size_t n, std::size_t d = 2) {
    check_size(n, d);
    DenseState st;
    st.n = n;
    st.d = d;
    st.rho = ComplexMatrix(dim(n, d), dim(n, d));
    st.rho(0, 0) = 1.0;
    return st;
  }

  static std::size_t dim(std::size_t n, std::size_t d) {
    std::size_t v = 1;
    for (std::size_t i = 0; i < n; ++i) v *= d;
    return v;
  }

  static void check_size(std::size_t n, std::size_t d) {
    if (n < 2 || n > max_sites)
      throw std::invalid_argument("DenseState: n must lie in [2, " +
                                  std::to_string(max_sites) + "]");
    if (d < 2) throw std::invalid_argument("DenseState: d must be >= 2");
  }
};

// Apply a two-site channel to sites (l, l+1), 1-based.
inline void dense_apply_two_site(DenseState& st, const TwoQubitChannel& ch, std::size_t l) {
  const std::size_t d = st.d, dd = d * d;
  if (ch.d != d) throw std::invalid_argument("dense_apply_two_site: dimension mismatch");
  if (l < 1 || l + 1 > st.n) throw std::invalid_argument("dense_apply_two_site: bad site");
  const std::size_t dl = DenseState::dim(l - 1, d);
  const std::size_t dr = DenseState::dim(st.n - l - 1, d);
  const std::size_t dim = st.rho.rows();

  ComplexMatrix out(dim, dim);
  std::vector<cplx> in(dd * dd), res(dd * dd);
  for (std::size_t al = 0; al < dl; ++al)
    for (std::size_t ar = 0; ar < dr; ++ar)
      for (std::size_t bl = 0; bl < dl; ++bl)
        for (std::size_t br = 0; br < dr; ++br) {
          for (std::size_t r1 = 0; r1 < d; ++r1)
            for (std::size_t r2 = 0; r2 < d; ++r2)
              for (std::size_t c1 = 0; c1 < d; ++c1)
                for (std::size_t c2 = 0; c2 < d; ++c2) {
                  const std::size_t row = (al * d + r1) * d * dr + r2 * dr + ar;
                  const std::size_t col = (bl * d + c1) * d * dr + c2 * dr + br;
                  in[(d * r1 + c1) * dd + (d * r2 + c2)] = st.rho(row, col);
                }
          for (std::size_t i = 0; i < dd * dd; ++i) {
            cplx acc(0.0, 0.0);
            for (std::size_t j = 0; j < dd * dd; ++j) acc += ch.m(i, j) * in[j];
            res[i] = acc;
          }
          for (std::size_t r1 = 0; r1 < d; ++r1)
            for (std::size_t r2 = 0; r2 < d; ++r2)
              for (std::size_t c1 = 0; c1 < d; ++c1)
                for (std::size_t c2 = 0; c2 < d; ++c2) {
                  const std::size_t row = (al * d + r1) * d * dr + r2 * dr + ar;
                  const std::size_t col = (bl * d + c1) * d * dr + c2 * dr + br;
                  out(row, col) = res[(d * r1 + c1) * dd + (d * r2 + c2)];
                }
        }
  st.rho = std::move(out);
}

inline double dense_trace(const DenseState& st) {
  cplx tr(0.0, 0.0);
  for (std::size_t i = 0; i < st.rho.rows(); ++i) tr += st.rho(i, i);
  return tr.real();
}

inline double dense_probability(const DenseState& st, const Bitstring& x) {
  if (x.size() != st.n) throw std::invalid_argument("dense_probability: length");
  std::size_t ix = 0;
  for (std::uint8_t b : x) {
    if (b >= st.d) throw std::invalid_argument("dense_probability: symbol range");
    ix = ix * st.d + b;
  }
  return st.rho(ix, ix).real();
}

inline double dense_hermiticity_defect(const DenseState& st) {
  return max_abs_diff(st.rho, st.rho.adjoint());
}

inline double dense_min_eigenvalue(const DenseState& st) {
  ComplexMatrix h = st.rho + st.rho.adjoint();
  h *= cplx(0.5, 0.0);
  return hermitian_eigenvalues(std::move(h)).front();
}

// Schmidt spectrum of the vectorized operator across bond l: singular values
// of the (d^2)^l x (d^2)^(n-l) reshape.
inline std::vector<double> dense_schmidt_spectrum(const DenseState& st, std::size_t l) {
  if (l < 1 || l >= st.n) throw std::invalid_argument("dense_schmidt_spectrum: bad bond");
  const std::size_t d = st.d, dim = st.rho.rows();
  const std::size_t rows = DenseState::dim(l, d * d);
  const std::size_t cols = DenseState::dim(st.n - l, d * d);
  const std::size_t dr = DenseState::dim(st.n - l, d);

  ComplexMatrix a(rows, cols);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) {
      // Merge per-site (ket, bra) digits in site order.
      const std::size_t rl = r / dr, rr = r % dr;
      const std::size_t cl = c / dr, cr = c % dr;
      std::size_t row = 0, col = 0;
      std::size_t rdig = rl, cdig = cl, base = 1;
      for (std::size_t k = 0; k < l; ++k) {
        row += (d * (rdig % d) + (cdig % d)) * base;
        rdig /= d;
        cdig /= d;
        base *= d * d;
      }
      base = 1;
      rdig = rr;
      cdig = cr;
      for (std::size_t k = 0; k < st.n - l; ++k) {
        col += (d * (rdig % d) + (cdig % d)) * base;
        rdig /= d;
        cdig /= d;
        base *= d * d;
      }
      a(row, col) = st.rho(r, c);
    }
  return svd(std::move(a)).s;
}

inline double dense_entanglement_entropy(const DenseState& st, std::size_t l) {
  const std::vector<double> s = dense_schmidt_spectrum(st, l);
  double total = 0.0;
  for (double x : s) total += x * x;
  if (total <= 0.0) throw std::runtime_error("dense_entanglement_entropy: zero spectrum");
  double ent = 0.0;
  for (double x : s) {
    const double p = x * x / total;
    if (p > 0.0) ent -= p * std::log2(p);
  }
  return ent;
}

// Contract a matrix product form back to the dense matrix.
inline DenseState mpo_to_dense(const Mpo& m) {
  DenseState::check_size(m.n, m.d);
  m.check_shape();
  const std::size_t d = m.d, p = d * d;

  // acc[(I_1..I_k), b]: row-major over the merged physical digits, site 1
  // most significant.
  std::vector<cplx> acc{cplx(1.0, 0.0)};
  std::size_t phys = 1;
  for (std::size_t k = 1; k <= m.n; ++k) {
    const SiteTensor& g = m.site(k);
    const std::vector<double>* lam = k < m.n ? &m.bond(k) : nullptr;
    std::vector<cplx> next(phys * p * g.right, cplx(0.0, 0.0));
    for (std::size_t s = 0; s < phys; ++s)
      for (std::size_t a = 0; a < g.left; ++a) {
        const cplx v = acc[s * g.left + a];
        if (v == cplx(0.0, 0.0)) continue;
        for (std::size_t i = 0; i < p; ++i)
          for (std::size_t b = 0; b < g.right; ++b) {
            const double w = lam ? (*lam)[b] : 1.0;
            next[(s * p + i) * g.right + b] += v * g.at(a, i, b) * w;
          }
      }
    acc = std::move(next);
    phys *= p;
  }

  DenseState st;
  st.n = m.n;
  st.d = d;
  const std::size_t dim = DenseState::dim(m.n, d);
  st.rho = ComplexMatrix(dim, dim);
  for (std::size_t s = 0; s < phys; ++s) {
    // Split merged digits back into row and column indices.
    std::size_t row = 0, col = 0, digits = s;
    std::size_t base = 1;
    for (std::size_t k = 0; k < m.n; ++k) {
      const std::size_t ik = digits % p;
      digits /= p;
      row += (ik / d) * base;
      col += (ik % d) * base;
      base *= d;
    }
    st.rho(row, col) = acc[s];
  }
  return st;
}

}  // namespace mposim
