#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "complex_matrix.hpp"
#include "rng.hpp"

namespace mposim {

using Bitstring = std::vector<std::uint8_t>;

// Rank-3 site tensor T[a, I, b]: left bond, merged physical index
// I = d*ket + bra, right bond. Storage is row-major over (a, I, b).
struct SiteTensor {
  std::size_t left = 0, phys = 0, right = 0;
  std::vector<cplx> v;

  SiteTensor() = default;
  SiteTensor(std::size_t l, std::size_t p, std::size_t r)
      : left(l), phys(p), right(r), v(l * p * r) {}

  cplx& at(std::size_t a, std::size_t i, std::size_t b) {
    return v[(a * phys + i) * right + b];
  }
  const cplx& at(std::size_t a, std::size_t i, std::size_t b) const {
    return v[(a * phys + i) * right + b];
  }

  // Physical slice I as a left x right matrix.
  ComplexMatrix slice(std::size_t i) const {
    ComplexMatrix m(left, right);
    for (std::size_t a = 0; a < left; ++a)
      for (std::size_t b = 0; b < right; ++b) m(a, b) = at(a, i, b);
    return m;
  }
};

// Density operator in canonical matrix product form: site tensors gamma[k]
// and bond spectra lambda[k], one spectrum per bond. Sites and bonds are
// 1-based in every public signature; bond l sits between sites l and l+1.
// Invariants: each lambda is descending and nonnegative, bond dimensions
// never exceed chi_max, and every bond is a Schmidt decomposition of the
// vectorized operator (orthonormal left and right Schmidt vectors). lambda
// is never renormalized: trace and norm loss from truncation stays visible.
struct Mpo {
  std::size_t n = 0;
  std::size_t d = 2;  // local Hilbert dimension; physical index runs over d*d
  std::size_t chi_max = 0;
  double trunc_tol = 1e-12;
  std::vector<SiteTensor> gamma;            // n entries
  std::vector<std::vector<double>> lambda;  // n - 1 entries

  const SiteTensor& site(std::size_t k) const { return gamma[k - 1]; }
  SiteTensor& site(std::size_t k) { return gamma[k - 1]; }
  const std::vector<double>& bond(std::size_t l) const { return lambda[l - 1]; }
  std::vector<double>& bond(std::size_t l) { return lambda[l - 1]; }
  std::size_t bond_dim(std::size_t l) const { return lambda[l - 1].size(); }
  std::size_t max_bond_dim() const {
    std::size_t m = 0;
    for (const auto& lam : lambda) m = std::max(m, lam.size());
    return m;
  }

  void check_shape() const {
    if (n < 2) throw std::invalid_argument("Mpo: need at least two sites");
    if (gamma.size() != n || lambda.size() != n - 1)
      throw std::invalid_argument("Mpo: tensor count mismatch");
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t want_l = k == 0 ? 1 : lambda[k - 1].size();
      const std::size_t want_r = k == n - 1 ? 1 : lambda[k].size();
      if (gamma[k].left != want_l || gamma[k].right != want_r ||
          gamma[k].phys != d * d)
        throw std::invalid_argument("Mpo: bond dimension mismatch at site " +
                                    std::to_string(k + 1));
    }
  }
};

// |0...0><0...0| as a bond-dimension-1 canonical MPO.
inline Mpo product_zero_state(std::size_t n, std::size_t chi_max, double trunc_tol = 1e-12,
                              std::size_t d = 2) {
  if (n < 2) throw std::invalid_argument("product_zero_state: need at least two sites");
  if (chi_max < 1) throw std::invalid_argument("product_zero_state: chi_max must be >= 1");
  if (trunc_tol < 0.0 || d < 2)
    throw std::invalid_argument("product_zero_state: bad parameters");
  Mpo m;
  m.n = n;
  m.d = d;
  m.chi_max = chi_max;
  m.trunc_tol = trunc_tol;
  m.gamma.assign(n, SiteTensor(1, d * d, 1));
  for (auto& g : m.gamma) g.at(0, 0, 0) = 1.0;
  m.lambda.assign(n - 1, {1.0});
  return m;
}

// Product operator given one d^2 vector per site (merged index I = d*ket+bra).
// Rank one across every bond; the overall norm lives in the lambdas, interior
// gammas carry a compensating 1/norm.
inline Mpo product_operator_state(const std::vector<std::vector<cplx>>& site_vectors,
                                  std::size_t chi_max, double trunc_tol = 1e-12,
                                  std::size_t d = 2) {
  const std::size_t n = site_vectors.size();
  if (n < 2) throw std::invalid_argument("product_operator_state: need two sites");
  double norm_all = 1.0;
  std::vector<double> norms(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (site_vectors[k].size() != d * d)
      throw std::invalid_argument("product_operator_state: bad site vector");
    double s = 0.0;
    for (const cplx& z : site_vectors[k]) s += std::norm(z);
    norms[k] = std::sqrt(s);
    if (norms[k] == 0.0)
      throw std::invalid_argument("product_operator_state: zero site vector");
    norm_all *= norms[k];
  }
  Mpo m;
  m.n = n;
  m.d = d;
  m.chi_max = chi_max;
  m.trunc_tol = trunc_tol;
  m.lambda.assign(n - 1, {norm_all});
  m.gamma.assign(n, SiteTensor(1, d * d, 1));
  for (std::size_t k = 0; k < n; ++k) {
    const double scale = (k == 0 || k == n - 1) ? norms[k] : norms[k] * norm_all;
    for (std::size_t i = 0; i < d * d; ++i)
      m.gamma[k].at(0, i, 0) = site_vectors[k][i] / scale;
  }
  return m;
}

// Entropy of the bond spectrum in bits: p_a = lambda_a^2 / sum lambda^2.
inline double entanglement_entropy(const Mpo& m, std::size_t l) {
  if (l < 1 || l >= m.n) throw std::invalid_argument("entanglement_entropy: bad bond");
  const std::vector<double>& lam = m.bond(l);
  double total = 0.0;
  for (double x : lam) total += x * x;
  if (total <= 0.0)
    throw std::runtime_error("entanglement_entropy: zero spectrum at bond " +
                             std::to_string(l));
  double s = 0.0;
  for (double x : lam) {
    const double p = x * x / total;
    if (p > 0.0) s -= p * std::log2(p);
  }
  return s;
}

struct MaxEntropy {
  double value = 0.0;
  std::size_t bond = 0;
};

inline MaxEntropy max_entanglement_entropy(const Mpo& m) {
  MaxEntropy best;
  for (std::size_t l = 1; l < m.n; ++l) {
    const double s = entanglement_entropy(m, l);
    if (l == 1 || s > best.value) {
      best.value = s;
      best.bond = l;
    }
  }
  return best;
}

namespace detail {

// L <- L * (slice(i) scaled by lambda on the right), the elementary step of
// every chain contraction.
inline void advance_left(std::vector<cplx>& l, const SiteTensor& g, std::size_t i,
                         const std::vector<double>* lam) {
  std::vector<cplx> out(g.right, cplx(0.0, 0.0));
  for (std::size_t a = 0; a < g.left; ++a) {
    const cplx la = l[a];
    if (la == cplx(0.0, 0.0)) continue;
    const cplx* row = &g.v[(a * g.phys + i) * g.right];
    for (std::size_t b = 0; b < g.right; ++b) out[b] += la * row[b];
  }
  if (lam)
    for (std::size_t b = 0; b < g.right; ++b) out[b] *= (*lam)[b];
  l = std::move(out);
}

inline void advance_left_diag_sum(std::vector<cplx>& l, const SiteTensor& g, std::size_t d,
                                  const std::vector<double>* lam) {
  std::vector<cplx> out(g.right, cplx(0.0, 0.0));
  for (std::size_t x = 0; x < d; ++x) {
    const std::size_t i = (d + 1) * x;
    for (std::size_t a = 0; a < g.left; ++a) {
      const cplx la = l[a];
      if (la == cplx(0.0, 0.0)) continue;
      const cplx* row = &g.v[(a * g.phys + i) * g.right];
      for (std::size_t b = 0; b < g.right; ++b) out[b] += la * row[b];
    }
  }
  if (lam)
    for (std::size_t b = 0; b < g.right; ++b) out[b] *= (*lam)[b];
  l = std::move(out);
}

}  // namespace detail

// <x| rho |x> by contracting the chain at physical indices (d+1)*x_k. The
// result of an exact representation is a real probability; the imaginary
// part must vanish to 1e-9 but small negative real values are legitimate
// truncation artifacts and are returned as-is.
inline double probability(const Mpo& m, const Bitstring& x) {
  if (x.size() != m.n) throw std::invalid_argument("probability: bitstring length");
  for (std::uint8_t b : x)
    if (b >= m.d) throw std::invalid_argument("probability: symbol out of range");

  std::vector<cplx> l{cplx(1.0, 0.0)};
  for (std::size_t k = 1; k <= m.n; ++k) {
    const std::vector<double>* lam = k < m.n ? &m.bond(k) : nullptr;
    detail::advance_left(l, m.site(k), (m.d + 1) * x[k - 1], lam);
  }
  const cplx val = l[0];
  if (std::abs(val.imag()) > 1e-9)
    throw std::runtime_error("probability: imaginary residual " +
                             std::to_string(val.imag()));
  return val.real();
}

// Tr rho via per-site sums over diagonal physical indices.
inline double trace(const Mpo& m) {
  std::vector<cplx> l{cplx(1.0, 0.0)};
  for (std::size_t k = 1; k <= m.n; ++k) {
    const std::vector<double>* lam = k < m.n ? &m.bond(k) : nullptr;
    detail::advance_left_diag_sum(l, m.site(k), m.d, lam);
  }
  const cplx val = l[0];
  if (std::abs(val.imag()) > 1e-9)
    throw std::runtime_error("trace: imaginary residual " + std::to_string(val.imag()));
  return val.real();
}

// Draw one measurement outcome from the diagonal of rho, site by site.
// Right environments are cached once, so the whole draw costs O(n d chi^2).
// Negative conditional weights (truncation artifacts) are clamped to zero;
// an all-zero conditional aborts with the offending site in the message.
inline Bitstring sample(const Mpo& m, RngStream& rng) {
  const std::size_t n = m.n, d = m.d;

  // env[k]: diagonal-summed contraction of sites k..n, a vector over the
  // left bond of site k. env[n+1] seeds the dummy right bond of site n.
  std::vector<std::vector<cplx>> env(n + 2);
  env[n + 1].assign(1, cplx(1.0, 0.0));
  for (std::size_t k = n; k >= 2; --k) {
    const SiteTensor& g = m.site(k);
    const std::vector<double>* lam = k < n ? &m.bond(k) : nullptr;
    const std::vector<cplx>& next = env[k + 1];
    std::vector<cplx> r(g.left, cplx(0.0, 0.0));
    for (std::size_t x = 0; x < d; ++x) {
      const std::size_t i = (d + 1) * x;
      for (std::size_t a = 0; a < g.left; ++a) {
        cplx acc(0.0, 0.0);
        const cplx* row = &g.v[(a * g.phys + i) * g.right];
        for (std::size_t b = 0; b < g.right; ++b) {
          const double w = lam ? (*lam)[b] : 1.0;
          acc += row[b] * w * next[b];
        }
        r[a] += acc;
      }
    }
    env[k] = std::move(r);
  }

  Bitstring out(n, 0);
  std::vector<cplx> l{cplx(1.0, 0.0)};
  for (std::size_t k = 1; k <= n; ++k) {
    const SiteTensor& g = m.site(k);
    const std::vector<double>* lam = k < n ? &m.bond(k) : nullptr;
    std::vector<std::vector<cplx>> w(d);
    std::vector<double> num(d, 0.0);
    double total = 0.0;
    for (std::size_t x = 0; x < d; ++x) {
      w[x] = l;
      detail::advance_left(w[x], g, (d + 1) * x, lam);
      cplx acc(0.0, 0.0);
      const std::vector<cplx>& next = env[k + 1];
      for (std::size_t b = 0; b < w[x].size(); ++b) acc += w[x][b] * next[b];
      num[x] = std::max(0.0, acc.real());
      total += num[x];
    }
    if (total <= 0.0)
      throw std::runtime_error("sample: zero conditional distribution at site " +
                               std::to_string(k));
    const double u = rng.uniform() * total;
    double cum = 0.0;
    std::size_t pick = d - 1;
    for (std::size_t x = 0; x < d; ++x) {
      cum += num[x];
      if (u < cum) {
        pick = x;
        break;
      }
    }
    out[k - 1] = static_cast<std::uint8_t>(pick);
    l = std::move(w[pick]);
  }
  return out;
}

// Largest deviation of any bond's left or right Schmidt-vector Gram matrix
// from the identity, in Frobenius norm. Zero for an exactly canonical form.
inline double canonical_defect(const Mpo& m) {
  const std::size_t n = m.n, p = m.d * m.d;
  double worst = 0.0;

  ComplexMatrix gL(1, 1);
  gL(0, 0) = 1.0;
  for (std::size_t k = 1; k <= n - 1; ++k) {
    const SiteTensor& g = m.site(k);
    const std::vector<double>* lam = k >= 2 ? &m.bond(k - 1) : nullptr;
    ComplexMatrix next(g.right, g.right);
    for (std::size_t i = 0; i < p; ++i) {
      ComplexMatrix a = g.slice(i);
      if (lam)
        for (std::size_t r = 0; r < a.rows(); ++r)
          for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) *= (*lam)[r];
      next += a.adjoint() * gL * a;
    }
    gL = std::move(next);
    worst = std::max(worst,
                     (gL - ComplexMatrix::identity(gL.rows())).frobenius_norm());
  }

  ComplexMatrix gR(1, 1);
  gR(0, 0) = 1.0;
  for (std::size_t l = n - 1; l >= 1; --l) {
    const SiteTensor& g = m.site(l + 1);
    const std::vector<double>* lam = l + 1 < n ? &m.bond(l + 1) : nullptr;
    ComplexMatrix next(g.left, g.left);
    for (std::size_t i = 0; i < p; ++i) {
      ComplexMatrix b = g.slice(i);
      if (lam)
        for (std::size_t r = 0; r < b.rows(); ++r)
          for (std::size_t c = 0; c < b.cols(); ++c) b(r, c) *= (*lam)[c];
      next += b * gR * b.adjoint();
    }
    gR = std::move(next);
    worst = std::max(worst,
                     (gR - ComplexMatrix::identity(gR.rows())).frobenius_norm());
  }
  return worst;
}

}  // namespace mposim
