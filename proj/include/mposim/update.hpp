#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "channels.hpp"
#include "complex_matrix.hpp"
#include "linalg.hpp"
#include "mpo.hpp"

namespace mposim {

struct UpdateStats {
  std::size_t bond = 0;           // gate bond l
  double discarded_weight = 0.0;  // dropped lambda^2 over total, at the gate bond
  std::size_t new_bond_dim = 0;
  double sweep_defect = std::numeric_limits<double>::quiet_NaN();
  double wall_time_s = 0.0;
};

namespace detail {

// Values kept: min(cap, #{s_i >= floor}), floor = max(trunc_tol, 1e-14)*s_0.
// The 1e-14 keeps exact-zero singular values out of later divisions even
// when trunc_tol is 0. At least one value is always kept.
inline std::size_t kept_rank(const std::vector<double>& s, std::size_t cap,
                             double trunc_tol) {
  if (s.empty() || s[0] <= 0.0) return 0;
  const double floor = std::max(trunc_tol, 1e-14) * s[0];
  std::size_t r = 0;
  while (r < s.size() && s[r] >= floor) ++r;
  if (r == 0) r = 1;
  return std::min(r, cap);
}

inline double discarded_fraction(const std::vector<double>& s, std::size_t r) {
  double total = 0.0, dropped = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    total += s[i] * s[i];
    if (i >= r) dropped += s[i] * s[i];
  }
  return total > 0.0 ? dropped / total : 0.0;
}

// Left-moving half sweep: restores the Schmidt form of bonds l-1 .. 1 after
// the gate bond l was rebuilt. carry_v holds the left isometry of the gate
// SVD, rows packed (I*chi_left + a), columns the new bond l.
inline void sweep_left(Mpo& m, std::size_t l, ComplexMatrix carry_v) {
  const std::size_t p = m.d * m.d;
  const std::vector<double>* lam_right = &m.bond(l);

  for (std::size_t k = l - 1; k >= 1; --k) {
    const std::size_t ck = m.bond_dim(k);           // bond k before this step
    const std::size_t rk1 = lam_right->size();      // bond k+1 after its update
    ComplexMatrix b(ck, p * rk1);

    if (k == l - 1) {
      for (std::size_t a = 0; a < ck; ++a)
        for (std::size_t i = 0; i < p; ++i)
          for (std::size_t be = 0; be < rk1; ++be)
            b(a, i * rk1 + be) = carry_v(i * ck + a, be) * (*lam_right)[be];
    } else {
      const SiteTensor& g = m.site(k + 1);  // untouched so far
      ComplexMatrix gm(ck * p, g.right);
      std::copy(g.v.begin(), g.v.end(), gm.data());
      const ComplexMatrix mul = gm * carry_v;  // (a*p + I) x rk1
      const std::vector<double>& lam_k = m.bond(k);
      for (std::size_t a = 0; a < ck; ++a)
        for (std::size_t i = 0; i < p; ++i)
          for (std::size_t be = 0; be < rk1; ++be)
            b(a, i * rk1 + be) = lam_k[a] * mul(a * p + i, be) * (*lam_right)[be];
    }

    SvdResult sv = svd(std::move(b));
    // Sweeps drop only negligible weight: rank here is bounded by the incoming
    // bond dimension, so the cap binds at the gate bond alone.
    const std::size_t r2 = kept_rank(sv.s, sv.s.size(), m.trunc_tol);
    if (r2 == 0)
      throw std::runtime_error("apply_two_site: zero spectrum in left sweep at bond " +
                               std::to_string(k));

    SiteTensor gnew(r2, p, rk1);
    for (std::size_t al = 0; al < r2; ++al)
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t be = 0; be < rk1; ++be)
          gnew.at(al, i, be) = sv.vh(al, i * rk1 + be) / (*lam_right)[be];
    m.site(k + 1) = std::move(gnew);

    m.bond(k).assign(sv.s.begin(), sv.s.begin() + r2);
    ComplexMatrix v2(ck, r2);
    for (std::size_t a = 0; a < ck; ++a)
      for (std::size_t j = 0; j < r2; ++j) v2(a, j) = sv.u(a, j);
    carry_v = std::move(v2);
    lam_right = &m.bond(k);
  }

  // Fold the last isometry into site 1.
  const SiteTensor& g1 = m.site(1);
  const std::size_t r1 = carry_v.cols();
  SiteTensor gnew(1, p, r1);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t be = 0; be < r1; ++be) {
      cplx acc(0.0, 0.0);
      for (std::size_t a = 0; a < g1.right; ++a)
        acc += g1.at(0, i, a) * carry_v(a, be);
      gnew.at(0, i, be) = acc;
    }
  m.site(1) = std::move(gnew);
}

// Right-moving half sweep, mirror of sweep_left: bonds l+1 .. n-1. carry_w
// holds the right factor of the gate SVD, columns packed (I*chi_right + c).
inline void sweep_right(Mpo& m, std::size_t l, ComplexMatrix carry_w) {
  const std::size_t p = m.d * m.d, n = m.n;
  const std::vector<double>* lam_left = &m.bond(l);

  for (std::size_t k = l + 1; k <= n - 1; ++k) {
    const std::size_t ck = m.bond_dim(k);        // bond k before this step
    const std::size_t rkm = lam_left->size();    // bond k-1 after its update
    ComplexMatrix b(p * rkm, ck);

    if (k == l + 1) {
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t al = 0; al < rkm; ++al)
          for (std::size_t c = 0; c < ck; ++c)
            b(i * rkm + al, c) = (*lam_left)[al] * carry_w(al, i * ck + c);
    } else {
      const SiteTensor& g = m.site(k);  // untouched so far
      ComplexMatrix gm(g.left, p * ck);
      std::copy(g.v.begin(), g.v.end(), gm.data());
      const ComplexMatrix mul = carry_w * gm;  // rkm x (I*ck + c)
      const std::vector<double>& lam_k = m.bond(k);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t al = 0; al < rkm; ++al)
          for (std::size_t c = 0; c < ck; ++c)
            b(i * rkm + al, c) = (*lam_left)[al] * mul(al, i * ck + c) * lam_k[c];
    }

    SvdResult sv = svd(std::move(b));
    const std::size_t r2 = kept_rank(sv.s, sv.s.size(), m.trunc_tol);
    if (r2 == 0)
      throw std::runtime_error("apply_two_site: zero spectrum in right sweep at bond " +
                               std::to_string(k));

    SiteTensor gnew(rkm, p, r2);
    for (std::size_t al = 0; al < rkm; ++al)
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t be = 0; be < r2; ++be)
          gnew.at(al, i, be) = sv.u(i * rkm + al, be) / (*lam_left)[al];
    m.site(k) = std::move(gnew);

    m.bond(k).assign(sv.s.begin(), sv.s.begin() + r2);
    ComplexMatrix w2(r2, ck);
    for (std::size_t j = 0; j < r2; ++j)
      for (std::size_t c = 0; c < ck; ++c) w2(j, c) = sv.vh(j, c);
    carry_w = std::move(w2);
    lam_left = &m.bond(k);
  }

  // Fold the last right factor into site n.
  const SiteTensor& gn = m.site(n);
  const std::size_t rn = carry_w.rows();
  SiteTensor gnew(rn, p, 1);
  for (std::size_t al = 0; al < rn; ++al)
    for (std::size_t i = 0; i < p; ++i) {
      cplx acc(0.0, 0.0);
      for (std::size_t b2 = 0; b2 < gn.left; ++b2)
        acc += carry_w(al, b2) * gn.at(b2, i, 0);
      gnew.at(al, i, 0) = acc;
    }
  m.site(n) = std::move(gnew);
}

}  // namespace detail

// Apply a two-site channel at bond l (sites l, l+1), truncate the rebuilt
// bond to chi_max, then restore the Schmidt form of every other bond with a
// left and a right half sweep. The channel need not be unitary, so the
// update is global even though the gate is local. lambda is never
// renormalized; truncation loss shows up in the trace.
inline UpdateStats apply_two_site(Mpo& m, const TwoQubitChannel& ch, std::size_t l,
                                  bool compute_defect = false) {
  const auto t0 = std::chrono::steady_clock::now();
  if (ch.d != m.d) throw std::invalid_argument("apply_two_site: dimension mismatch");
  if (l < 1 || l + 1 > m.n) throw std::invalid_argument("apply_two_site: bad bond");
  const std::size_t p = m.d * m.d, n = m.n;

  const SiteTensor& gl = m.site(l);
  const SiteTensor& gr = m.site(l + 1);
  const std::size_t cl = gl.left;    // 1 if l == 1
  const std::size_t cm = gl.right;
  const std::size_t cr = gr.right;   // 1 if l + 1 == n

  static const std::vector<double> kUnit{1.0};
  const std::vector<double>& lam_l = l >= 2 ? m.bond(l - 1) : kUnit;
  const std::vector<double>& lam_m = m.bond(l);
  const std::vector<double>& lam_r = l + 1 < n ? m.bond(l + 1) : kUnit;

  // Two-site block with all surrounding spectra absorbed:
  // P[(a, J1), (J2, c)] = lamL_a (Gamma_l lam_m Gamma_{l+1})^{J1 J2}_{a c} lamR_c.
  ComplexMatrix gl2(cl * p, cm);
  for (std::size_t a = 0; a < cl; ++a)
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t b = 0; b < cm; ++b)
        gl2(a * p + i, b) = lam_l[a] * gl.at(a, i, b) * lam_m[b];
  ComplexMatrix gr2(cm, p * cr);
  for (std::size_t b = 0; b < cm; ++b)
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t c = 0; c < cr; ++c)
        gr2(b, i * cr + c) = gr.at(b, i, c) * lam_r[c];
  const ComplexMatrix pm = gl2 * gr2;  // (a*p + J1) x (J2*cr + c)

  // Regroup to physical-major, apply the channel, regroup back.
  ComplexMatrix pp(p * p, cl * cr);
  for (std::size_t a = 0; a < cl; ++a)
    for (std::size_t j1 = 0; j1 < p; ++j1)
      for (std::size_t j2 = 0; j2 < p; ++j2)
        for (std::size_t c = 0; c < cr; ++c)
          pp(j1 * p + j2, a * cr + c) = pm(a * p + j1, j2 * cr + c);
  const ComplexMatrix b2 = ch.m * pp;  // (I1*p + I2) x (a*cr + c)
  ComplexMatrix b(p * cl, p * cr);
  for (std::size_t i1 = 0; i1 < p; ++i1)
    for (std::size_t a = 0; a < cl; ++a)
      for (std::size_t i2 = 0; i2 < p; ++i2)
        for (std::size_t c = 0; c < cr; ++c)
          b(i1 * cl + a, i2 * cr + c) = b2(i1 * p + i2, a * cr + c);

  SvdResult sv = svd(std::move(b));
  const std::size_t r = detail::kept_rank(sv.s, m.chi_max, m.trunc_tol);
  if (r == 0)
    throw std::runtime_error("apply_two_site: gate produced a zero state at bond " +
                             std::to_string(l));

  UpdateStats stats;
  stats.bond = l;
  stats.discarded_weight = detail::discarded_fraction(sv.s, r);
  stats.new_bond_dim = r;

  m.bond(l).assign(sv.s.begin(), sv.s.begin() + r);
  ComplexMatrix u_kept(p * cl, r);
  for (std::size_t row = 0; row < p * cl; ++row)
    for (std::size_t j = 0; j < r; ++j) u_kept(row, j) = sv.u(row, j);
  ComplexMatrix w_kept(r, p * cr);
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t col = 0; col < p * cr; ++col) w_kept(j, col) = sv.vh(j, col);

  if (l == 1) {
    SiteTensor g1(1, p, r);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t be = 0; be < r; ++be) g1.at(0, i, be) = u_kept(i, be);
    m.site(1) = std::move(g1);
  } else {
    // Site l itself is rebuilt by the first left-sweep step.
    detail::sweep_left(m, l, u_kept);
  }

  if (l + 1 == n) {
    SiteTensor gn(r, p, 1);
    for (std::size_t be = 0; be < r; ++be)
      for (std::size_t i = 0; i < p; ++i) gn.at(be, i, 0) = w_kept(be, i);
    m.site(n) = std::move(gn);
  } else {
    detail::sweep_right(m, l, w_kept);
  }

  if (compute_defect) stats.sweep_defect = canonical_defect(m);
  stats.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return stats;
}

}  // namespace mposim
