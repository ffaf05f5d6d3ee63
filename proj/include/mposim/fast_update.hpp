#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "channels.hpp"
#include "complex_matrix.hpp"
#include "linalg.hpp"
#include "mpo.hpp"
#include "update.hpp"

namespace mposim {

// Mixed-canonical evolution engine. Sites 1..center are left orthonormal,
// sites center+1..n are right orthonormal, and the center matrix sits on bond
// `center` (0 = left of site 1) carrying the norm and spectrum. Moving the
// center one bond is a QR or LQ factorization, so a sweep-ordered gate
// sequence pays O(chi^3) per gate, with no full-chain pass after each gate.
// Convert back with to_mpo() wherever bond spectra are needed; the result is
// the same state as the reference apply_two_site path up to gauge.
class FastEvolver {
 public:
  explicit FastEvolver(const Mpo& m)
      : n_(m.n), d_(m.d), chi_max_(m.chi_max), trunc_tol_(m.trunc_tol), site_(m.n + 1) {
    m.check_shape();
    // A_1 = Gamma_1 (its columns are the bond-1 Schmidt vectors), center
    // diag(lambda_1), and B_k = Gamma_k * diag(lambda_k) on the right, which
    // is right orthonormal because Schmidt vectors are orthonormal.
    site_[1] = m.site(1);
    for (std::size_t k = 2; k <= n_; ++k) {
      SiteTensor t = m.site(k);
      if (k < n_) {
        const std::vector<double>& lam = m.bond(k);
        for (std::size_t a = 0; a < t.left; ++a)
          for (std::size_t i = 0; i < t.phys; ++i)
            for (std::size_t b = 0; b < t.right; ++b) t.at(a, i, b) *= lam[b];
      }
      site_[k] = std::move(t);
    }
    const std::vector<double>& lam1 = m.bond(1);
    s_ = ComplexMatrix(lam1.size(), lam1.size());
    for (std::size_t i = 0; i < lam1.size(); ++i) s_(i, i) = lam1[i];
    center_ = 1;
  }

  std::size_t sites() const { return n_; }
  std::size_t center() const { return center_; }

  // Two-site channel at bond l. Only the gate bond is truncated to the cap;
  // center moves are exact factorizations.
  UpdateStats apply(const TwoQubitChannel& ch, std::size_t l) {
    const auto t0 = std::chrono::steady_clock::now();
    if (ch.d != d_) throw std::invalid_argument("FastEvolver::apply: dimension mismatch");
    if (l < 1 || l + 1 > n_) throw std::invalid_argument("FastEvolver::apply: bad bond");
    move_to(l - 1);

    const std::size_t p = d_ * d_;
    const SiteTensor& bl = site_[l];
    const SiteTensor& br = site_[l + 1];
    const std::size_t al = s_.rows(), mid = bl.right, cr = br.right;

    // theta[(a, J1), (J2, c)] = (S B_l B_{l+1}); both outer bases orthonormal,
    // so its SVD is the Schmidt decomposition of the updated state at bond l.
    ComplexMatrix sb = s_ * ComplexMatrix(bl.left, p * mid, bl.v);
    ComplexMatrix th =
        std::move(sb).reshaped(al * p, mid) * ComplexMatrix(mid, p * cr, br.v);

    // Regroup to physical-major, apply the channel, regroup back.
    ComplexMatrix pp(p * p, al * cr);
    for (std::size_t a = 0; a < al; ++a)
      for (std::size_t j1 = 0; j1 < p; ++j1)
        for (std::size_t j2 = 0; j2 < p; ++j2)
          for (std::size_t c = 0; c < cr; ++c)
            pp(j1 * p + j2, a * cr + c) = th(a * p + j1, j2 * cr + c);
    const ComplexMatrix b2 = ch.m * pp;
    ComplexMatrix b(p * al, p * cr);
    for (std::size_t i1 = 0; i1 < p; ++i1)
      for (std::size_t a = 0; a < al; ++a)
        for (std::size_t i2 = 0; i2 < p; ++i2)
          for (std::size_t c = 0; c < cr; ++c)
            b(i1 * al + a, i2 * cr + c) = b2(i1 * p + i2, a * cr + c);

    SvdResult sv = svd(std::move(b));
    const std::size_t r = detail::kept_rank(sv.s, chi_max_, trunc_tol_);
    if (r == 0)
      throw std::runtime_error("FastEvolver::apply: gate produced a zero state at bond " +
                               std::to_string(l));

    UpdateStats stats;
    stats.bond = l;
    stats.discarded_weight = detail::discarded_fraction(sv.s, r);
    stats.new_bond_dim = r;

    SiteTensor anew(al, p, r);
    for (std::size_t a = 0; a < al; ++a)
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < r; ++j) anew.at(a, i, j) = sv.u(i * al + a, j);
    SiteTensor bnew(r, p, cr);
    for (std::size_t j = 0; j < r; ++j)
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t c = 0; c < cr; ++c) bnew.at(j, i, c) = sv.vh(j, i * cr + c);
    site_[l] = std::move(anew);
    site_[l + 1] = std::move(bnew);
    s_ = ComplexMatrix(r, r);
    for (std::size_t j = 0; j < r; ++j) s_(j, j) = sv.s[j];
    center_ = l;

    stats.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return stats;
  }

  // Recover the canonical form. The rvalue overload consumes the engine and
  // skips one full copy of the tensors.
  Mpo to_mpo() const& {
    FastEvolver tmp(*this);
    return tmp.extract();
  }
  Mpo to_mpo() && { return extract(); }

 private:
  Mpo extract() {
    move_to(n_ - 1);
    const std::size_t p = d_ * d_;
    Mpo out;
    out.n = n_;
    out.d = d_;
    out.chi_max = chi_max_;
    out.trunc_tol = trunc_tol_;
    out.gamma.assign(n_, SiteTensor());
    out.lambda.assign(n_ - 1, {});

    // Right-to-left: SVD the center at bond k to read off lambda, push the
    // right factor into B_{k+1} (which becomes Gamma_{k+1} after dividing by
    // the bond k+1 spectrum), fold U * diag(s) into A_k, and LQ-move on.
    for (std::size_t k = n_ - 1; k >= 1; --k) {
      SvdResult sv = svd(std::move(s_));
      const std::size_t r = detail::kept_rank(sv.s, sv.s.size(), trunc_tol_);
      if (r == 0)
        throw std::runtime_error("FastEvolver: zero spectrum at bond " + std::to_string(k));
      out.lambda[k - 1].assign(sv.s.begin(), sv.s.begin() + r);

      const SiteTensor& bt = site_[k + 1];
      ComplexMatrix vk(r, sv.vh.cols());
      for (std::size_t j = 0; j < r; ++j)
        for (std::size_t c = 0; c < sv.vh.cols(); ++c) vk(j, c) = sv.vh(j, c);
      ComplexMatrix rb = vk * ComplexMatrix(bt.left, p * bt.right, bt.v);
      SiteTensor g(r, p, bt.right);
      const std::vector<double>* lam_r = k + 1 < n_ ? &out.lambda[k] : nullptr;
      for (std::size_t a = 0; a < r; ++a)
        for (std::size_t i = 0; i < p; ++i)
          for (std::size_t b = 0; b < bt.right; ++b)
            g.at(a, i, b) = lam_r ? rb(a, i * bt.right + b) / (*lam_r)[b]
                                  : rb(a, i * bt.right + b);
      out.gamma[k] = std::move(g);

      const SiteTensor& at = site_[k];
      if (k == 1) {
        // Gamma_1 columns are the bond-1 left Schmidt vectors: A_1 * U.
        ComplexMatrix uk(sv.u.rows(), r);
        for (std::size_t i = 0; i < sv.u.rows(); ++i)
          for (std::size_t j = 0; j < r; ++j) uk(i, j) = sv.u(i, j);
        ComplexMatrix g1 = ComplexMatrix(at.left * p, at.right, at.v) * uk;
        out.gamma[0] = pack(1, p, r, g1);
      } else {
        ComplexMatrix us(sv.u.rows(), r);
        for (std::size_t i = 0; i < sv.u.rows(); ++i)
          for (std::size_t j = 0; j < r; ++j) us(i, j) = sv.u(i, j) * sv.s[j];
        ComplexMatrix mm = ComplexMatrix(at.left * p, at.right, at.v) * us;
        LqResult f = lq(std::move(mm).reshaped(at.left, p * r));
        site_[k] = pack(f.q.rows(), p, r, f.q);
        s_ = std::move(f.l);
        --center_;
      }
    }
    out.check_shape();
    return out;
  }

  void move_to(std::size_t c) {
    while (center_ < c) move_right();
    while (center_ > c) move_left();
  }

  // M[(a, I), m] = S B_{c+1}; QR makes the Q factor the new A_{c+1}.
  void move_right() {
    const SiteTensor& bt = site_[center_ + 1];
    ComplexMatrix mm = s_ * ComplexMatrix(bt.left, bt.phys * bt.right, bt.v);
    QrResult f = qr(std::move(mm).reshaped(s_.rows() * bt.phys, bt.right));
    const std::size_t a = s_.rows();
    site_[center_ + 1] = pack(a, bt.phys, f.q.cols(), f.q);
    s_ = std::move(f.r);
    ++center_;
  }

  // M[a, (I, m)] = A_c S; LQ makes the Q factor the new B_c.
  void move_left() {
    const SiteTensor& at = site_[center_];
    const std::size_t cols = s_.cols();
    ComplexMatrix mm = ComplexMatrix(at.left * at.phys, at.right, at.v) * s_;
    LqResult f = lq(std::move(mm).reshaped(at.left, at.phys * cols));
    site_[center_] = pack(f.q.rows(), at.phys, cols, f.q);
    s_ = std::move(f.l);
    --center_;
  }

  // The matrix buffer already holds row-major (a, I, b) data.
  static SiteTensor pack(std::size_t a, std::size_t p, std::size_t b,
                         const ComplexMatrix& m) {
    SiteTensor t(a, p, b);
    if (m.size() != t.v.size())
      throw std::logic_error("FastEvolver: tensor pack size mismatch");
    std::copy(m.data(), m.data() + m.size(), t.v.begin());
    return t;
  }

  std::size_t n_, d_, chi_max_;
  double trunc_tol_;
  std::vector<SiteTensor> site_;  // 1-based; [0] unused
  ComplexMatrix s_;
  std::size_t center_ = 0;
};

// Drop-in equivalent of apply_two_site through the mixed-canonical engine:
// same state, spectra, and probabilities up to gauge. A one-off call still
// pays the conversions; keep one FastEvolver across a gate sequence for the
// amortized O(chi^3)-per-gate cost.
inline UpdateStats apply_two_site_fast(Mpo& m, const TwoQubitChannel& ch, std::size_t l,
                                       bool compute_defect = false) {
  const auto t0 = std::chrono::steady_clock::now();
  FastEvolver ev(m);
  UpdateStats stats = ev.apply(ch, l);
  m = std::move(ev).to_mpo();
  if (compute_defect) stats.sweep_defect = canonical_defect(m);
  stats.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return stats;
}

}  // namespace mposim
