#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "channels.hpp"
#include "fast_update.hpp"
#include "linalg.hpp"
#include "mpo.hpp"
#include "rng.hpp"
#include "update.hpp"

namespace mposim {

// One brickwork-circuit experiment: n qubits, depth_max layers of Haar
// two-qubit gates each followed by two-qubit depolarization with rate p,
// bond cap chi, n_samples independent realizations.
struct CircuitConfig {
  std::size_t n = 4;
  std::size_t depth_max = 8;
  double p = 0.0;
  std::size_t chi = 64;
  std::size_t n_samples = 1;
  std::uint64_t master_seed = 0;
  double trunc_tol = 1e-12;
  bool fast_path = false;

  void validate() const {
    if (n < 4 || n % 2 != 0)
      throw std::invalid_argument("CircuitConfig: n must be even and >= 4");
    if (p < 0.0 || p > 15.0 / 16.0)
      throw std::invalid_argument("CircuitConfig: p must lie in [0, 15/16]");
    if (depth_max < 1) throw std::invalid_argument("CircuitConfig: depth_max must be >= 1");
    if (chi < 1) throw std::invalid_argument("CircuitConfig: chi must be >= 1");
    if (n_samples < 1) throw std::invalid_argument("CircuitConfig: n_samples must be >= 1");
    if (trunc_tol < 0.0) throw std::invalid_argument("CircuitConfig: trunc_tol must be >= 0");
  }
};

// Odd layers act on bonds 1,3,..,n-1; even layers on 2,4,..,n-2. Ascending
// order is part of the contract: gates consume the RNG stream in (t, l) order.
inline std::vector<std::size_t> layer_bonds(std::size_t t, std::size_t n) {
  std::vector<std::size_t> bonds;
  for (std::size_t l = (t % 2 == 1) ? 1 : 2; l <= n - 1; l += 2) bonds.push_back(l);
  return bonds;
}

// The gate of one brickwork slot: a fresh Haar unitary followed by two-qubit
// depolarization. Draws exactly one unitary from the stream.
inline TwoQubitChannel noisy_haar_gate(RngStream& rng, double p) {
  TwoQubitChannel u = unitary_channel(haar_unitary(4, rng));
  return p > 0.0 ? compose(depolarize2(p), u) : u;
}

struct DepthRecord {
  std::vector<double> entropy;  // bond l at index l-1
  double trace = 0.0;
  double discarded = 0.0;  // summed over the layer's gates
};

struct Trajectory {
  std::size_t realization = 0;
  std::vector<DepthRecord> depths;   // depth t at index t-1
  std::vector<UpdateStats> gates;    // in (t, l) order
};

// One circuit realization. The RNG substream depends only on (master_seed,
// index), and gates consume it in fixed (t, l ascending) order, so the same
// trajectory comes back regardless of scheduling or evolution path.
inline Trajectory run_realization(const CircuitConfig& cfg, std::size_t index) {
  cfg.validate();
  RngStream rng = RngStream::substream(cfg.master_seed, index);

  Trajectory out;
  out.realization = index;
  out.depths.reserve(cfg.depth_max);

  Mpo state = product_zero_state(cfg.n, cfg.chi, cfg.trunc_tol);
  std::optional<FastEvolver> ev;
  if (cfg.fast_path) ev.emplace(state);
  double prev_trace = 1.0;

  for (std::size_t t = 1; t <= cfg.depth_max; ++t) {
    DepthRecord rec;
    for (std::size_t l : layer_bonds(t, cfg.n)) {
      const TwoQubitChannel gate = noisy_haar_gate(rng, cfg.p);
      const UpdateStats st =
          ev ? ev->apply(gate, l) : apply_two_site(state, gate, l);
      rec.discarded += st.discarded_weight;
      out.gates.push_back(st);
    }

    const Mpo& snap = ev ? (state = ev->to_mpo()) : state;
    rec.entropy.resize(cfg.n - 1);
    for (std::size_t l = 1; l < cfg.n; ++l)
      rec.entropy[l - 1] = entanglement_entropy(snap, l);
    rec.trace = trace(snap);
    // Truncation shifts the trace by the dropped Schmidt terms' trace
    // contributions, which are sign-indefinite: the net drift is downward,
    // but one layer may raise the trace by a residue far below sqrt of the
    // discarded weight. Layers that discard nothing preserve the trace.
    const double slack =
        1e-9 + (rec.discarded > 0.0 ? std::sqrt(rec.discarded) : 0.0);
    if (!(rec.trace > 0.0) || rec.trace > 1.0 + 1e-3)
      throw std::runtime_error("run_realization: trace left (0, 1+1e-3] at depth " +
                               std::to_string(t));
    if (rec.trace > prev_trace + slack)
      throw std::runtime_error(
          "run_realization: trace jumped beyond the truncation residue at depth " +
          std::to_string(t));
    prev_trace = rec.trace;
    out.depths.push_back(std::move(rec));
  }
  return out;
}

// The final state of one realization, for checkpointing and end-of-circuit
// observables. Replays the same substream as run_realization, so the state
// matches the recorded trajectory of the same (cfg, index).
inline Mpo evolve_realization(const CircuitConfig& cfg, std::size_t index) {
  cfg.validate();
  RngStream rng = RngStream::substream(cfg.master_seed, index);
  Mpo state = product_zero_state(cfg.n, cfg.chi, cfg.trunc_tol);
  std::optional<FastEvolver> ev;
  if (cfg.fast_path) ev.emplace(state);
  for (std::size_t t = 1; t <= cfg.depth_max; ++t)
    for (std::size_t l : layer_bonds(t, cfg.n)) {
      const TwoQubitChannel gate = noisy_haar_gate(rng, cfg.p);
      if (ev)
        ev->apply(gate, l);
      else
        apply_two_site(state, gate, l);
    }
  return ev ? std::move(*ev).to_mpo() : state;
}

struct EnsembleResult {
  CircuitConfig cfg;
  std::vector<Trajectory> trajectories;            // index order
  std::vector<std::vector<double>> mean_entropy;   // [t-1][l-1]
  std::vector<double> s_max;                       // max_l of the mean profile
  std::vector<double> mean_trace;                  // per depth
  std::vector<double> per_realization_max;         // diagnostics only
  std::size_t d_star = 0;                          // smallest argmax of s_max
  double s_star_max = 0.0;
  double min_mean_trace = 0.0;
};

// Average the entropy profile over realizations first, then maximize the
// averaged profile over the cut; never the other way around.
inline EnsembleResult run_ensemble(const CircuitConfig& cfg, std::size_t threads = 1) {
  cfg.validate();
  EnsembleResult out;
  out.cfg = cfg;
  out.trajectories.resize(cfg.n_samples);

  if (threads <= 1 || cfg.n_samples == 1) {
    for (std::size_t i = 0; i < cfg.n_samples; ++i)
      out.trajectories[i] = run_realization(cfg, i);
  } else {
    // Static striped split: results land in index order, so the reduction
    // below is bitwise identical for every thread count.
    const std::size_t nt = std::min(threads, cfg.n_samples);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::vector<std::string> errors(nt);
    for (std::size_t w = 0; w < nt; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < cfg.n_samples; i += nt)
            out.trajectories[i] = run_realization(cfg, i);
        } catch (const std::exception& e) {
          errors[w] = e.what();
        }
      });
    for (auto& th : pool) th.join();
    for (const std::string& e : errors)
      if (!e.empty()) throw std::runtime_error("run_ensemble: " + e);
  }

  const std::size_t nd = cfg.depth_max, nb = cfg.n - 1;
  out.mean_entropy.assign(nd, std::vector<double>(nb, 0.0));
  out.mean_trace.assign(nd, 0.0);
  out.s_max.assign(nd, 0.0);
  out.per_realization_max.assign(cfg.n_samples, 0.0);

  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    const Trajectory& tr = out.trajectories[i];
    double own_max = 0.0;
    for (std::size_t t = 0; t < nd; ++t) {
      for (std::size_t l = 0; l < nb; ++l) {
        out.mean_entropy[t][l] += tr.depths[t].entropy[l];
        own_max = std::max(own_max, tr.depths[t].entropy[l]);
      }
      out.mean_trace[t] += tr.depths[t].trace;
    }
    out.per_realization_max[i] = own_max;
  }

  const double inv = 1.0 / static_cast<double>(cfg.n_samples);
  for (std::size_t t = 0; t < nd; ++t) {
    out.mean_trace[t] *= inv;
    double mx = 0.0;
    for (std::size_t l = 0; l < nb; ++l) {
      out.mean_entropy[t][l] *= inv;
      mx = std::max(mx, out.mean_entropy[t][l]);
    }
    out.s_max[t] = mx;
  }

  out.d_star = 1;
  out.s_star_max = out.s_max[0];
  for (std::size_t t = 1; t < nd; ++t)
    if (out.s_max[t] > out.s_star_max) {
      out.s_star_max = out.s_max[t];
      out.d_star = t + 1;
    }
  out.min_mean_trace = out.mean_trace[0];
  for (double tr : out.mean_trace) out.min_mean_trace = std::min(out.min_mean_trace, tr);
  return out;
}

// Mean entanglement entropy (bits) of a Haar-random bipartite pure state
// with subsystem dimensions m <= nn: [sum_{k=nn+1}^{m*nn} 1/k - (m-1)/(2nn)]
// in nats, converted to bits.
inline double page_entropy(std::size_t m, std::size_t nn) {
  if (m < 1 || m > nn) throw std::invalid_argument("page_entropy: need 1 <= m <= nn");
  long double h = 0.0L;
  for (std::size_t k = m * nn; k > nn; --k) h += 1.0L / static_cast<long double>(k);
  h -= static_cast<long double>(m - 1) / (2.0L * static_cast<long double>(nn));
  return static_cast<double>(h) * 1.4426950408889634074;  // log2(e)
}

// Power-law fit S = a * p^(-b) by least squares in log-log space, with the
// standard errors of the log-space fit. Optionally fits D* = c * p^(-1/alpha)
// the same way for an independent alpha estimate.
struct FitResult {
  double a = 0.0, b = 0.0;
  double log_a_se = 0.0, b_se = 0.0;
  double alpha_from_s = 0.0;  // 1/b
  bool has_d_fit = false;
  double d_prefactor = 0.0;
  double alpha_from_d = 0.0;
  double d_slope_se = 0.0;
};

namespace detail {

struct LogLogFit {
  double slope, intercept, slope_se, intercept_se;
};

inline LogLogFit loglog_ols(const std::vector<std::pair<double, double>>& pts,
                            const char* what) {
  std::vector<double> xs, ys;
  for (const auto& [x, y] : pts) {
    if (x <= 0.0 || y <= 0.0)
      throw std::invalid_argument(std::string(what) + ": needs positive values");
    xs.push_back(std::log(x));
    ys.push_back(std::log(y));
  }
  std::vector<double> ux = xs;
  std::sort(ux.begin(), ux.end());
  ux.erase(std::unique(ux.begin(), ux.end()), ux.end());
  if (ux.size() < 3)
    throw std::invalid_argument(std::string(what) + ": needs at least 3 distinct p values");

  const std::size_t nn = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < nn; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(nn);
  my /= static_cast<double>(nn);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < nn; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument(std::string(what) + ": degenerate design");

  LogLogFit f{};
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < nn; ++i) {
    const double r = ys[i] - (f.intercept + f.slope * xs[i]);
    ssr += r * r;
  }
  const double dof = nn > 2 ? static_cast<double>(nn - 2) : 1.0;
  const double s2 = ssr / dof;
  f.slope_se = std::sqrt(s2 / sxx);
  f.intercept_se = std::sqrt(s2 * (1.0 / static_cast<double>(nn) + mx * mx / sxx));
  return f;
}

}  // namespace detail

inline FitResult fit_heuristic(const std::vector<std::pair<double, double>>& s_points,
                               const std::vector<std::pair<double, double>>& d_points = {}) {
  const detail::LogLogFit fs = detail::loglog_ols(s_points, "fit_heuristic");
  FitResult out;
  out.b = -fs.slope;
  out.a = std::exp(fs.intercept);
  out.b_se = fs.slope_se;
  out.log_a_se = fs.intercept_se;
  out.alpha_from_s = out.b != 0.0 ? 1.0 / out.b : 0.0;

  if (!d_points.empty()) {
    const detail::LogLogFit fd = detail::loglog_ols(d_points, "fit_heuristic (D*)");
    out.has_d_fit = true;
    out.d_prefactor = std::exp(fd.intercept);
    out.alpha_from_d = fd.slope != 0.0 ? -1.0 / fd.slope : 0.0;
    out.d_slope_se = fd.slope_se;
  }
  return out;
}

}  // namespace mposim
