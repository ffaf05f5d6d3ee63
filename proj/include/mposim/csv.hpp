#pragma once

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "driver.hpp"

namespace mposim {

namespace detail {

inline std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot open " + path + " for writing");
  out << std::setprecision(17);
  return out;
}

}  // namespace detail

// One row per (realization, depth, bond); trace and discarded weight are
// per-(realization, depth) and repeat along the bond column.
inline void write_trajectories_csv(const EnsembleResult& er, const std::string& path) {
  std::ofstream out = detail::open_csv(path);
  out << "realization,depth,bond,entropy,trace,discarded_weight\n";
  for (const Trajectory& tr : er.trajectories)
    for (std::size_t t = 0; t < tr.depths.size(); ++t)
      for (std::size_t l = 0; l < tr.depths[t].entropy.size(); ++l)
        out << tr.realization << ',' << (t + 1) << ',' << (l + 1) << ','
            << tr.depths[t].entropy[l] << ',' << tr.depths[t].trace << ','
            << tr.depths[t].discarded << "\n";
}

// Ensemble-averaged entropy profile, one row per (depth, bond).
inline void write_aggregate_csv(const EnsembleResult& er, const std::string& path) {
  std::ofstream out = detail::open_csv(path);
  out << "depth,bond,mean_entropy\n";
  for (std::size_t t = 0; t < er.mean_entropy.size(); ++t)
    for (std::size_t l = 0; l < er.mean_entropy[t].size(); ++l)
      out << (t + 1) << ',' << (l + 1) << ',' << er.mean_entropy[t][l] << "\n";
}

// The per-depth curve the experiments read off: max-of-mean entropy and the
// ensemble-mean trace.
inline void write_smax_csv(const EnsembleResult& er, const std::string& path) {
  std::ofstream out = detail::open_csv(path);
  out << "depth,s_max,mean_trace\n";
  for (std::size_t t = 0; t < er.s_max.size(); ++t)
    out << (t + 1) << ',' << er.s_max[t] << ',' << er.mean_trace[t] << "\n";
}

// One-row run summary; the fit tool consumes these across runs.
inline void write_summary_csv(const EnsembleResult& er, const std::string& path) {
  std::ofstream out = detail::open_csv(path);
  out << "n,depth_max,p,chi,n_samples,master_seed,trunc_tol,fast_path,"
         "d_star,s_star_max,min_mean_trace\n";
  const CircuitConfig& c = er.cfg;
  out << c.n << ',' << c.depth_max << ',' << c.p << ',' << c.chi << ',' << c.n_samples
      << ',' << c.master_seed << ',' << c.trunc_tol << ',' << (c.fast_path ? 1 : 0) << ','
      << er.d_star << ',' << er.s_star_max << ',' << er.min_mean_trace << "\n";
}

// Companion gnuplot script: entanglement growth/decay curve plus the averaged
// profile at the optimal depth, reading the CSVs written next to it.
inline void write_plot_script(const EnsembleResult& er, const std::string& path) {
  std::ofstream out = detail::open_csv(path);
  out << "set datafile separator ','\n"
         "set key autotitle columnhead\n"
         "set terminal pngcairo size 1200,500\n"
         "set output 'entropy.png'\n"
         "set multiplot layout 1,2\n"
         "set xlabel 'depth'\n"
         "set ylabel 'S_max (bits)'\n"
         "set title 'max-of-mean entanglement vs depth'\n"
         "plot 'smax.csv' using 1:2 with linespoints pt 7\n"
         "set xlabel 'bond'\n"
         "set ylabel 'mean S_l (bits)'\n"
         "set title 'profile at D* = "
      << er.d_star
      << "'\n"
         "plot 'aggregate.csv' using 2:($1 == "
      << er.d_star
      << " ? $3 : 1/0) with linespoints pt 7\n"
         "unset multiplot\n";
}

// Write the full set into a directory (no trailing slash needed).
inline void write_run_outputs(const EnsembleResult& er, const std::string& dir) {
  write_trajectories_csv(er, dir + "/trajectories.csv");
  write_aggregate_csv(er, dir + "/aggregate.csv");
  write_smax_csv(er, dir + "/smax.csv");
  write_summary_csv(er, dir + "/summary.csv");
  write_plot_script(er, dir + "/plot.gp");
}

}  // namespace mposim
