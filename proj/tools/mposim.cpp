// Command-line front end: run one ensemble, sweep a (p, n) grid, sample
// bitstrings from a checkpointed state, cross-check against the dense
// reference, or fit the peak-entropy scaling from run summaries.

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include <mposim/config.hpp>
#include <mposim/csv.hpp>
#include <mposim/driver.hpp>
#include <mposim/equivalence.hpp>
#include <mposim/mpo.hpp>
#include <mposim/rng.hpp>
#include <mposim/serialize.hpp>

namespace {

// Flag bindings for the CircuitConfig fields; values only apply when the
// flag was actually given, so config-file settings survive unless overridden.
struct ConfigFlags {
  std::size_t n = 0, depth_max = 0, chi = 0, n_samples = 0;
  double p = 0.0, trunc_tol = 0.0;
  std::uint64_t seed = 0;
  bool fast_path = false;

  CLI::Option *o_n = nullptr, *o_depth = nullptr, *o_chi = nullptr, *o_samples = nullptr,
              *o_p = nullptr, *o_tol = nullptr, *o_seed = nullptr, *o_fast = nullptr;
  std::string config_path;

  void attach(CLI::App& app, bool seed_required) {
    app.add_option("--config", config_path, "flat key = value config file")
        ->check(CLI::ExistingFile);
    o_n = app.add_option("--n", n, "number of qubits (even, >= 4)");
    o_depth = app.add_option("--depth-max", depth_max, "number of brickwork layers");
    o_p = app.add_option("--p", p, "two-qubit depolarization rate in [0, 15/16]");
    o_chi = app.add_option("--chi", chi, "bond-dimension cap");
    o_samples = app.add_option("--n-samples", n_samples, "circuit realizations per point");
    o_seed = app.add_option("--seed", seed, "master seed (realization i uses substream i)");
    if (seed_required) o_seed->required();
    o_tol = app.add_option("--trunc-tol", trunc_tol,
                           "relative singular-value floor (0 keeps the exact rank)");
    o_fast = app.add_flag("--fast-path,!--no-fast-path", fast_path,
                          "evolve in mixed-canonical form between snapshots");
  }

  mposim::CircuitConfig resolve() const {
    mposim::CircuitConfig cfg;
    if (!config_path.empty()) cfg = mposim::load_config(config_path);
    if (o_n->count()) cfg.n = n;
    if (o_depth->count()) cfg.depth_max = depth_max;
    if (o_p->count()) cfg.p = p;
    if (o_chi->count()) cfg.chi = chi;
    if (o_samples->count()) cfg.n_samples = n_samples;
    if (o_seed->count()) cfg.master_seed = seed;
    if (o_tol->count()) cfg.trunc_tol = trunc_tol;
    if (o_fast->count()) cfg.fast_path = fast_path;
    return cfg;
  }
};

std::string format_p(double p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

void print_point(const mposim::EnsembleResult& er) {
  std::printf("n=%zu p=%g chi=%zu n_samples=%zu seed=%llu: D*=%zu S*_max=%.6f min_mean_trace=%.6f\n",
              er.cfg.n, er.cfg.p, er.cfg.chi, er.cfg.n_samples,
              static_cast<unsigned long long>(er.cfg.master_seed), er.d_star, er.s_star_max,
              er.min_mean_trace);
}

int cmd_run(const ConfigFlags& flags, const std::string& out_dir, std::size_t threads,
            const std::string& checkpoint, std::size_t checkpoint_index) {
  const mposim::CircuitConfig cfg = flags.resolve();
  cfg.validate();
  const mposim::EnsembleResult er = mposim::run_ensemble(cfg, threads);

  std::filesystem::create_directories(out_dir);
  mposim::write_run_outputs(er, out_dir);
  write_text(out_dir + "/config.txt", mposim::format_config(cfg));
  print_point(er);

  if (!checkpoint.empty()) {
    if (checkpoint_index >= cfg.n_samples)
      throw std::invalid_argument("run: --checkpoint-index must be < n_samples");
    mposim::save_mpo(mposim::evolve_realization(cfg, checkpoint_index), checkpoint);
    std::printf("checkpoint: realization %zu final state -> %s\n", checkpoint_index,
                checkpoint.c_str());
  }
  return 0;
}

int cmd_sweep(const ConfigFlags& flags, const std::vector<std::size_t>& n_list,
              const std::vector<double>& p_list, const std::string& out_dir,
              std::size_t threads) {
  const mposim::CircuitConfig base = flags.resolve();
  std::filesystem::create_directories(out_dir);

  std::ofstream summary(out_dir + "/sweep_summary.csv", std::ios::trunc);
  if (!summary) throw std::runtime_error("cannot open " + out_dir + "/sweep_summary.csv");
  summary << std::setprecision(17)
          << "n,depth_max,p,chi,n_samples,master_seed,trunc_tol,fast_path,"
             "d_star,s_star_max,min_mean_trace\n";

  for (std::size_t n : n_list)
    for (double p : p_list) {
      mposim::CircuitConfig cfg = base;
      cfg.n = n;
      cfg.p = p;
      cfg.validate();

      const std::string point_dir =
          out_dir + "/n" + std::to_string(n) + "_p" + format_p(p);
      std::filesystem::create_directories(point_dir);
      const mposim::EnsembleResult er = mposim::run_ensemble(cfg, threads);
      mposim::write_run_outputs(er, point_dir);
      write_text(point_dir + "/config.txt", mposim::format_config(cfg));
      print_point(er);

      summary << cfg.n << ',' << cfg.depth_max << ',' << cfg.p << ',' << cfg.chi << ','
              << cfg.n_samples << ',' << cfg.master_seed << ',' << cfg.trunc_tol << ','
              << (cfg.fast_path ? 1 : 0) << ',' << er.d_star << ',' << er.s_star_max << ','
              << er.min_mean_trace << "\n";
    }
  return 0;
}

int cmd_sample(const std::string& mpo_path, std::size_t num, std::uint64_t seed) {
  const mposim::Mpo m = mposim::load_mpo(mpo_path);
  mposim::RngStream rng = mposim::RngStream::substream(seed, 0);
  std::string line(m.n, '0');
  for (std::size_t k = 0; k < num; ++k) {
    const mposim::Bitstring x = mposim::sample(m, rng);
    for (std::size_t i = 0; i < m.n; ++i) line[i] = static_cast<char>('0' + x[i]);
    std::printf("%s\n", line.c_str());
  }
  return 0;
}

int cmd_oracle_check(const std::vector<std::size_t>& n_list, const std::vector<double>& p_list,
                     std::size_t depth, std::size_t circuits, std::uint64_t seed) {
  bool all_ok = true;
  for (std::size_t n : n_list)
    for (double p : p_list) {
      mposim::EquivalenceReport worst;
      worst.min_eigenvalue = 1.0;
      for (std::size_t k = 0; k < circuits; ++k) {
        const mposim::EquivalenceReport rep =
            mposim::run_equivalence(n, depth, p, seed + k);
        worst.max_prob_diff = std::max(worst.max_prob_diff, rep.max_prob_diff);
        worst.max_entropy_diff = std::max(worst.max_entropy_diff, rep.max_entropy_diff);
        worst.max_trace_diff = std::max(worst.max_trace_diff, rep.max_trace_diff);
        worst.max_canonical_defect =
            std::max(worst.max_canonical_defect, rep.max_canonical_defect);
        worst.max_hermiticity_defect =
            std::max(worst.max_hermiticity_defect, rep.max_hermiticity_defect);
        worst.min_eigenvalue = std::min(worst.min_eigenvalue, rep.min_eigenvalue);
        worst.gates += rep.gates;
      }
      const bool ok = worst.max_prob_diff <= 1e-9 && worst.max_entropy_diff <= 1e-8 &&
                      worst.max_trace_diff <= 1e-9 && worst.max_canonical_defect <= 1e-8 &&
                      worst.max_hermiticity_defect <= 1e-10 && worst.min_eigenvalue >= -1e-9;
      all_ok = all_ok && ok;
      std::printf("%s n=%zu p=%g circuits=%zu gates=%zu prob=%.2e entropy=%.2e trace=%.2e "
                  "canonical=%.2e hermitian=%.2e min_eig=%.2e\n",
                  ok ? "PASS" : "FAIL", n, p, circuits, worst.gates, worst.max_prob_diff,
                  worst.max_entropy_diff, worst.max_trace_diff, worst.max_canonical_defect,
                  worst.max_hermiticity_defect, worst.min_eigenvalue);
    }
  return all_ok ? 0 : 1;
}

int cmd_fit(const std::vector<std::string>& files) {
  std::vector<std::pair<double, double>> s_points, d_points;
  for (const std::string& path : files) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("fit: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("fit: empty file " + path);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::stringstream row(line);
      for (std::string f; std::getline(row, f, ',');) fields.push_back(f);
      if (fields.size() != 11)
        throw std::runtime_error("fit: malformed summary row in " + path);
      const double p = std::stod(fields[2]);
      const double d_star = std::stod(fields[8]);
      const double s_star = std::stod(fields[9]);
      s_points.emplace_back(p, s_star);
      d_points.emplace_back(p, d_star);
    }
  }
  const mposim::FitResult fit = mposim::fit_heuristic(s_points, d_points);
  std::printf("points: %zu\n", s_points.size());
  std::printf("S*_max = a * p^-b: a=%.6g (log-space se %.2g), b=%.6g (se %.2g)\n", fit.a,
              fit.log_a_se, fit.b, fit.b_se);
  std::printf("alpha from S*_max fit: %.6g\n", fit.alpha_from_s);
  if (fit.has_d_fit)
    std::printf("D* = c * p^-(1/alpha): c=%.6g, alpha=%.6g (slope se %.2g)\n",
                fit.d_prefactor, fit.alpha_from_d, fit.d_slope_se);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"canonical matrix-product simulator for noisy random brickwork circuits"};
  app.require_subcommand(1);

  // run
  CLI::App* run = app.add_subcommand("run", "run one ensemble and write its CSVs");
  ConfigFlags run_flags;
  run_flags.attach(*run, /*seed_required=*/true);
  std::string run_out = "out";
  std::size_t run_threads = 1;
  std::string run_checkpoint;
  std::size_t run_checkpoint_index = 0;
  run->add_option("--out", run_out, "output directory")->capture_default_str();
  run->add_option("--threads", run_threads, "worker threads (results identical for any count)")
      ->capture_default_str();
  run->add_option("--checkpoint", run_checkpoint,
                  "also save one realization's final state to this path");
  run->add_option("--checkpoint-index", run_checkpoint_index,
                  "which realization to checkpoint")
      ->capture_default_str();

  // sweep
  CLI::App* sweep = app.add_subcommand("sweep", "run a grid of ensembles over p and n");
  ConfigFlags sweep_flags;
  sweep_flags.attach(*sweep, /*seed_required=*/true);
  std::vector<std::size_t> sweep_n;
  std::vector<double> sweep_p;
  std::string sweep_out = "sweep";
  std::size_t sweep_threads = 1;
  sweep->add_option("--n-list", sweep_n, "qubit counts")->required()->delimiter(',');
  sweep->add_option("--p-list", sweep_p, "depolarization rates")->required()->delimiter(',');
  sweep->add_option("--out", sweep_out, "output directory")->capture_default_str();
  sweep->add_option("--threads", sweep_threads, "worker threads")->capture_default_str();

  // sample
  CLI::App* smp = app.add_subcommand("sample", "draw bitstrings from a saved state");
  std::string smp_mpo;
  std::size_t smp_num = 1;
  std::uint64_t smp_seed = 0;
  smp->add_option("--mpo", smp_mpo, "checkpoint file")->required()->check(CLI::ExistingFile);
  smp->add_option("--num", smp_num, "number of bitstrings")->capture_default_str();
  smp->add_option("--seed", smp_seed, "sampling seed")->required();

  // oracle-check
  CLI::App* orc = app.add_subcommand("oracle-check",
                                     "compare against the dense reference on small systems");
  std::vector<std::size_t> orc_n{2, 4, 6};
  std::vector<double> orc_p{0.0, 0.1};
  std::size_t orc_depth = 8, orc_circuits = 3;
  std::uint64_t orc_seed = 1;
  orc->add_option("--n-list", orc_n, "qubit counts (exact rank 4^(n/2) each)")
      ->capture_default_str()
      ->delimiter(',');
  orc->add_option("--p-list", orc_p, "depolarization rates")->capture_default_str()->delimiter(',');
  orc->add_option("--depth", orc_depth, "layers per circuit")->capture_default_str();
  orc->add_option("--circuits", orc_circuits, "random circuits per (n, p)")
      ->capture_default_str();
  orc->add_option("--seed", orc_seed, "base seed; circuit k uses seed + k")
      ->capture_default_str();

  // fit
  CLI::App* fit = app.add_subcommand("fit", "fit S*_max = a * p^-b from summary CSVs");
  std::vector<std::string> fit_files;
  fit->add_option("files", fit_files, "summary.csv / sweep_summary.csv paths")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(run_flags, run_out, run_threads, run_checkpoint, run_checkpoint_index);
    if (sweep->parsed())
      return cmd_sweep(sweep_flags, sweep_n, sweep_p, sweep_out, sweep_threads);
    if (smp->parsed()) return cmd_sample(smp_mpo, smp_num, smp_seed);
    if (orc->parsed())
      return cmd_oracle_check(orc_n, orc_p, orc_depth, orc_circuits, orc_seed);
    if (fit->parsed()) return cmd_fit(fit_files);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
