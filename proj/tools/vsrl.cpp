// Command-line front end: train, ablate, diagnose, report.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure,
// 3 I/O error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "vsrl/ablation.hpp"
#include "vsrl/checkpoint.hpp"
#include "vsrl/config.hpp"
#include "vsrl/diagnostics.hpp"
#include "vsrl/errors.hpp"
#include "vsrl/report.hpp"
#include "vsrl/textio.hpp"
#include "vsrl/trainer.hpp"

namespace fs = std::filesystem;
using namespace vsrl;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "key = value config file");
  cmd->add_option("-s,--set", args.overrides, "override, e.g. gamma=0.95")
      ->take_all();
}

int cmd_train(const CommonArgs& common, const std::vector<std::uint64_t>& seeds,
              const std::string& resume_path) {
  ExperimentConfig cfg = parse_config(common.config_path, common.overrides);
  const std::vector<std::uint64_t> run_seeds = seeds.empty() ? cfg.seeds : seeds;
  RunOptions options;
  if (!resume_path.empty()) {
    if (run_seeds.size() != 1) {
      throw ConfigError("--resume needs exactly one seed (use --seed)");
    }
    options.resume = load_checkpoint(resume_path);
  }
  bool failed = false;
  for (std::uint64_t seed : run_seeds) {
    const std::string dir =
        (fs::path(cfg.output_dir) / ("seed_" + std::to_string(seed))).string();
    RunResult res = run_training(cfg, seed, dir, options);
    const RunSummary s = summarize_run(res.records, cfg.final_window);
    if (res.failed) {
      failed = true;
      std::cout << "seed " << seed << ": FAILED (" << res.error << ")\n";
    } else {
      std::printf("seed %llu: %zu iterations, final return %.3f, mean |eta| %.4f -> %s\n",
                  static_cast<unsigned long long>(seed), res.records.size(),
                  s.final_return, s.eta_abs_time_avg, dir.c_str());
    }
  }
  return failed ? kExitNumerical : 0;
}

int cmd_ablate(const CommonArgs& common, const std::vector<std::string>& axes,
               const std::string& out_dir, int jobs) {
  ConfigAssignments base;
  if (!common.config_path.empty()) base = read_config_file(common.config_path);
  for (const auto& o : common.overrides) base.push_back(parse_override(o));
  std::vector<GridAxis> grid;
  for (const auto& a : axes) grid.push_back(parse_grid_axis(a));
  // Validate the base before spending compute.
  const ExperimentConfig base_cfg = resolve_config(base);
  const std::string root = out_dir.empty() ? base_cfg.output_dir : out_dir;
  const auto cells = run_ablation(base, grid, root, jobs);
  const std::string report = format_ablation_report(cells);
  std::cout << report;
  fs::create_directories(root);
  std::ofstream(fs::path(root) / "report.txt") << report;
  std::ofstream(fs::path(root) / "report.csv") << format_ablation_csv(cells);
  bool numerical = false;
  bool config = false;
  for (const auto& c : cells) {
    config = config || c.config_error;
    numerical = numerical || c.failures > 0;
  }
  if (config) return kExitConfig;
  return numerical ? kExitNumerical : 0;
}

struct DiagnoseArgs {
  std::string checkpoint;
  std::string what = "eta";
  std::string out;
  int starts = 20;
  int steps = 5000;
  int renorm = 1;
  int points = 41;
  double h_max = 1.0;
  int rollouts = 8;
  std::uint64_t seed = 0;
};

Eigen::VectorXd random_direction(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d[i] = rng.normal();
  return d / d.norm();
}

int cmd_diagnose(const CommonArgs& common, const DiagnoseArgs& a) {
  const ExperimentConfig cfg = parse_config(common.config_path, common.overrides);
  const TrainingCheckpoint ckpt = load_checkpoint(a.checkpoint);
  const auto env = make_env(cfg.env);
  const GaussianPolicy& policy = ckpt.agent.policy;
  const Normalizers& norm = ckpt.normalizers;
  if (policy.mean_spec.input_dim != env->observation_dim()) {
    throw ConfigError("checkpoint does not match the configured environment");
  }
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out, std::ios::trunc);
    if (!file) throw IoError("cannot write '" + a.out + "'");
  }
  std::ostream& out = a.out.empty() ? std::cout : file;

  if (a.what == "eta") {
    Rng rng(a.seed);
    const auto eta = value_estimation_error(
        policy, ckpt.agent.value_spec, ckpt.agent.value, *env, norm,
        cfg.gae.gamma, a.starts, effective_horizon(cfg.gae.gamma), rng);
    out << "start_index,eta\n";
    for (std::size_t i = 0; i < eta.size(); ++i) {
      out << i << ',' << format_real(eta[i]) << '\n';
    }
    const EtaSummary s = summarize_eta(eta);
    std::cerr << "eta mean " << s.mean << ", mean |eta| " << s.abs_mean
              << ", std " << s.std << '\n';
  } else if (a.what == "slice") {
    std::vector<double> grid;
    for (int i = 0; i < a.points; ++i) {
      grid.push_back(a.points == 1 ? 0.0
                                   : -a.h_max + 2.0 * a.h_max * i / (a.points - 1));
    }
    SliceOptions opts;
    opts.rollouts_per_point = a.rollouts;
    opts.seed = a.seed;
    const auto slice = objective_slice(
        policy, *env, norm,
        random_direction(policy.mean_net.values.size(), a.seed + 1), grid, opts);
    out << "h,J\n";
    for (const auto& [h, j] : slice) {
      out << format_real(h) << ',' << format_real(j) << '\n';
    }
  } else if (a.what == "lyapunov") {
    Rng rng(a.seed);
    const Eigen::VectorXd s0 = env->sample_initial(rng);
    const double per_step =
        lyapunov_exponent(closed_loop(*env, policy, norm), env_delta(*env), s0,
                          a.steps, a.renorm);
    out << "lyapunov_per_step,lyapunov_per_time,holder_alpha\n"
        << format_real(per_step) << ',' << format_real(per_step / env->dt())
        << ',' << format_real(holder_alpha(cfg.gae.gamma, per_step)) << '\n';
  } else if (a.what == "holder") {
    SliceOptions opts;
    opts.rollouts_per_point = a.rollouts;
    opts.seed = a.seed;
    opts.discounted = true;
    opts.gamma = cfg.gae.gamma;
    const Eigen::VectorXd dir =
        random_direction(policy.mean_net.values.size(), a.seed + 1);
    std::vector<double> scales;
    for (int i = 0; i < a.points; ++i) {
      scales.push_back(a.h_max * std::pow(10.0, -4.0 * i / std::max(1, a.points - 1)));
    }
    GaussianPolicy probe = policy;
    const SlopeEstimate est = holder_exponent(
        [&](const Eigen::VectorXd& theta) {
          probe.mean_net.values = theta;
          return policy_objective(probe, *env, norm, opts);
        },
        policy.mean_net.values, dir, scales);
    out << "alpha,r_squared,points\n"
        << format_real(est.alpha) << ',' << format_real(est.r_squared) << ','
        << est.scales.size() << '\n';
  } else {
    throw ConfigError("unknown diagnostic '" + a.what +
                      "' (expected eta, slice, lyapunov or holder)");
  }
  return 0;
}

int cmd_report(const std::string& runs_dir, const std::string& quantity,
               const std::string& out, int final_window) {
  const auto runs = load_runs(runs_dir);
  if (runs.empty()) throw IoError("no runs found under '" + runs_dir + "'");
  for (const auto& run : runs) {
    const RunSummary s = summarize_run(run.records, final_window);
    std::printf("%-40s seed %-4llu iterations %-5zu final return %10.3f  mean |eta| %8.4f\n",
                run.run_id.c_str(), static_cast<unsigned long long>(run.seed),
                run.records.size(), s.final_return, s.eta_abs_time_avg);
  }
  if (!out.empty()) {
    emit_plot_data(runs, quantity, out);
    std::cout << "wrote " << out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  // Batch matrices are ~1 MB; keep them off mmap so each step does not fault.
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
  CLI::App app{"vsrl: on-policy policy-gradient laboratory"};
  app.require_subcommand(1);

  CommonArgs train_common;
  std::vector<std::uint64_t> train_seeds;
  std::string resume_path;
  auto* train = app.add_subcommand("train", "train one or more seeds");
  add_common(train, train_common);
  train->add_option("--seed", train_seeds, "seed(s) to run instead of config seeds");
  train->add_option("--resume", resume_path, "checkpoint to continue from");

  CommonArgs ablate_common;
  std::vector<std::string> axes;
  std::string ablate_out;
  int jobs = 1;
  auto* ablate = app.add_subcommand("ablate", "run a parameter grid over seeds");
  add_common(ablate, ablate_common);
  ablate->add_option("-g,--grid", axes, "axis key=v1,v2,...")->take_all();
  ablate->add_option("-o,--out", ablate_out, "output directory");
  ablate->add_option("-j,--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);

  CommonArgs diag_common;
  DiagnoseArgs diag;
  auto* diagnose = app.add_subcommand("diagnose", "eta / slice / lyapunov / holder on a checkpoint");
  add_common(diagnose, diag_common);
  diagnose->add_option("--checkpoint", diag.checkpoint)->required();
  diagnose->add_option("--what", diag.what, "eta, slice, lyapunov or holder");
  diagnose->add_option("-o,--out", diag.out, "CSV output (default stdout)");
  diagnose->add_option("--starts", diag.starts, "eta start states");
  diagnose->add_option("--steps", diag.steps, "lyapunov steps");
  diagnose->add_option("--renorm", diag.renorm, "lyapunov renormalization interval");
  diagnose->add_option("--points", diag.points, "slice / holder points");
  diagnose->add_option("--h-max", diag.h_max, "largest perturbation");
  diagnose->add_option("--rollouts", diag.rollouts, "rollouts per point");
  diagnose->add_option("--seed", diag.seed, "diagnostic seed");

  std::string runs_dir;
  std::string quantity = "mean_return";
  std::string report_out;
  int final_window = 5;
  auto* report = app.add_subcommand("report", "summarize runs and export plot data");
  report->add_option("runs", runs_dir, "directory containing runs")->required();
  report->add_option("-q,--quantity", quantity, "metrics key to export");
  report->add_option("-o,--out", report_out, "long-format CSV path");
  report->add_option("--final-window", final_window, "evaluations averaged as final return");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) return cmd_train(train_common, train_seeds, resume_path);
    if (*ablate) return cmd_ablate(ablate_common, axes, ablate_out, jobs);
    if (*diagnose) return cmd_diagnose(diag_common, diag);
    if (*report) return cmd_report(runs_dir, quantity, report_out, final_window);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
