#include "vsrl/trainer.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vsrl/diagnostics.hpp"
#include "vsrl/errors.hpp"

namespace vsrl {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kEnvStream = 2;
constexpr std::uint64_t kEvalStream = 3;
constexpr std::uint64_t kEtaStream = 4;

nlohmann::json nullable(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

const std::vector<std::string>& metrics_keys() {
  static const std::vector<std::string> keys = {
      "iteration",       "env_steps",       "policy_steps",
      "value_steps",     "policy_steps_iter", "value_steps_iter",
      "policy_loss",     "value_loss_pre",  "value_loss_post",
      "policy_grad_norm", "value_grad_norm", "max_ratio",
      "min_ratio",       "clip_fraction",   "policy_kl",
      "entropy",         "train_return",    "evaluated",
      "mean_return",     "eta_mean",        "eta_abs_mean",
      "eta_std"};
  return keys;
}

Trainer::Trainer(ExperimentConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      seed_(seed),
      env_(make_env(cfg_.env)),
      venv_(env_, cfg_.num_envs, mix_seed(seed, kEnvStream)),
      agent_(make_agent(env_->observation_dim(), env_->action_dim(),
                        cfg_.policy_hidden, cfg_.value_hidden, seed,
                        cfg_.policy_lr(), cfg_.value_lr())),
      normalizers_(env_->observation_dim(), cfg_.num_envs, cfg_.gae.gamma,
                   cfg_.normalize_observations, cfg_.normalize_rewards),
      rng_(Rng::derive(seed, kTrainStream)) {
  cfg_.validate();
}

Trainer::Trainer(ExperimentConfig cfg, std::uint64_t seed,
                 const TrainingCheckpoint& resume)
    : Trainer(std::move(cfg), seed) {
  if (resume.agent.policy.mean_spec != agent_.policy.mean_spec ||
      resume.agent.value_spec != agent_.value_spec) {
    throw IoError("checkpoint networks do not match the configuration");
  }
  agent_ = resume.agent;
  normalizers_ = resume.normalizers;
  rng_.deserialize(resume.rng_state);
  venv_.deserialize(resume.venv_state);
  iteration_ = resume.iteration;
  env_steps_ = resume.env_steps;
  policy_steps_ = resume.policy_steps;
  value_steps_ = resume.value_steps;
}

bool Trainer::is_eval_iteration(std::int64_t iteration) const {
  return iteration % cfg_.eval_interval == 0 || iteration == cfg_.iterations();
}

MetricsRecord Trainer::step() {
  const RolloutBatch batch =
      collect_rollout(agent_.policy, agent_.value_spec, agent_.value, venv_,
                      cfg_.horizon_per_env(), normalizers_, rng_);
  const IterationStats stats =
      cfg_.algorithm == Algorithm::kVpg
          ? vpg_update(agent_, batch, cfg_.resolved_vpg())
          : ppo_update(agent_, batch, cfg_.resolved_ppo(), rng_);

  iteration_ += 1;
  env_steps_ += batch.size();
  policy_steps_ += stats.policy_steps;
  value_steps_ += stats.value_steps;

  std::optional<double> train_return;
  if (!batch.episode_returns.empty()) {
    double sum = 0.0;
    for (double r : batch.episode_returns) sum += r;
    train_return = sum / static_cast<double>(batch.episode_returns.size());
  }

  const bool evaluated = is_eval_iteration(iteration_);
  std::optional<double> mean_return;
  std::optional<EtaSummary> eta;
  if (evaluated) {
    const auto it = static_cast<std::uint64_t>(iteration_);
    mean_return = evaluate_return(agent_.policy, *env_, normalizers_,
                                  cfg_.eval_episodes,
                                  mix_seed(seed_, kEvalStream, it));
    Rng eta_rng(mix_seed(seed_, kEtaStream, it));
    eta = summarize_eta(value_estimation_error(
        agent_.policy, agent_.value_spec, agent_.value, *env_,
        normalizers_, cfg_.gae.gamma, cfg_.eta_starts,
        effective_horizon(cfg_.gae.gamma), eta_rng));
  }

  MetricsRecord rec;
  rec["iteration"] = iteration_;
  rec["env_steps"] = env_steps_;
  rec["policy_steps"] = policy_steps_;
  rec["value_steps"] = value_steps_;
  rec["policy_steps_iter"] = stats.policy_steps;
  rec["value_steps_iter"] = stats.value_steps;
  rec["policy_loss"] = stats.policy_loss;
  rec["value_loss_pre"] = stats.value_loss_pre;
  rec["value_loss_post"] = stats.value_loss_post;
  rec["policy_grad_norm"] = stats.policy_grad_norm;
  rec["value_grad_norm"] = stats.value_grad_norm;
  rec["max_ratio"] = stats.ratio.max_ratio;
  rec["min_ratio"] = stats.ratio.min_ratio;
  rec["clip_fraction"] = stats.ratio.clip_fraction;
  rec["policy_kl"] = stats.policy_kl;
  rec["entropy"] = stats.entropy;
  rec["train_return"] = nullable(train_return);
  rec["evaluated"] = evaluated;
  rec["mean_return"] = nullable(mean_return);
  rec["eta_mean"] = eta ? nlohmann::json(eta->mean) : nlohmann::json(nullptr);
  rec["eta_abs_mean"] =
      eta ? nlohmann::json(eta->abs_mean) : nlohmann::json(nullptr);
  rec["eta_std"] = eta ? nlohmann::json(eta->std) : nlohmann::json(nullptr);
  return rec;
}

TrainingCheckpoint Trainer::checkpoint() const {
  TrainingCheckpoint c;
  c.iteration = iteration_;
  c.env_steps = env_steps_;
  c.policy_steps = policy_steps_;
  c.value_steps = value_steps_;
  c.agent = agent_;
  c.normalizers = normalizers_;
  c.rng_state = rng_.serialize();
  c.venv_state = venv_.serialize();
  return c;
}

RunResult run_training(const ExperimentConfig& cfg, std::uint64_t seed,
                       const std::string& run_dir, const RunOptions& options) {
  RunResult result;
  result.run_dir = run_dir;
  result.seed = seed;
  const fs::path dir(run_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory '" + run_dir + "'");

  const bool resuming = options.resume.has_value();
  ExperimentConfig run_cfg = cfg;
  run_cfg.seeds = {seed};
  run_cfg.output_dir = run_dir;
  write_file(dir / "config.cfg", dump_config(run_cfg));

  const auto mode = resuming ? std::ios::app : std::ios::trunc;
  std::ofstream metrics(dir / "metrics.jsonl", std::ios::binary | mode);
  std::ofstream timing(dir / "timing.csv", std::ios::binary | mode);
  if (!metrics || !timing) {
    throw IoError("cannot open metrics files in '" + run_dir + "'");
  }
  if (!resuming) timing << "iteration,wall_seconds\n";

  auto write_status = [&](const std::string& status, const std::string& error) {
    nlohmann::ordered_json s;
    s["status"] = status;
    s["seed"] = seed;
    s["error"] = error;
    write_file(dir / "status.json", s.dump() + "\n");
  };

  try {
    Trainer trainer = resuming ? Trainer(cfg, seed, *options.resume)
                               : Trainer(cfg, seed);
    while (!trainer.finished()) {
      if (options.stop_after_iteration >= 0 &&
          trainer.iteration() >= options.stop_after_iteration) {
        break;
      }
      const auto start = std::chrono::steady_clock::now();
      MetricsRecord rec = trainer.step();
      const double wall = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
      metrics << rec.dump() << '\n' << std::flush;
      timing << trainer.iteration() << ',' << wall << '\n' << std::flush;
      if (!metrics) throw IoError("failed writing metrics in '" + run_dir + "'");
      if (rec["evaluated"].get<bool>()) {
        save_checkpoint(trainer.checkpoint(), (dir / "checkpoint.vsrl").string());
      }
      result.records.push_back(std::move(rec));
    }
    save_checkpoint(trainer.checkpoint(),
                    (dir / (trainer.finished() ? "final.vsrl" : "checkpoint.vsrl"))
                        .string());
    write_status(trainer.finished() ? "completed" : "stopped", "");
  } catch (const NumericalError& e) {
    result.failed = true;
    result.error = e.what();
    write_status("failed", e.what());
  }
  return result;
}

std::vector<MetricsRecord> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metrics file '" + path + "'");
  std::vector<MetricsRecord> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    try {
      out.push_back(MetricsRecord::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("malformed metrics line in '" + path + "': " + e.what());
    }
  }
  return out;
}

}  // namespace vsrl
