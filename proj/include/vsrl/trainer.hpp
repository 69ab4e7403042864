#ifndef VSRL_TRAINER_HPP_
#define VSRL_TRAINER_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "vsrl/algorithms.hpp"
#include "vsrl/checkpoint.hpp"
#include "vsrl/config.hpp"
#include "vsrl/envs.hpp"
#include "vsrl/rollout.hpp"

namespace vsrl {

using MetricsRecord = nlohmann::ordered_json;

// Keys of every metrics record, in emission order. Values that are not
// measured on a given iteration (evaluation fields between evaluations, the
// training return when no episode finished) are JSON null.
const std::vector<std::string>& metrics_keys();

// One seeded training run: collect -> update -> (periodically) evaluate.
class Trainer {
 public:
  Trainer(ExperimentConfig cfg, std::uint64_t seed);
  Trainer(ExperimentConfig cfg, std::uint64_t seed,
          const TrainingCheckpoint& resume);

  bool finished() const { return iteration_ >= cfg_.iterations(); }
  std::int64_t iteration() const { return iteration_; }

  // Runs one iteration and returns its metrics record.
  MetricsRecord step();

  TrainingCheckpoint checkpoint() const;

  const ExperimentConfig& config() const { return cfg_; }
  const AgentState& agent() const { return agent_; }
  const Normalizers& normalizers() const { return normalizers_; }
  const Env& env() const { return *env_; }

 private:
  bool is_eval_iteration(std::int64_t iteration) const;

  ExperimentConfig cfg_;
  std::uint64_t seed_;
  std::shared_ptr<const Env> env_;
  VecEnv venv_;
  AgentState agent_;
  Normalizers normalizers_;
  Rng rng_;
  std::int64_t iteration_ = 0;
  std::int64_t env_steps_ = 0;
  std::int64_t policy_steps_ = 0;
  std::int64_t value_steps_ = 0;
};

struct RunResult {
  std::string run_dir;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::vector<MetricsRecord> records;
};

struct RunOptions {
  // Continue from this checkpoint; metrics are appended.
  std::optional<TrainingCheckpoint> resume;
  // Stop (with a checkpoint) once this many iterations are done; -1 = all.
  std::int64_t stop_after_iteration = -1;
};

// Writes <run_dir>/metrics.jsonl (flushed per iteration), timing.csv (wall
// time, kept out of the metrics so they stay byte-reproducible), config.cfg,
// checkpoint.vsrl at evaluation points, final.vsrl at the end and
// status.json. A NumericalError marks the run failed and keeps the partial
// metrics; I/O failures propagate as IoError.
RunResult run_training(const ExperimentConfig& cfg, std::uint64_t seed,
                       const std::string& run_dir, const RunOptions& options = {});

std::vector<MetricsRecord> read_metrics(const std::string& path);

}  // namespace vsrl

#endif  // VSRL_TRAINER_HPP_
