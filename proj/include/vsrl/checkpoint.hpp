#ifndef VSRL_CHECKPOINT_HPP_
#define VSRL_CHECKPOINT_HPP_

#include <cstdint>
#include <string>

#include "vsrl/algorithms.hpp"
#include "vsrl/rollout.hpp"

namespace vsrl {

inline constexpr const char* kCheckpointHeader = "VSRL1";

// Everything needed to continue a run bit-exactly.
struct TrainingCheckpoint {
  std::int64_t iteration = 0;
  std::int64_t env_steps = 0;
  std::int64_t policy_steps = 0;
  std::int64_t value_steps = 0;
  AgentState agent;
  Normalizers normalizers;
  std::string rng_state;
  std::string venv_state;
};

// Text format, one token group per line:
//
//   VSRL1
//   counters <iteration> <env_steps> <policy_steps> <value_steps>
//   network <name>            (policy_mean, value)
//   dims <input> <hidden...> <output>
//   values <n>                followed by n lines, one real each
//   vector log_std <n>        followed by n lines
//   adam <name> <steps> <lr> <n>   followed by 2n lines (first, second moment)
//   text <name> <k>           followed by k opaque lines
//   end
//
// Reals use 17 significant digits so a save/load/save cycle is byte-exact.
std::string serialize_checkpoint(const TrainingCheckpoint& ckpt);
TrainingCheckpoint deserialize_checkpoint(const std::string& text);

void save_checkpoint(const TrainingCheckpoint& ckpt, const std::string& path);
// Throws IoError on a missing file, wrong header or truncated content.
TrainingCheckpoint load_checkpoint(const std::string& path);

}  // namespace vsrl

#endif  // VSRL_CHECKPOINT_HPP_
