#ifndef VSRL_REPORT_HPP_
#define VSRL_REPORT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "vsrl/config.hpp"
#include "vsrl/trainer.hpp"

namespace vsrl {

struct RunSummary {
  double final_return = 0.0;     // mean of the last `final_window` evaluations
  double eta_abs_time_avg = 0.0; // mean |eta| over all evaluations
  int evaluations = 0;
};

RunSummary summarize_run(const std::vector<MetricsRecord>& records,
                         int final_window);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

MeanStd mean_std(const std::vector<double>& values);

struct LabeledRun {
  std::string run_id;
  std::uint64_t seed = 0;
  std::vector<MetricsRecord> records;
};

// Long-format `run_id,seed,env_steps,value` rows for every record where
// `quantity` is non-null, plus `<path minus .csv>_aggregate.csv` with
// `env_steps,mean,std,lower,upper,count` (one standard deviation band).
// Throws ConfigError for quantities outside the metrics schema.
void emit_plot_data(const std::vector<LabeledRun>& runs,
                    const std::string& quantity, const std::string& path);

// Loads every run directory (a directory holding metrics.jsonl) below `root`,
// sorted by path.
std::vector<LabeledRun> load_runs(const std::string& root);

}  // namespace vsrl

#endif  // VSRL_REPORT_HPP_
