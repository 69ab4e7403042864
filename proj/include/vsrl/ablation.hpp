#ifndef VSRL_ABLATION_HPP_
#define VSRL_ABLATION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "vsrl/config.hpp"
#include "vsrl/report.hpp"
#include "vsrl/trainer.hpp"

namespace vsrl {

// One named parameter and the values it sweeps over.
struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};

// "key=v1,v2,..." (use ';' between values when they contain commas).
GridAxis parse_grid_axis(const std::string& text);

struct CellRun {
  std::uint64_t seed = 0;
  std::string run_dir;
  bool failed = false;
  std::string error;
  RunSummary summary;
  std::vector<MetricsRecord> records;
};

struct CellResult {
  std::string label;  // "key=value key=value"
  ConfigAssignments assignment;
  bool config_error = false;
  std::string error;
  std::vector<CellRun> runs;
  MeanStd final_return;  // over successful runs
  MeanStd eta_abs;       // over successful runs
  int failures = 0;
};

// Cartesian product of the axes, each cell run for every seed of its
// resolved config. Cells are laid out as <out_dir>/cell_<k>/seed_<s>. Runs
// execute on `jobs` worker threads; results do not depend on `jobs`.
// Failures are reported per cell and never abort the grid.
std::vector<CellResult> run_ablation(const ConfigAssignments& base,
                                     const std::vector<GridAxis>& grid,
                                     const std::string& out_dir, int jobs = 1);

// Fixed-width table: cell, runs, final return mean +- std, mean |eta|.
std::string format_ablation_report(const std::vector<CellResult>& cells);
// Same content as CSV.
std::string format_ablation_csv(const std::vector<CellResult>& cells);

}  // namespace vsrl

#endif  // VSRL_ABLATION_HPP_
