#include "vsrl/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "vsrl/errors.hpp"
#include "vsrl/textio.hpp"

namespace vsrl {

namespace fs = std::filesystem;

RunSummary summarize_run(const std::vector<MetricsRecord>& records,
                         int final_window) {
  std::vector<double> returns;
  std::vector<double> etas;
  for (const auto& rec : records) {
    if (!rec.value("evaluated", false)) continue;
    returns.push_back(rec["mean_return"].get<double>());
    etas.push_back(rec["eta_abs_mean"].get<double>());
  }
  RunSummary s;
  s.evaluations = static_cast<int>(returns.size());
  if (returns.empty()) return s;
  const std::size_t window =
      std::min<std::size_t>(returns.size(), static_cast<std::size_t>(final_window));
  double sum = 0.0;
  for (std::size_t i = returns.size() - window; i < returns.size(); ++i) {
    sum += returns[i];
  }
  s.final_return = sum / static_cast<double>(window);
  s.eta_abs_time_avg = mean_std(etas).mean;
  return s;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  for (double v : values) out.mean += v;
  out.mean /= n;
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / n);
  return out;
}

void emit_plot_data(const std::vector<LabeledRun>& runs,
                    const std::string& quantity, const std::string& path) {
  const auto& keys = metrics_keys();
  if (std::find(keys.begin(), keys.end(), quantity) == keys.end() ||
      quantity == "evaluated") {
    throw ConfigError("unknown quantity '" + quantity + "'");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "run_id,seed,env_steps,value\n";
  std::map<std::int64_t, std::vector<double>> by_step;
  for (const auto& run : runs) {
    for (const auto& rec : run.records) {
      const auto& v = rec.at(quantity);
      if (v.is_null()) continue;
      const auto steps = rec.at("env_steps").get<std::int64_t>();
      const double value = v.get<double>();
      out << run.run_id << ',' << run.seed << ',' << steps << ','
          << format_real(value) << '\n';
      by_step[steps].push_back(value);
    }
  }
  std::string agg_path = path;
  if (agg_path.size() > 4 && agg_path.substr(agg_path.size() - 4) == ".csv") {
    agg_path.resize(agg_path.size() - 4);
  }
  agg_path += "_aggregate.csv";
  std::ofstream agg(agg_path, std::ios::binary | std::ios::trunc);
  if (!agg) throw IoError("cannot write '" + agg_path + "'");
  agg << "env_steps,mean,std,lower,upper,count\n";
  for (const auto& [steps, values] : by_step) {
    const MeanStd m = mean_std(values);
    agg << steps << ',' << format_real(m.mean) << ',' << format_real(m.std)
        << ',' << format_real(m.mean - m.std) << ','
        << format_real(m.mean + m.std) << ',' << values.size() << '\n';
  }
}

std::vector<LabeledRun> load_runs(const std::string& root) {
  std::vector<fs::path> dirs;
  std::error_code ec;
  if (!fs::exists(root, ec)) throw IoError("no such directory '" + root + "'");
  if (fs::exists(fs::path(root) / "metrics.jsonl")) dirs.emplace_back(root);
  for (const auto& entry : fs::recursive_directory_iterator(root, ec)) {
    if (entry.is_regular_file() && entry.path().filename() == "metrics.jsonl" &&
        entry.path().parent_path() != fs::path(root)) {
      dirs.push_back(entry.path().parent_path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<LabeledRun> runs;
  for (const auto& d : dirs) {
    LabeledRun run;
    run.run_id = fs::relative(d, root, ec).generic_string();
    if (run.run_id.empty() || run.run_id == ".") run.run_id = d.filename().string();
    run.records = read_metrics((d / "metrics.jsonl").string());
    const fs::path cfg_path = d / "config.cfg";
    if (fs::exists(cfg_path)) {
      for (const auto& [k, v] : read_config_file(cfg_path.string())) {
        if (k == "seeds") run.seed = std::stoull(v);
      }
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace vsrl
