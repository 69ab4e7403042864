#include "vsrl/ablation.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

#include "vsrl/errors.hpp"
#include "vsrl/textio.hpp"

namespace vsrl {

namespace fs = std::filesystem;

GridAxis parse_grid_axis(const std::string& text) {
  const auto [key, list] = parse_override(text);
  GridAxis axis;
  axis.key = key;
  const char sep = list.find(';') != std::string::npos ? ';' : ',';
  for (auto& v : split(list, sep)) {
    if (!v.empty()) axis.values.push_back(v);
  }
  if (axis.key.empty() || axis.values.empty()) {
    throw ConfigError("grid axis '" + text + "' needs a key and values");
  }
  return axis;
}

std::vector<CellResult> run_ablation(const ConfigAssignments& base,
                                     const std::vector<GridAxis>& grid,
                                     const std::string& out_dir, int jobs) {
  // Enumerate cells in mixed radix, last axis varying fastest.
  std::size_t total = 1;
  for (const auto& axis : grid) total *= axis.values.size();
  std::vector<CellResult> cells(total);
  for (std::size_t k = 0; k < total; ++k) {
    CellResult& cell = cells[k];
    std::size_t rest = k;
    for (std::size_t a = grid.size(); a-- > 0;) {
      const std::size_t n = grid[a].values.size();
      cell.assignment.emplace(cell.assignment.begin(), grid[a].key,
                              grid[a].values[rest % n]);
      rest /= n;
    }
    for (const auto& [key, value] : cell.assignment) {
      if (!cell.label.empty()) cell.label += ' ';
      cell.label += key + "=" + value;
    }
    if (cell.label.empty()) cell.label = "base";
  }

  struct Job {
    std::size_t cell;
    std::size_t run;
    ExperimentConfig cfg;
  };
  std::vector<Job> work;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    ConfigAssignments all = base;
    all.insert(all.end(), cells[c].assignment.begin(), cells[c].assignment.end());
    ExperimentConfig cfg;
    try {
      cfg = resolve_config(all);
    } catch (const ConfigError& e) {
      cells[c].config_error = true;
      cells[c].error = e.what();
      continue;
    }
    for (std::size_t r = 0; r < cfg.seeds.size(); ++r) {
      CellRun run;
      run.seed = cfg.seeds[r];
      run.run_dir = (fs::path(out_dir) / ("cell_" + std::to_string(c)) /
                     ("seed_" + std::to_string(run.seed)))
                        .string();
      cells[c].runs.push_back(run);
      work.push_back({c, r, cfg});
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= work.size()) return;
      const Job& job = work[i];
      CellRun& run = cells[job.cell].runs[job.run];
      try {
        RunResult res = run_training(job.cfg, run.seed, run.run_dir);
        run.failed = res.failed;
        run.error = res.error;
        run.records = std::move(res.records);
        run.summary = summarize_run(run.records, job.cfg.final_window);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        run.failed = true;
        run.error = e.what();
      }
    }
  };
  const int threads = std::max(1, jobs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (auto& cell : cells) {
    std::vector<double> finals;
    std::vector<double> etas;
    for (const auto& run : cell.runs) {
      if (run.failed) {
        cell.failures += 1;
        continue;
      }
      finals.push_back(run.summary.final_return);
      etas.push_back(run.summary.eta_abs_time_avg);
    }
    cell.final_return = mean_std(finals);
    cell.eta_abs = mean_std(etas);
  }
  return cells;
}

std::string format_ablation_report(const std::vector<CellResult>& cells) {
  std::size_t width = 4;
  for (const auto& c : cells) width = std::max(width, c.label.size());
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s  %5s  %24s  %22s\n",
                static_cast<int>(width), "cell", "runs", "final return",
                "mean |eta|");
  out << buf;
  for (const auto& c : cells) {
    if (c.config_error) {
      out << c.label << "  config error: " << c.error << '\n';
      continue;
    }
    const int ok = static_cast<int>(c.runs.size()) - c.failures;
    std::snprintf(buf, sizeof(buf), "%-*s  %2d/%-2d  %11.3f +- %9.3f  %10.4f +- %8.4f\n",
                  static_cast<int>(width), c.label.c_str(), ok,
                  static_cast<int>(c.runs.size()), c.final_return.mean,
                  c.final_return.std, c.eta_abs.mean, c.eta_abs.std);
    out << buf;
    for (const auto& r : c.runs) {
      if (r.failed) out << "    seed " << r.seed << " failed: " << r.error << '\n';
    }
  }
  return out.str();
}

std::string format_ablation_csv(const std::vector<CellResult>& cells) {
  std::ostringstream out;
  out << "cell,runs,failures,final_return_mean,final_return_std,eta_abs_mean,"
         "eta_abs_std\n";
  for (const auto& c : cells) {
    out << '"' << c.label << "\"," << c.runs.size() << ',' << c.failures << ','
        << format_real(c.final_return.mean) << ','
        << format_real(c.final_return.std) << ',' << format_real(c.eta_abs.mean)
        << ',' << format_real(c.eta_abs.std) << '\n';
  }
  return out.str();
}

}  // namespace vsrl
