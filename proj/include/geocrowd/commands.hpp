#pragma once

#include <atomic>
#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "geocrowd/config.hpp"
#include "geocrowd/datagen.hpp"
#include "geocrowd/harness.hpp"
#include "geocrowd/report.hpp"

namespace geocrowd {

namespace fs = std::filesystem;

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRunFailed = 1;
inline constexpr int kExitUsage = 2;

// Writes through a temporary sibling and renames, so readers never see a
// half-written file.
inline void write_file_atomic(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

// GEOCROWD_SEED, when set, replaces the configured seed list with one seed.
inline std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv("GEOCROWD_SEED");
  if (!v || !*v) return std::nullopt;
  return detail::parse_seed(v);
}

struct GenerateRequest {
  std::string config_path;
  std::string out_dir = "scenario";
};

inline int cmd_generate(const GenerateRequest& req, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  Scenario s;
  int skipped = 0;
  try {
    cfg = load_config(req.config_path);
    if (auto env = seed_from_env()) cfg.seeds = {*env};
    cfg.scenario.seed = cfg.seeds.front();
    s = build_scenario(cfg, cfg.seeds.front(), &skipped);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  if (skipped) err << "warning: skipped " << skipped << " malformed check-in lines\n";
  fs::path dir(req.out_dir);
  cfg.seeds = {cfg.scenario.seed};
  write_file_atomic(dir / "workers.csv", [&](std::ostream& o) { write_workers(o, s.workers); });
  write_file_atomic(dir / "tasks.csv", [&](std::ostream& o) { write_tasks(o, s.tasks); });
  write_file_atomic(dir / "manifest.txt", [&](std::ostream& o) { write_config(o, cfg); });
  out << "wrote " << s.workers.size() << " workers and " << s.tasks.size() << " tasks over "
      << s.slots << " slots to " << dir.string() << '\n';
  return kExitOk;
}

struct Sweep {
  std::string param;
  std::vector<std::string> values;
};

// "name=v1,v2,..." where range-valued parameters use lo:hi per value.
inline Sweep parse_sweep(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos) throw std::invalid_argument("sweep must look like name=v1,v2,...");
  Sweep s{detail::trim(spec.substr(0, eq)), detail::split_list(spec.substr(eq + 1))};
  if (s.param.empty()) throw std::invalid_argument("sweep parameter name is empty");
  if (s.values.empty()) throw std::invalid_argument("sweep '" + s.param + "' has no values");
  return s;
}

struct RunRequest {
  std::optional<std::string> config_path;
  std::string out_dir = "results";
  std::vector<std::string> algorithms;
  std::optional<std::string> sweep;
  std::optional<std::string> seeds;
  std::optional<std::string> geometry;
  std::optional<std::string> scenario_dir;  // pre-generated workers.csv / tasks.csv
  int jobs = 1;
};

inline std::string run_id_for(std::string_view alg, const Sweep& sweep, const std::string& value,
                              std::uint64_t seed) {
  std::string id(alg);
  if (sweep.param != "none") {
    std::string v;
    for (char ch : value) v += ch == ':' ? std::string("to") : std::string(1, ch);
    id += "." + sweep.param + "-" + v;
  }
  id += ".s" + std::to_string(seed);
  for (auto& ch : id) {
    bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' || ch == '_';
    if (!ok) ch = '_';
  }
  return id;
}

inline int cmd_run(const RunRequest& req, std::ostream& out, std::ostream& err) {
  ExperimentConfig base;
  std::vector<Algorithm> algorithms;
  Sweep sweep{"none", {"-"}};
  std::optional<Scenario> fixed;
  try {
    if (req.config_path) base = load_config(*req.config_path);
    else base.seeds = {base.scenario.seed};
    std::vector<std::string> names = req.algorithms.empty() ? base.algorithms : req.algorithms;
    if (names.empty()) {
      for (auto [a, n] : kAlgorithms) names.emplace_back(n);
    }
    for (const auto& n : names) {
      if (auto a = find_algorithm(n)) {
        algorithms.push_back(*a);
      } else {
        err << "error: unknown algorithm '" << n << "'\nknown algorithms: " << algorithm_registry()
            << '\n';
        return kExitUsage;
      }
    }
    if (req.seeds) base.seeds = parse_seeds(*req.seeds);
    if (auto env = seed_from_env()) base.seeds = {*env};
    if (req.geometry) base.run.geometry = parse_geometry(*req.geometry);
    if (req.sweep) {
      sweep = parse_sweep(*req.sweep);
      for (const auto& v : sweep.values) {
        ExperimentConfig probe = base;
        apply_setting(probe, sweep.param, v);
        if (sweep.param == "seed" || sweep.param == "seeds" || sweep.param == "algorithms") {
          throw std::invalid_argument("'" + sweep.param + "' cannot be swept");
        }
        validate_config(probe.scenario);
      }
    }
    if (req.scenario_dir) {
      if (req.sweep) throw std::invalid_argument("--sweep cannot be combined with --scenario");
      fs::path dir(*req.scenario_dir);
      std::ifstream wf(dir / "workers.csv"), tf(dir / "tasks.csv");
      if (!wf || !tf) {
        throw std::runtime_error("scenario directory '" + dir.string() +
                                 "' needs workers.csv and tasks.csv");
      }
      Scenario s;
      s.workers = read_workers(wf, base.scenario.open_slots);
      s.tasks = read_tasks(tf);
      normalize(s);
      fixed = std::move(s);
    }
    if (req.jobs < 1) throw std::invalid_argument("--jobs must be >= 1");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  struct Group {
    std::size_t value_index;
    std::uint64_t seed;
  };
  std::vector<Group> groups;
  for (std::size_t v = 0; v < sweep.values.size(); ++v) {
    for (auto seed : base.seeds) groups.push_back({v, seed});
  }
  const std::size_t na = algorithms.size();
  std::vector<std::optional<MetricsRow>> rows(groups.size() * na);
  std::vector<std::string> failures(groups.size() * na);
  fs::path dir(req.out_dir);
  std::string distribution = fixed ? "FILE"
                             : uses_checkins(base) ? "CHECKIN"
                                                   : std::string(to_string(base.scenario.distribution));
  std::mutex log_mutex;

  auto run_group = [&](std::size_t g) {
    const Group& grp = groups[g];
    const std::string& value = sweep.values[grp.value_index];
    ExperimentConfig cfg = base;
    if (sweep.param != "none") apply_setting(cfg, sweep.param, value);
    cfg.run.seed = grp.seed;
    std::optional<Scenario> scenario;
    std::string scenario_error;
    try {
      scenario = fixed ? *fixed : build_scenario(cfg, grp.seed);
    } catch (const std::exception& e) {
      scenario_error = e.what();
    }
    for (std::size_t a = 0; a < na; ++a) {
      std::string id = run_id_for(to_string(algorithms[a]), sweep, value, grp.seed);
      std::size_t slot = g * na + a;
      if (!scenario) {
        failures[slot] = id + ": scenario: " + scenario_error;
        continue;
      }
      try {
        RunResult r = run(algorithms[a], *scenario, cfg.run);
        write_file_atomic(dir / "events" / (id + ".log"),
                          [&](std::ostream& o) { write_event_log(o, r.events); });
        MetricsRow row{id, std::string(to_string(algorithms[a])), distribution, sweep.param,
                       value, grp.seed, r.metrics.avg_moving_distance, r.metrics.finished,
                       r.metrics.confident_finished, r.metrics.running_time};
        rows[slot] = row;
        std::lock_guard lock(log_mutex);
        out << id << ": finished=" << row.finished << " confident=" << row.confident_finished
            << '\n';
      } catch (const std::exception& e) {
        failures[slot] = id + ": " + e.what();
        std::lock_guard lock(log_mutex);
        err << "run failed: " << failures[slot] << '\n';
      }
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t g; (g = next.fetch_add(1)) < groups.size();) run_group(g);
  };
  std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(req.jobs), groups.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<MetricsRow> done;
  std::vector<std::string> failed;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i]) done.push_back(*rows[i]);
    if (!failures[i].empty()) failed.push_back(failures[i]);
  }
  try {
    write_file_atomic(dir / "metrics.csv", [&](std::ostream& o) { write_metrics(o, done); });
    write_file_atomic(dir / "failures.txt", [&](std::ostream& o) {
      for (const auto& f : failed) o << f << '\n';
    });
    ExperimentConfig echo = base;
    write_file_atomic(dir / "manifest.txt", [&](std::ostream& o) {
      write_config(o, echo);
      o << "# run\n";
      o << "algorithms_run = ";
      for (std::size_t a = 0; a < na; ++a) o << (a ? "," : "") << to_string(algorithms[a]);
      o << "\nsweep = " << sweep.param << "=";
      for (std::size_t v = 0; v < sweep.values.size(); ++v) o << (v ? "," : "") << sweep.values[v];
      o << "\nscenario = " << (req.scenario_dir ? *req.scenario_dir : "generated") << '\n';
    });
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRunFailed;
  }
  out << done.size() << " runs written to " << (dir / "metrics.csv").string();
  if (!failed.empty()) out << ", " << failed.size() << " failed (see failures.txt)";
  out << '\n';
  return failed.empty() ? kExitOk : kExitRunFailed;
}

struct ReportRequest {
  std::string metrics_path;
  std::optional<std::string> out_dir;  // defaults to the metrics file's directory
};

inline int cmd_report(const ReportRequest& req, std::ostream& out, std::ostream& err) {
  std::vector<MetricsRow> rows;
  try {
    std::ifstream in(req.metrics_path);
    if (!in) throw std::runtime_error("cannot open metrics file '" + req.metrics_path + "'");
    rows = read_metrics(in);
    if (rows.empty()) throw std::runtime_error("metrics file '" + req.metrics_path + "' has no rows");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  fs::path dir = req.out_dir ? fs::path(*req.out_dir)
                             : fs::path(req.metrics_path).parent_path() / "report";
  auto summaries = summarize(rows);
  std::ostringstream tables;
  for (const auto& s : summaries) {
    for (std::size_t m = 0; m < kMetrics.size(); ++m) {
      write_file_atomic(dir / (s.param + "_" + kMetrics[m].key + ".svg"),
                        [&](std::ostream& o) { write_svg_chart(o, s, m); });
    }
    std::ostringstream t;
    write_table(t, s);
    write_file_atomic(dir / (s.param + "_table.txt"), [&](std::ostream& o) { o << t.str(); });
    tables << t.str() << '\n';
  }
  std::ostringstream grades;
  write_grades(grades, rows);
  write_file_atomic(dir / "grades.txt", [&](std::ostream& o) { o << grades.str(); });
  out << tables.str() << grades.str();
  return kExitOk;
}

}  // namespace geocrowd
