#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "geocrowd/datagen.hpp"
#include "geocrowd/harness.hpp"

namespace geocrowd {

// Everything a run needs besides the algorithm list: scenario generation
// parameters, algorithm tuning and (optionally) real check-in inputs.
struct ExperimentConfig {
  ScenarioConfig scenario;
  RunOptions run;
  std::vector<std::string> algorithms;
  std::vector<std::uint64_t> seeds;
  std::string worker_checkins;
  std::string task_checkins;
  BoundingBox bbox;
};

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    return to_real(trim(v), key.c_str());
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("'" + key + "': expected a number, got '" + v + "'");
  }
}

inline int parse_int(const std::string& key, const std::string& v) {
  try {
    return to_int(trim(v), key.c_str());
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("'" + key + "': expected an integer, got '" + v + "'");
  }
}

inline std::uint64_t parse_seed(const std::string& v) {
  std::size_t pos = 0;
  unsigned long long s = 0;
  try {
    s = std::stoull(trim(v), &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != trim(v).size() || trim(v)[0] == '-') {
    throw std::invalid_argument("bad seed '" + v + "'");
  }
  return s;
}

// Ranges are written "lo,hi" in config files and "lo:hi" in sweep lists; a
// single number means lo = hi.
inline Range parse_range(const std::string& key, const std::string& v) {
  auto sep = v.find_first_of(",:");
  if (sep == std::string::npos) {
    double x = parse_real(key, v);
    return {x, x};
  }
  Range r{parse_real(key, v.substr(0, sep)), parse_real(key, v.substr(sep + 1))};
  if (r.lo > r.hi) throw std::invalid_argument("'" + key + "': lo > hi in '" + v + "'");
  return r;
}

}  // namespace detail

inline std::vector<std::uint64_t> parse_seeds(const std::string& list) {
  std::vector<std::uint64_t> out;
  for (const auto& s : detail::split_list(list)) out.push_back(detail::parse_seed(s));
  if (out.empty()) throw std::invalid_argument("empty seed list");
  return out;
}

// Applies one setting. Used for config files and for sweep values alike.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  auto& sc = cfg.scenario;
  auto& ro = cfg.run;
  if (key == "slots") sc.slots = parse_int(key, value);
  else if (key == "m") sc.m = parse_int(key, value);
  else if (key == "n") sc.n = parse_int(key, value);
  else if (key == "distribution") sc.distribution = parse_distribution(trim(value));
  else if (key == "rt") sc.rt = parse_range(key, value);
  else if (key == "b") sc.b = parse_range(key, value);
  else if (key == "q") sc.q = parse_range(key, value);
  else if (key == "r") sc.r = parse_range(key, value);
  else if (key == "c") sc.c = parse_range(key, value);
  else if (key == "a") sc.a = parse_range(key, value);
  else if (key == "speed") sc.speed = parse_real(key, value);
  else if (key == "open_slots") sc.open_slots = parse_int(key, value);
  else if (key == "seed" || key == "seeds") {
    cfg.seeds = parse_seeds(value);
    sc.seed = cfg.seeds.front();
  }
  else if (key == "geometry") ro.geometry = parse_geometry(trim(value));
  else if (key == "epsilon") ro.rdb_epsilon = parse_real(key, value);
  else if (key == "delta") ro.rdb_delta = parse_real(key, value);
  else if (key == "leaf_size") ro.dc_leaf_size = parse_int(key, value);
  else if (key == "max_set_size") ro.gt_max_set_size = parse_int(key, value);
  else if (key == "candidate_limit") ro.gt_candidate_limit = parse_int(key, value);
  else if (key == "prefix_len") ro.prs_prefix = parse_int(key, value);
  else if (key == "task_limit") ro.online_task_limit = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "cell_side") ro.cell_side = parse_real(key, value);
  else if (key == "algorithms") cfg.algorithms = split_list(value);
  else if (key == "worker_checkins") cfg.worker_checkins = trim(value);
  else if (key == "task_checkins") cfg.task_checkins = trim(value);
  else if (key == "lat_min") cfg.bbox.lat_min = parse_real(key, value);
  else if (key == "lat_max") cfg.bbox.lat_max = parse_real(key, value);
  else if (key == "lon_min") cfg.bbox.lon_min = parse_real(key, value);
  else if (key == "lon_max") cfg.bbox.lon_max = parse_real(key, value);
  else throw std::invalid_argument("unknown setting '" + key + "'");
}

// Flat "key = value" lines; '#' starts a comment.
inline ExperimentConfig parse_config(std::istream& in, const std::string& origin = "config") {
  ExperimentConfig cfg;
  cfg.seeds = {cfg.scenario.seed};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_setting(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

inline bool uses_checkins(const ExperimentConfig& cfg) {
  return !cfg.worker_checkins.empty() || !cfg.task_checkins.empty();
}

// Builds the scenario for one seed: synthetic by default, or from check-in
// files when both are configured. `skipped` receives the malformed line count.
inline Scenario build_scenario(const ExperimentConfig& cfg, std::uint64_t seed,
                               int* skipped = nullptr) {
  ScenarioConfig sc = cfg.scenario;
  sc.seed = seed;
  if (!uses_checkins(cfg)) return generate(sc);
  if (cfg.worker_checkins.empty() || cfg.task_checkins.empty()) {
    throw std::invalid_argument("worker_checkins and task_checkins must be given together");
  }
  validate_config(sc);
  auto wp = load_checkins(cfg.worker_checkins);
  auto tp = load_checkins(cfg.task_checkins);
  if (skipped) *skipped = wp.skipped + tp.skipped;
  Rng wr(mix_seed(seed, 1)), tr(mix_seed(seed, 2));
  Scenario s;
  s.workers = ingest_checkins(wp.records, cfg.bbox, CheckinRole::worker, sc, wr).workers;
  s.tasks = ingest_checkins(tp.records, cfg.bbox, CheckinRole::task, sc, tr).tasks;
  s.slots = 24;
  normalize(s);
  return s;
}

inline void write_config(std::ostream& out, const ExperimentConfig& cfg) {
  using detail::fmt_real;
  const auto& sc = cfg.scenario;
  const auto& ro = cfg.run;
  auto range = [](Range r) { return fmt_real(r.lo) + "," + fmt_real(r.hi); };
  out << "slots = " << sc.slots << '\n'
      << "m = " << sc.m << '\n'
      << "n = " << sc.n << '\n'
      << "distribution = " << to_string(sc.distribution) << '\n'
      << "rt = " << range(sc.rt) << '\n'
      << "b = " << range(sc.b) << '\n'
      << "q = " << range(sc.q) << '\n'
      << "r = " << range(sc.r) << '\n'
      << "c = " << range(sc.c) << '\n'
      << "a = " << range(sc.a) << '\n'
      << "speed = " << fmt_real(sc.speed) << '\n'
      << "open_slots = " << sc.open_slots << '\n';
  out << "seeds = ";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) out << (i ? "," : "") << cfg.seeds[i];
  out << '\n'
      << "geometry = " << to_string(ro.geometry) << '\n'
      << "epsilon = " << fmt_real(ro.rdb_epsilon) << '\n'
      << "delta = " << fmt_real(ro.rdb_delta) << '\n'
      << "leaf_size = " << ro.dc_leaf_size << '\n'
      << "max_set_size = " << ro.gt_max_set_size << '\n'
      << "candidate_limit = " << ro.gt_candidate_limit << '\n'
      << "prefix_len = " << ro.prs_prefix << '\n'
      << "task_limit = " << ro.online_task_limit << '\n'
      << "cell_side = " << fmt_real(ro.cell_side) << '\n';
  if (!cfg.algorithms.empty()) {
    out << "algorithms = ";
    for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) {
      out << (i ? "," : "") << cfg.algorithms[i];
    }
    out << '\n';
  }
  if (uses_checkins(cfg)) {
    out << "worker_checkins = " << cfg.worker_checkins << '\n'
        << "task_checkins = " << cfg.task_checkins << '\n'
        << "lat_min = " << fmt_real(cfg.bbox.lat_min) << '\n'
        << "lat_max = " << fmt_real(cfg.bbox.lat_max) << '\n'
        << "lon_min = " << fmt_real(cfg.bbox.lon_min) << '\n'
        << "lon_max = " << fmt_real(cfg.bbox.lon_max) << '\n';
  }
}

}  // namespace geocrowd
