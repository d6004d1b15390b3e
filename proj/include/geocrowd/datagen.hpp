#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "geocrowd/domain.hpp"
#include "geocrowd/rng.hpp"

namespace geocrowd {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

enum class Distribution { unif, gaus, skew };

inline std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::unif: return "UNIF";
    case Distribution::gaus: return "GAUS";
    case Distribution::skew: return "SKEW";
  }
  return "?";
}

inline Distribution parse_distribution(std::string_view s) {
  std::string up(s);
  for (auto& ch : up) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (up == "UNIF") return Distribution::unif;
  if (up == "GAUS") return Distribution::gaus;
  if (up == "SKEW") return Distribution::skew;
  throw std::invalid_argument("unknown distribution '" + std::string(s) +
                              "' (expected UNIF, GAUS or SKEW)");
}

struct ScenarioConfig {
  int slots = 50;
  int m = 7500;  // tasks per slot
  int n = 7500;  // workers per slot
  Distribution distribution = Distribution::unif;
  Range rt{1.0, 2.0};   // deadline offset from creation, in slots
  Range b{3.0, 5.0};    // required answers
  Range q{0.75, 0.8};   // required confidence
  Range r{0.75, 0.8};   // worker reliability
  Range c{2.0, 3.0};    // worker capacity
  Range a{0.05, 0.1};   // working-area half extent
  double speed = 0.3;   // space units per slot
  int open_slots = 1;
  std::uint64_t seed = 1;
};

inline void validate_config(const ScenarioConfig& cfg) {
  if (cfg.slots <= 0 || cfg.m <= 0 || cfg.n <= 0) {
    throw std::invalid_argument("slots, m and n must be positive");
  }
  for (auto [name, rg] : {std::pair{"rt", cfg.rt}, std::pair{"b", cfg.b},
                          std::pair{"q", cfg.q}, std::pair{"r", cfg.r},
                          std::pair{"c", cfg.c}, std::pair{"a", cfg.a}}) {
    if (!(rg.lo <= rg.hi)) {
      throw std::invalid_argument(std::string("range ") + name + " has lo > hi");
    }
  }
  if (cfg.rt.lo <= 0.0) throw std::invalid_argument("rt must be positive");
  if (cfg.b.lo < 0.0) throw std::invalid_argument("b must be non-negative");
  if (cfg.a.lo <= 0.0) throw std::invalid_argument("a must be positive");
  if (cfg.r.lo < 0.0 || cfg.r.hi > 1.0) throw std::invalid_argument("r must lie in [0,1]");
  if (cfg.q.lo <= 0.5 || cfg.q.hi >= 1.0) throw std::invalid_argument("q must lie in (0.5,1)");
  if (!(cfg.speed > 0.0)) throw std::invalid_argument("speed must be positive");
  if (cfg.open_slots < 1) throw std::invalid_argument("open_slots must be >= 1");
}

// Truncated N(0, 0.2^2) on [-1, 1], mapped linearly onto [lo, hi].
inline double sample_range(Range range, Rng& rng) {
  if (range.lo > range.hi) throw std::invalid_argument("sample_range: lo > hi");
  double g;
  do {
    g = rng.normal(0.0, 0.2);
  } while (g < -1.0 || g > 1.0);
  if (range.lo == range.hi) return range.lo;
  return std::clamp(range.lo + (g + 1.0) / 2.0 * (range.hi - range.lo), range.lo, range.hi);
}

struct TaggedPoint {
  Point point;
  bool clustered = false;  // drawn from the Gaussian component
};

inline Point gaussian_location(Rng& rng) {
  for (;;) {
    double x = rng.normal(0.5, 0.2);
    double y = rng.normal(0.5, 0.2);
    if (x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0) return {x, y};
  }
}

inline TaggedPoint sample_location_tagged(Distribution d, Rng& rng) {
  switch (d) {
    case Distribution::unif: return {{rng.uniform(), rng.uniform()}, false};
    case Distribution::gaus: return {gaussian_location(rng), true};
    case Distribution::skew:
      if (rng.bernoulli(0.9)) return {gaussian_location(rng), true};
      return {{rng.uniform(), rng.uniform()}, false};
  }
  throw std::logic_error("bad distribution");
}

inline Point sample_location(Distribution d, Rng& rng) {
  return sample_location_tagged(d, rng).point;
}

// Nearest odd integer, halfway cases rounded up; never below 1.
inline int nearest_odd(double x) {
  int k = static_cast<int>(std::floor((x - 1.0) / 2.0 + 0.5));
  return std::max(1, 2 * k + 1);
}

// Reals are kept at the precision they are written with, so a scenario read
// back from its files is identical to the generated one.
inline double quantize(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

struct Scenario {
  int slots = 0;
  std::vector<Worker> workers;  // sorted by (arrival_slot, id)
  std::vector<Task> tasks;      // sorted by (created_slot, id)
};

inline Worker make_worker(int id, int slot, Point loc, const ScenarioConfig& cfg, Rng& rng) {
  Worker w;
  w.id = id;
  w.location = {quantize(loc.x), quantize(loc.y)};
  w.radius = quantize(sample_range(cfg.a, rng));
  w.reliability = quantize(sample_range(cfg.r, rng));
  w.capacity = std::max(1, static_cast<int>(std::lround(sample_range(cfg.c, rng))));
  w.speed = quantize(cfg.speed);
  w.arrival_slot = slot;
  w.open_slots = cfg.open_slots;
  return w;
}

inline Task make_task(int id, int slot, Point loc, const ScenarioConfig& cfg, Rng& rng) {
  Task t;
  t.id = id;
  t.location = {quantize(loc.x), quantize(loc.y)};
  t.created_slot = slot;
  t.deadline = quantize(slot + sample_range(cfg.rt, rng));
  t.required_answers = nearest_odd(sample_range(cfg.b, rng));
  t.required_confidence = quantize(sample_range(cfg.q, rng));
  return t;
}

inline Scenario generate(const ScenarioConfig& cfg) {
  validate_config(cfg);
  Rng rng(mix_seed(cfg.seed, 0x5ce7a410));
  Scenario s;
  s.slots = cfg.slots;
  int next_worker = 1;
  int next_task = 1;
  for (int p = 0; p < cfg.slots; ++p) {
    for (int i = 0; i < cfg.n; ++i) {
      Point loc = sample_location(cfg.distribution, rng);
      s.workers.push_back(make_worker(next_worker++, p, loc, cfg, rng));
    }
    for (int j = 0; j < cfg.m; ++j) {
      Point loc = sample_location(cfg.distribution, rng);
      s.tasks.push_back(make_task(next_task++, p, loc, cfg, rng));
    }
  }
  return s;
}

// ---- files ------------------------------------------------------------------

namespace detail {

inline std::string fmt_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double to_real(const std::string& s, const char* what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size() || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("bad ") + what + " '" + s + "'");
  }
  return v;
}

inline int to_int(const std::string& s, const char* what) {
  std::size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size()) {
    throw std::invalid_argument(std::string("bad ") + what + " '" + s + "'");
  }
  return static_cast<int>(v);
}

}  // namespace detail

inline constexpr std::string_view kWorkerHeader =
    "slot,worker_id,x,y,radius,speed,capacity,reliability";
inline constexpr std::string_view kTaskHeader =
    "slot,task_id,x,y,deadline,required_answers,required_confidence";

inline void write_workers(std::ostream& out, std::vector<Worker> workers) {
  std::sort(workers.begin(), workers.end(), [](const Worker& a, const Worker& b) {
    return std::tie(a.arrival_slot, a.id) < std::tie(b.arrival_slot, b.id);
  });
  using detail::fmt_real;
  out << kWorkerHeader << '\n';
  for (const auto& w : workers) {
    out << w.arrival_slot << ',' << w.id << ',' << fmt_real(w.location.x) << ','
        << fmt_real(w.location.y) << ',' << fmt_real(w.radius) << ','
        << fmt_real(w.speed) << ',' << w.capacity << ',' << fmt_real(w.reliability)
        << '\n';
  }
}

inline void write_tasks(std::ostream& out, std::vector<Task> tasks) {
  std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) {
    return std::tie(a.created_slot, a.id) < std::tie(b.created_slot, b.id);
  });
  using detail::fmt_real;
  out << kTaskHeader << '\n';
  for (const auto& t : tasks) {
    out << t.created_slot << ',' << t.id << ',' << fmt_real(t.location.x) << ','
        << fmt_real(t.location.y) << ',' << fmt_real(t.deadline) << ','
        << t.required_answers << ',' << fmt_real(t.required_confidence) << '\n';
  }
}

inline std::vector<Worker> read_workers(std::istream& in, int open_slots = 1) {
  std::string line;
  if (!std::getline(in, line) || detail::split_csv(line) != detail::split_csv(std::string(kWorkerHeader))) {
    throw std::invalid_argument("workers file: expected header '" + std::string(kWorkerHeader) + "'");
  }
  std::vector<Worker> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto f = detail::split_csv(line);
    if (f.size() != 8) {
      throw std::invalid_argument("workers file line " + std::to_string(lineno) +
                                  ": expected 8 fields");
    }
    Worker w;
    w.arrival_slot = detail::to_int(f[0], "slot");
    w.id = detail::to_int(f[1], "worker_id");
    w.location = {detail::to_real(f[2], "x"), detail::to_real(f[3], "y")};
    w.radius = detail::to_real(f[4], "radius");
    w.speed = detail::to_real(f[5], "speed");
    w.capacity = detail::to_int(f[6], "capacity");
    w.reliability = detail::to_real(f[7], "reliability");
    w.open_slots = open_slots;
    if (!well_formed(w)) {
      throw std::invalid_argument("workers file line " + std::to_string(lineno) +
                                  ": attribute out of range");
    }
    out.push_back(w);
  }
  return out;
}

inline std::vector<Task> read_tasks(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::split_csv(line) != detail::split_csv(std::string(kTaskHeader))) {
    throw std::invalid_argument("tasks file: expected header '" + std::string(kTaskHeader) + "'");
  }
  std::vector<Task> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto f = detail::split_csv(line);
    if (f.size() != 7) {
      throw std::invalid_argument("tasks file line " + std::to_string(lineno) +
                                  ": expected 7 fields");
    }
    Task t;
    t.created_slot = detail::to_int(f[0], "slot");
    t.id = detail::to_int(f[1], "task_id");
    t.location = {detail::to_real(f[2], "x"), detail::to_real(f[3], "y")};
    t.deadline = detail::to_real(f[4], "deadline");
    t.required_answers = detail::to_int(f[5], "required_answers");
    t.required_confidence = detail::to_real(f[6], "required_confidence");
    if (!well_formed(t)) {
      throw std::invalid_argument("tasks file line " + std::to_string(lineno) +
                                  ": attribute out of range");
    }
    out.push_back(t);
  }
  return out;
}

// Orders both streams by (slot, id) and sets the slot count to cover them.
inline void normalize(Scenario& s) {
  std::sort(s.workers.begin(), s.workers.end(), [](const Worker& a, const Worker& b) {
    return std::tie(a.arrival_slot, a.id) < std::tie(b.arrival_slot, b.id);
  });
  std::sort(s.tasks.begin(), s.tasks.end(), [](const Task& a, const Task& b) {
    return std::tie(a.created_slot, a.id) < std::tie(b.created_slot, b.id);
  });
  int last = -1;
  if (!s.workers.empty()) last = std::max(last, s.workers.back().arrival_slot);
  if (!s.tasks.empty()) last = std::max(last, s.tasks.back().created_slot);
  s.slots = std::max(s.slots, last + 1);
}

// ---- check-ins --------------------------------------------------------------

struct CheckinRecord {
  std::string user_id;
  double latitude = 0.0;
  double longitude = 0.0;
  std::string timestamp;
  int hour = 0;
};

struct BoundingBox {
  double lat_min = 33.692965;
  double lat_max = 34.353218;
  double lon_min = -118.661469;
  double lon_max = -118.161934;

  bool contains(double lat, double lon) const {
    return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
  }
};

// Hour of day from an ISO-8601 timestamp ("2010-10-19T23:55:27Z" or with a
// space separator). Empty when the time part is missing or malformed.
inline std::optional<int> timestamp_hour(std::string_view ts) {
  auto sep = ts.find_first_of("T ");
  if (sep == std::string_view::npos || sep + 3 > ts.size()) return std::nullopt;
  auto digit = [](char ch) { return ch >= '0' && ch <= '9'; };
  char h1 = ts[sep + 1], h2 = ts[sep + 2];
  if (!digit(h1) || !digit(h2)) return std::nullopt;
  if (sep + 3 < ts.size() && ts[sep + 3] != ':') return std::nullopt;
  int hour = (h1 - '0') * 10 + (h2 - '0');
  if (hour > 23) return std::nullopt;
  return hour;
}

struct CheckinParse {
  std::vector<CheckinRecord> records;
  int skipped = 0;
};

// Lines: user_id,latitude,longitude,timestamp. A leading header line is
// ignored; malformed lines are skipped and counted.
inline CheckinParse parse_checkins(std::istream& in) {
  CheckinParse out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    bool header = first && line.rfind("user_id", 0) == 0;
    first = false;
    if (header || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto f = detail::split_csv(line);
    std::optional<int> hour;
    if (f.size() == 4 && !f[0].empty()) hour = timestamp_hour(f[3]);
    if (!hour) {
      ++out.skipped;
      continue;
    }
    try {
      CheckinRecord r;
      r.user_id = f[0];
      r.latitude = detail::to_real(f[1], "latitude");
      r.longitude = detail::to_real(f[2], "longitude");
      r.timestamp = f[3];
      r.hour = *hour;
      out.records.push_back(std::move(r));
    } catch (const std::invalid_argument&) {
      ++out.skipped;
    }
  }
  return out;
}

enum class CheckinRole { worker, task };

// Turns check-ins into a stream of workers or tasks: records outside the box
// are dropped, coordinates are min-max mapped onto the unit square
// (x = longitude, y = latitude), the slot is the hour of day, and the
// attributes a check-in does not carry are drawn as in generate().
inline Scenario ingest_checkins(const std::vector<CheckinRecord>& records,
                                const BoundingBox& box, CheckinRole role,
                                const ScenarioConfig& cfg, Rng& rng) {
  std::vector<const CheckinRecord*> kept;
  for (const auto& r : records) {
    if (box.contains(r.latitude, r.longitude)) kept.push_back(&r);
  }
  if (kept.empty()) {
    throw std::invalid_argument("no check-in records inside the bounding box");
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](auto* a, auto* b) { return a->hour < b->hour; });
  Scenario s;
  s.slots = 24;
  int next_id = 1;
  for (const CheckinRecord* r : kept) {
    Point p{std::clamp((r->longitude - box.lon_min) / (box.lon_max - box.lon_min), 0.0, 1.0),
            std::clamp((r->latitude - box.lat_min) / (box.lat_max - box.lat_min), 0.0, 1.0)};
    if (role == CheckinRole::worker) {
      s.workers.push_back(make_worker(next_id++, r->hour, p, cfg, rng));
    } else {
      s.tasks.push_back(make_task(next_id++, r->hour, p, cfg, rng));
    }
  }
  return s;
}

inline CheckinParse load_checkins(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open check-in file '" + path + "'");
  return parse_checkins(in);
}

}  // namespace geocrowd
