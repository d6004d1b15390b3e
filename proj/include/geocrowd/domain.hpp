#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace geocrowd {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// sqrt is correctly rounded, unlike hypot, so results agree across platforms.
inline double distance(Point a, Point b) {
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Shape of a worker's working area around its current location.
// square: axis-aligned square of side 2 * radius. circle: disc of radius.
enum class Geometry { square, circle };

inline std::string_view to_string(Geometry g) {
  return g == Geometry::square ? "square" : "circle";
}

inline Geometry parse_geometry(std::string_view s) {
  if (s == "square") return Geometry::square;
  if (s == "circle") return Geometry::circle;
  throw std::invalid_argument("unknown geometry '" + std::string(s) +
                              "' (expected circle or square)");
}

struct Worker {
  int id = 0;
  Point location;
  double radius = 0.0;       // half-extent of the working area
  double speed = 1.0;        // space units per slot
  double reliability = 1.0;  // probability of a correct answer
  int capacity = 1;          // tasks held at once; remaining capacity in snapshots
  int arrival_slot = 0;
  int open_slots = 1;
};

struct Task {
  int id = 0;
  Point location;
  int created_slot = 0;
  double deadline = 0.0;  // absolute slot time
  int required_answers = 1;
  double required_confidence = 0.5;
  std::vector<int> assigned_workers;

  int remaining_answers() const {
    return required_answers - static_cast<int>(assigned_workers.size());
  }
};

struct AssignmentPair {
  int worker_id = 0;
  int task_id = 0;
  double utility = 0.0;
  double travel_distance = 0.0;
};

struct AssignmentInstanceSet {
  int slot = 0;
  std::vector<AssignmentPair> pairs;
  // Tasks whose answer set is complete once the pairs above are carried out,
  // even if that is fewer than required_answers (GT correct matches).
  std::vector<int> settled_tasks;
};

struct SlotSnapshot {
  int slot = 0;
  std::vector<Worker> workers;
  std::vector<Task> tasks;
  Geometry geometry = Geometry::square;
};

inline bool well_formed(const Worker& w) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  return unit(w.location.x) && unit(w.location.y) && w.radius > 0.0 &&
         w.speed > 0.0 && unit(w.reliability) && w.capacity >= 1 &&
         w.open_slots >= 1;
}

inline bool well_formed(const Task& t) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  return unit(t.location.x) && unit(t.location.y) &&
         t.required_answers >= 1 && t.required_answers % 2 == 1 &&
         t.deadline > t.created_slot && t.required_confidence > 0.5 &&
         t.required_confidence < 1.0 &&
         static_cast<int>(t.assigned_workers.size()) <= t.required_answers;
}

inline bool in_working_area(const Worker& w, Point p,
                            Geometry g = Geometry::square) {
  if (g == Geometry::square) {
    return std::abs(p.x - w.location.x) <= w.radius &&
           std::abs(p.y - w.location.y) <= w.radius;
  }
  return distance(w.location, p) <= w.radius;
}

// Working-area and deadline constraints for assigning `task` to `worker` at
// slot time `now`.
inline bool feasible(const Worker& worker, const Task& task, double now,
                     Geometry g = Geometry::square) {
  if (!in_working_area(worker, task.location, g)) return false;
  return distance(worker.location, task.location) / worker.speed <=
         task.deadline - now;
}

// Ids ascending, lowest first.
template <typename T>
std::vector<std::size_t> order_by_id(std::span<const T> items) {
  std::vector<std::size_t> idx(items.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return items[a].id < items[b].id;
  });
  return idx;
}

inline std::vector<std::pair<int, int>> valid_pairs(const SlotSnapshot& snap) {
  std::vector<std::pair<int, int>> out;
  auto wi = order_by_id(std::span<const Worker>(snap.workers));
  auto ti = order_by_id(std::span<const Task>(snap.tasks));
  for (std::size_t a : wi) {
    const Worker& w = snap.workers[a];
    for (std::size_t b : ti) {
      const Task& t = snap.tasks[b];
      if (feasible(w, t, snap.slot, snap.geometry)) out.emplace_back(w.id, t.id);
    }
  }
  return out;
}

// Probability that strictly more than half of the independent workers answer
// correctly. Defined for any count; an empty set scores 0.
inline double majority_accuracy(std::span<const double> reliabilities) {
  const std::size_t b = reliabilities.size();
  if (b == 0) return 0.0;
  // dist[k] = probability that exactly k of the workers seen so far are right.
  std::vector<double> dist(b + 1, 0.0);
  dist[0] = 1.0;
  for (std::size_t i = 0; i < b; ++i) {
    double r = reliabilities[i];
    for (std::size_t k = i + 1; k > 0; --k) {
      dist[k] = dist[k] * (1.0 - r) + dist[k - 1] * r;
    }
    dist[0] *= 1.0 - r;
  }
  double total = 0.0;
  for (std::size_t k = b / 2 + 1; k <= b; ++k) total += dist[k];
  return std::clamp(total, 0.0, 1.0);
}

// Expected accuracy of a majority vote over an odd number of answers.
inline double expected_accuracy(std::span<const double> reliabilities) {
  if (reliabilities.empty() || reliabilities.size() % 2 == 0) {
    throw std::invalid_argument(
        "expected_accuracy needs an odd, non-empty answer count, got " +
        std::to_string(reliabilities.size()));
  }
  return majority_accuracy(reliabilities);
}

inline bool is_confident(const Task& task,
                         std::span<const double> reliabilities) {
  if (static_cast<int>(reliabilities.size()) != task.required_answers) {
    throw std::invalid_argument("task " + std::to_string(task.id) +
                                " is not fully assigned");
  }
  return expected_accuracy(reliabilities) >= task.required_confidence;
}

}  // namespace geocrowd
