#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "geocrowd/domain.hpp"
#include "geocrowd/online.hpp"

namespace geocrowd {

enum class ViolationKind {
  unknown_worker,
  unknown_task,
  duplicate,
  working_area,
  deadline,
  capacity,
  answer_count,
  arrival_time,
};

inline std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::unknown_worker: return "unknown_worker";
    case ViolationKind::unknown_task: return "unknown_task";
    case ViolationKind::duplicate: return "duplicate";
    case ViolationKind::working_area: return "working_area";
    case ViolationKind::deadline: return "deadline";
    case ViolationKind::capacity: return "capacity";
    case ViolationKind::answer_count: return "answer_count";
    case ViolationKind::arrival_time: return "arrival_time";
  }
  return "?";
}

struct Violation {
  ViolationKind kind;
  int worker_id = -1;
  int task_id = -1;
  std::string detail;

  std::string describe() const {
    std::string s(to_string(kind));
    if (worker_id >= 0) s += " worker=" + std::to_string(worker_id);
    if (task_id >= 0) s += " task=" + std::to_string(task_id);
    if (!detail.empty()) s += ": " + detail;
    return s;
  }
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(Violation v)
      : std::runtime_error("constraint violation: " + v.describe()), violation_(std::move(v)) {}
  const Violation& violation() const { return violation_; }

 private:
  Violation violation_;
};

// Checks a batch assignment against the snapshot it was computed from:
// known ids, one pair per (worker, task), working area and deadline from the
// worker's snapshot location, remaining capacity and remaining answers.
// Returns the first violation in pair order.
inline std::optional<Violation> validate(const AssignmentInstanceSet& a,
                                         const SlotSnapshot& snap) {
  std::map<int, const Worker*> workers;
  for (const auto& w : snap.workers) workers[w.id] = &w;
  std::map<int, const Task*> tasks;
  for (const auto& t : snap.tasks) tasks[t.id] = &t;

  std::set<std::pair<int, int>> seen;
  std::map<int, int> load, answers;
  for (const auto& p : a.pairs) {
    auto wi = workers.find(p.worker_id);
    if (wi == workers.end()) return Violation{ViolationKind::unknown_worker, p.worker_id, p.task_id, {}};
    auto ti = tasks.find(p.task_id);
    if (ti == tasks.end()) return Violation{ViolationKind::unknown_task, p.worker_id, p.task_id, {}};
    const Worker& w = *wi->second;
    const Task& t = *ti->second;
    if (!seen.emplace(p.worker_id, p.task_id).second ||
        std::find(t.assigned_workers.begin(), t.assigned_workers.end(), w.id) !=
            t.assigned_workers.end()) {
      return Violation{ViolationKind::duplicate, w.id, t.id, "worker already answers this task"};
    }
    if (!in_working_area(w, t.location, snap.geometry)) {
      return Violation{ViolationKind::working_area, w.id, t.id, {}};
    }
    if (!feasible(w, t, snap.slot, snap.geometry)) {
      return Violation{ViolationKind::deadline, w.id, t.id, "cannot arrive before the deadline"};
    }
    if (++load[w.id] > w.capacity) {
      return Violation{ViolationKind::capacity, w.id, t.id,
                       "more than " + std::to_string(w.capacity) + " tasks"};
    }
    if (++answers[t.id] > t.remaining_answers()) {
      return Violation{ViolationKind::answer_count, w.id, t.id,
                       "more than " + std::to_string(t.remaining_answers()) + " answers"};
    }
  }
  for (int id : a.settled_tasks) {
    if (!tasks.contains(id)) return Violation{ViolationKind::unknown_task, -1, id, "settled"};
    if (answers[id] == 0) {
      return Violation{ViolationKind::answer_count, -1, id, "settled without answers"};
    }
  }
  return std::nullopt;
}

// Checks a route by recomputing every arrival from the worker's start
// position and time. Tasks must come from `tasks`, be distinct, lie in the
// worker's working area and be reached by their deadlines; the route may not
// exceed max_tasks.
inline std::optional<Violation> validate(const Schedule& s, const Worker& worker,
                                         std::span<const Task> tasks, double now,
                                         Geometry g = Geometry::square,
                                         std::size_t max_tasks = std::numeric_limits<std::size_t>::max()) {
  if (s.task_ids.size() != s.arrival_times.size() || s.task_ids.size() != s.stops.size()) {
    return Violation{ViolationKind::arrival_time, worker.id, -1, "ragged schedule"};
  }
  if (s.task_ids.size() > max_tasks) {
    return Violation{ViolationKind::capacity, worker.id, -1,
                     std::to_string(s.task_ids.size()) + " tasks for capacity " +
                         std::to_string(max_tasks)};
  }
  std::map<int, const Task*> by_id;
  for (const auto& t : tasks) by_id[t.id] = &t;
  std::set<int> seen;
  Point here = worker.location;
  double t = now;
  for (std::size_t i = 0; i < s.task_ids.size(); ++i) {
    int id = s.task_ids[i];
    auto it = by_id.find(id);
    if (it == by_id.end()) return Violation{ViolationKind::unknown_task, worker.id, id, {}};
    const Task& task = *it->second;
    if (!seen.insert(id).second) return Violation{ViolationKind::duplicate, worker.id, id, {}};
    if (!in_working_area(worker, task.location, g)) {
      return Violation{ViolationKind::working_area, worker.id, id, {}};
    }
    double arrival = t + distance(here, task.location) / worker.speed;
    double tol = 1e-9 * std::max(1.0, std::abs(arrival));
    if (std::abs(arrival - s.arrival_times[i]) > tol || !(s.stops[i] == task.location)) {
      return Violation{ViolationKind::arrival_time, worker.id, id,
                       "recorded arrival does not match travel time"};
    }
    if (arrival > task.deadline) {
      return Violation{ViolationKind::deadline, worker.id, id, "arrives after the deadline"};
    }
    here = task.location;
    t = arrival;
  }
  return std::nullopt;
}

}  // namespace geocrowd
