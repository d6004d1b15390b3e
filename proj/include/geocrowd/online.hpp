#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "geocrowd/domain.hpp"

namespace geocrowd {

// A route for one worker: tasks in visiting order with arrival times.
struct Schedule {
  int worker_id = -1;
  std::vector<int> task_ids;
  std::vector<double> arrival_times;
  std::vector<Point> stops;

  int completed_count() const { return static_cast<int>(task_ids.size()); }
  bool empty() const { return task_ids.empty(); }
};

struct RouteOptions {
  std::size_t max_tasks = std::numeric_limits<std::size_t>::max();
  std::size_t dp_task_limit = 20;
  bool apriori = true;
};

inline bool can_append(const Schedule& s, const Task& task, const Worker& worker,
                       double now) {
  Point from = s.empty() ? worker.location : s.stops.back();
  double t0 = s.empty() ? now : s.arrival_times.back();
  return t0 + distance(from, task.location) / worker.speed <= task.deadline;
}

inline void append_stop(Schedule& s, const Task& task, const Worker& worker,
                        double now) {
  Point from = s.empty() ? worker.location : s.stops.back();
  double t0 = s.empty() ? now : s.arrival_times.back();
  s.task_ids.push_back(task.id);
  s.arrival_times.push_back(t0 + distance(from, task.location) / worker.speed);
  s.stops.push_back(task.location);
}

// Precomputed single-worker routing instance. Task index order is id order.
class RouteProblem {
 public:
  RouteProblem(const Worker& worker, std::span<const Task> tasks, double now)
      : worker_(worker), now_(now) {
    auto idx = order_by_id(tasks);
    for (auto i : idx) tasks_.push_back(tasks[i]);
    const std::size_t n = tasks_.size();
    from_start_.resize(n);
    travel_.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      from_start_[i] = distance(worker.location, tasks_[i].location) / worker.speed;
      for (std::size_t j = 0; j < n; ++j) {
        travel_[i][j] = distance(tasks_[i].location, tasks_[j].location) / worker.speed;
      }
    }
  }

  std::size_t size() const { return tasks_.size(); }
  const Task& task(std::size_t i) const { return tasks_[i]; }
  const Worker& worker() const { return worker_; }
  double now() const { return now_; }
  double deadline(std::size_t i) const { return tasks_[i].deadline; }

  // Arrival time at task j coming from task i (or from the start when i < 0).
  double arrive(int i, double t, std::size_t j) const {
    return t + (i < 0 ? from_start_[j] : travel_[i][j]);
  }

  Schedule to_schedule(const std::vector<int>& order) const {
    Schedule s;
    s.worker_id = worker_.id;
    for (int i : order) append_stop(s, tasks_[i], worker_, now_);
    return s;
  }

 private:
  Worker worker_;
  double now_;
  std::vector<Task> tasks_;
  std::vector<double> from_start_;
  std::vector<std::vector<double>> travel_;
};

// Exact solver over task subsets of increasing size. best[S][j] is the
// earliest arrival at j having completed exactly S and ending at j; a set is
// valid when some j is reachable. Supersets of invalid sets are never
// generated (Apriori). Among optimal routes, the lexicographically smallest
// task-id sequence is returned.
inline Schedule dp_schedule(const Worker& worker, std::span<const Task> tasks,
                            double now, const RouteOptions& opt = {}) {
  if (tasks.size() > opt.dp_task_limit || tasks.size() > 30) {
    throw std::invalid_argument("dp_schedule: " + std::to_string(tasks.size()) +
                                " tasks exceed the limit of " +
                                std::to_string(opt.dp_task_limit));
  }
  RouteProblem rp(worker, tasks, now);
  const int n = static_cast<int>(rp.size());
  const int cap = static_cast<int>(std::min<std::size_t>(opt.max_tasks, rp.size()));
  constexpr double kInf = std::numeric_limits<double>::infinity();
  using Mask = std::uint32_t;

  std::unordered_map<Mask, std::vector<double>> best;
  std::vector<std::vector<Mask>> levels(1);
  levels[0].push_back(0);

  if (cap >= 1) {
    std::vector<Mask> first;
    for (int j = 0; j < n; ++j) {
      double t = rp.arrive(-1, now, j);
      if (t <= rp.deadline(j)) {
        std::vector<double> row(n, kInf);
        row[j] = t;
        best.emplace(Mask{1} << j, std::move(row));
        first.push_back(Mask{1} << j);
      }
    }
    levels.push_back(std::move(first));
  }

  for (int size = 2; size <= cap && !levels.back().empty(); ++size) {
    std::vector<Mask> candidates;
    if (opt.apriori) {
      std::unordered_set<Mask> seen;
      for (Mask s : levels.back()) {
        for (int j = 0; j < n; ++j) {
          if (s >> j & 1) continue;
          Mask c = s | Mask{1} << j;
          if (!seen.insert(c).second) continue;
          bool all_valid = true;
          for (int k = 0; k < n && all_valid; ++k) {
            if ((c >> k & 1) && !best.contains(c ^ Mask{1} << k)) all_valid = false;
          }
          if (all_valid) candidates.push_back(c);
        }
      }
    } else {
      // Every subset of this size (Gosper's hack).
      Mask c = (Mask{1} << size) - 1;
      while (c < (Mask{1} << n)) {
        candidates.push_back(c);
        Mask low = c & -c;
        Mask ripple = c + low;
        c = (((ripple ^ c) >> 2) / low) | ripple;
      }
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<Mask> valid;
    for (Mask c : candidates) {
      std::vector<double> row(n, kInf);
      bool any = false;
      for (int j = 0; j < n; ++j) {
        if (!(c >> j & 1)) continue;
        auto prev = best.find(c ^ Mask{1} << j);
        if (prev == best.end()) continue;
        for (int i = 0; i < n; ++i) {
          double ti = prev->second[i];
          if (ti == kInf) continue;
          double t = rp.arrive(i, ti, j);
          if (t <= rp.deadline(j) && t < row[j]) row[j] = t;
        }
        if (row[j] < kInf) any = true;
      }
      if (any) {
        best.emplace(c, std::move(row));
        valid.push_back(c);
      }
    }
    levels.push_back(std::move(valid));
  }
  while (levels.size() > 1 && levels.back().empty()) levels.pop_back();
  const int optimum = static_cast<int>(levels.size()) - 1;

  Schedule empty_schedule;
  empty_schedule.worker_id = worker.id;
  if (optimum == 0) return empty_schedule;

  // Valid sets that extend to some optimal set.
  std::unordered_set<Mask> extendable(levels[optimum].begin(), levels[optimum].end());
  for (int size = optimum - 1; size >= 1; --size) {
    for (Mask s : levels[size]) {
      for (int j = 0; j < n; ++j) {
        if (!(s >> j & 1) && extendable.contains(s | Mask{1} << j)) {
          extendable.insert(s);
          break;
        }
      }
    }
  }

  // Depth-first in id order; the first complete route is lexicographically
  // smallest. fail_at[(S, j)] is the earliest arrival known not to extend.
  std::unordered_map<std::uint64_t, double> fail_at;
  std::vector<int> route;
  std::function<bool(Mask, int, double)> extend = [&](Mask used, int last, double t) {
    if (static_cast<int>(route.size()) == optimum) return true;
    for (int j = 0; j < n; ++j) {
      if (used >> j & 1) continue;
      Mask next = used | Mask{1} << j;
      if (!extendable.contains(next)) continue;
      double arrival = rp.arrive(last, t, j);
      if (arrival > rp.deadline(j)) continue;
      std::uint64_t key = (std::uint64_t{next} << 5) | static_cast<std::uint64_t>(j);
      auto f = fail_at.find(key);
      if (f != fail_at.end() && arrival >= f->second) continue;
      route.push_back(j);
      if (extend(next, j, arrival)) return true;
      route.pop_back();
      fail_at[key] = f == fail_at.end() ? arrival : std::min(f->second, arrival);
    }
    return false;
  };
  if (!extend(0, -1, now)) {
    throw std::logic_error("dp_schedule: optimal route could not be rebuilt");
  }
  return rp.to_schedule(route);
}

// Node of the branch-and-bound search tree.
struct SearchNode {
  std::vector<int> sequence;  // task indices into the RouteProblem
  int level = 0;
  std::vector<int> candidates;  // appendable next tasks, index order
  int upper_bound = 0;          // level + |candidates|
  double time = 0.0;
};

// Search-tree operations shared by BB and MPH.
class RouteSearch {
 public:
  RouteSearch(const RouteProblem& rp, std::size_t max_tasks)
      : rp_(rp), max_tasks_(max_tasks) {}

  const RouteProblem& problem() const { return rp_; }

  SearchNode root() const {
    SearchNode r;
    r.time = rp_.now();
    if (max_tasks_ > 0) {
      for (int j = 0; j < static_cast<int>(rp_.size()); ++j) {
        if (rp_.arrive(-1, r.time, j) <= rp_.deadline(j)) r.candidates.push_back(j);
      }
    }
    r.upper_bound = static_cast<int>(r.candidates.size());
    return r;
  }

  SearchNode child(const SearchNode& parent, int task) const {
    SearchNode c;
    c.sequence = parent.sequence;
    c.sequence.push_back(task);
    c.level = parent.level + 1;
    int last = parent.sequence.empty() ? -1 : parent.sequence.back();
    c.time = rp_.arrive(last, parent.time, task);
    if (static_cast<std::size_t>(c.level) < max_tasks_) {
      for (int k : parent.candidates) {
        if (k != task && rp_.arrive(task, c.time, k) <= rp_.deadline(k)) {
          c.candidates.push_back(k);
        }
      }
    }
    c.upper_bound = c.level + static_cast<int>(c.candidates.size());
    return c;
  }

  std::vector<SearchNode> children(const SearchNode& node) const {
    std::vector<SearchNode> out;
    for (int k : node.candidates) out.push_back(child(node, k));
    return out;
  }

  // Nearest-neighbour completion of `node`; its length is a lower bound.
  std::vector<int> nearest_completion(const SearchNode& node) const {
    std::vector<int> seq = node.sequence;
    std::vector<char> used(rp_.size(), 0);
    for (int i : seq) used[i] = 1;
    double t = node.time;
    int last = seq.empty() ? -1 : seq.back();
    while (seq.size() < max_tasks_) {
      int pick = -1;
      double pick_d = 0.0;
      for (int k : node.candidates) {
        if (used[k]) continue;
        double arrival = rp_.arrive(last, t, k);
        if (arrival > rp_.deadline(k)) continue;
        double d = arrival - t;
        if (pick < 0 || d < pick_d) {
          pick = k;
          pick_d = d;
        }
      }
      if (pick < 0) break;
      used[pick] = 1;
      t = rp_.arrive(last, t, pick);
      last = pick;
      seq.push_back(pick);
    }
    return seq;
  }

 private:
  const RouteProblem& rp_;
  std::size_t max_tasks_;
};

struct BbStats {
  std::size_t nodes_expanded = 0;
};

// Depth-first branch and bound. Children are visited by descending upper
// bound, then descending nearest-neighbour lower bound, then task id; a node
// is pruned when its upper bound cannot beat the incumbent or falls below a
// sibling's lower bound. `on_expand`, when set, sees every expanded node.
inline Schedule bb_schedule(const Worker& worker, std::span<const Task> tasks,
                            double now, const RouteOptions& opt = {},
                            BbStats* stats = nullptr,
                            const std::function<void(const SearchNode&)>& on_expand = {}) {
  RouteProblem rp(worker, tasks, now);
  RouteSearch search(rp, opt.max_tasks);
  std::vector<int> incumbent;
  int cur_max = 0;

  std::function<void(const SearchNode&)> visit = [&](const SearchNode& node) {
    if (stats) ++stats->nodes_expanded;
    if (on_expand) on_expand(node);
    if (node.level > cur_max) {
      cur_max = node.level;
      incumbent = node.sequence;
    }
    if (node.upper_bound <= cur_max) return;

    struct Branch {
      SearchNode node;
      int lower_bound;
    };
    std::vector<Branch> branches;
    int best_lb = 0;
    for (auto& c : search.children(node)) {
      auto completion = search.nearest_completion(c);
      int lb = static_cast<int>(completion.size());
      if (lb > cur_max) {
        cur_max = lb;
        incumbent = std::move(completion);
      }
      best_lb = std::max(best_lb, lb);
      branches.push_back({std::move(c), lb});
    }
    std::stable_sort(branches.begin(), branches.end(), [](const Branch& a, const Branch& b) {
      if (a.node.upper_bound != b.node.upper_bound) {
        return a.node.upper_bound > b.node.upper_bound;
      }
      if (a.lower_bound != b.lower_bound) return a.lower_bound > b.lower_bound;
      return a.node.sequence.back() < b.node.sequence.back();
    });
    for (const auto& b : branches) {
      if (b.node.upper_bound <= cur_max) continue;
      if (b.node.upper_bound < best_lb) continue;
      visit(b.node);
    }
  };
  visit(search.root());
  return rp.to_schedule(incumbent);
}

// Least expiration time first.
inline Schedule leh_schedule(const Worker& worker, std::span<const Task> tasks,
                             double now, const RouteOptions& opt = {}) {
  std::vector<const Task*> order;
  for (const auto& t : tasks) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const Task* a, const Task* b) {
    return std::tie(a->deadline, a->id) < std::tie(b->deadline, b->id);
  });
  Schedule s;
  s.worker_id = worker.id;
  for (const Task* t : order) {
    if (static_cast<std::size_t>(s.completed_count()) >= opt.max_tasks) break;
    if (can_append(s, *t, worker, now)) append_stop(s, *t, worker, now);
  }
  return s;
}

// Nearest valid task next.
inline Schedule nnh_schedule(const Worker& worker, std::span<const Task> tasks,
                             double now, const RouteOptions& opt = {}) {
  Schedule s;
  s.worker_id = worker.id;
  std::vector<char> used(tasks.size(), 0);
  while (static_cast<std::size_t>(s.completed_count()) < opt.max_tasks) {
    Point here = s.empty() ? worker.location : s.stops.back();
    std::size_t pick = tasks.size();
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      if (used[i] || !can_append(s, tasks[i], worker, now)) continue;
      if (pick == tasks.size()) {
        pick = i;
        continue;
      }
      double di = distance(here, tasks[i].location);
      double dp = distance(here, tasks[pick].location);
      if (di < dp || (di == dp && tasks[i].id < tasks[pick].id)) pick = i;
    }
    if (pick == tasks.size()) break;
    used[pick] = 1;
    append_stop(s, tasks[pick], worker, now);
  }
  return s;
}

enum class GreedyStrategy { leh, nnh };

inline Schedule greedy_schedule(GreedyStrategy strategy, const Worker& worker,
                                std::span<const Task> tasks, double now,
                                const RouteOptions& opt = {}) {
  return strategy == GreedyStrategy::leh ? leh_schedule(worker, tasks, now, opt)
                                         : nnh_schedule(worker, tasks, now, opt);
}

// Most promising heuristic: follow the child with the highest upper bound
// (lowest task id on ties) without backtracking.
inline Schedule mph_schedule(const Worker& worker, std::span<const Task> tasks,
                             double now, const RouteOptions& opt = {}) {
  RouteProblem rp(worker, tasks, now);
  RouteSearch search(rp, opt.max_tasks);
  SearchNode node = search.root();
  while (!node.candidates.empty()) {
    auto kids = search.children(node);
    auto it = std::min_element(kids.begin(), kids.end(), [](const auto& a, const auto& b) {
      if (a.upper_bound != b.upper_bound) return a.upper_bound > b.upper_bound;
      return a.sequence.back() < b.sequence.back();
    });
    node = std::move(*it);
  }
  return rp.to_schedule(node.sequence);
}

// Best of LEH, NNH and MPH; ties resolved in that order.
inline Schedule ha_schedule(const Worker& worker, std::span<const Task> tasks,
                            double now, const RouteOptions& opt = {}) {
  Schedule best = leh_schedule(worker, tasks, now, opt);
  for (auto& s : {nnh_schedule(worker, tasks, now, opt), mph_schedule(worker, tasks, now, opt)}) {
    if (s.completed_count() > best.completed_count()) best = s;
  }
  return best;
}

// Extends `initial` with an exact branch-and-bound suffix over `pool`,
// starting where and when `initial` ends. Tasks already in `initial` are
// skipped; the route stays within opt.max_tasks in total.
inline Schedule extend_schedule(const Schedule& initial, const Worker& worker,
                                std::span<const Task> pool, double now,
                                const RouteOptions& opt = {}) {
  std::size_t used = initial.task_ids.size();
  if (used >= opt.max_tasks) return initial;
  Worker from = worker;
  double start = now;
  if (!initial.empty()) {
    from.location = initial.stops.back();
    start = initial.arrival_times.back();
  }
  std::vector<Task> rest;
  for (const auto& t : pool) {
    if (std::find(initial.task_ids.begin(), initial.task_ids.end(), t.id) ==
        initial.task_ids.end()) {
      rest.push_back(t);
    }
  }
  RouteOptions sub = opt;
  sub.max_tasks = opt.max_tasks - used;
  Schedule suffix = bb_schedule(from, rest, start, sub);
  Schedule out = initial;
  out.worker_id = worker.id;
  for (std::size_t i = 0; i < suffix.task_ids.size(); ++i) {
    out.task_ids.push_back(suffix.task_ids[i]);
    out.arrival_times.push_back(suffix.arrival_times[i]);
    out.stops.push_back(suffix.stops[i]);
  }
  return out;
}

struct ProgressiveSchedule {
  Schedule initial;
  Schedule refined;
};

// Reports the first prefix_len tasks of the heuristic ensemble right away,
// then refines the rest exactly from the end of that prefix.
inline ProgressiveSchedule prs_schedule(const Worker& worker,
                                        std::span<const Task> tasks, double now,
                                        int prefix_len = 2,
                                        const RouteOptions& opt = {}) {
  if (prefix_len < 1) throw std::invalid_argument("prefix_len must be >= 1");
  Schedule ha = ha_schedule(worker, tasks, now, opt);
  if (ha.completed_count() <= prefix_len) return {ha, ha};
  Schedule initial;
  initial.worker_id = worker.id;
  initial.task_ids.assign(ha.task_ids.begin(), ha.task_ids.begin() + prefix_len);
  initial.arrival_times.assign(ha.arrival_times.begin(),
                               ha.arrival_times.begin() + prefix_len);
  initial.stops.assign(ha.stops.begin(), ha.stops.begin() + prefix_len);
  return {initial, extend_schedule(initial, worker, tasks, now, opt)};
}

}  // namespace geocrowd
