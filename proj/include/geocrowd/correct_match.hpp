#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "geocrowd/domain.hpp"

namespace geocrowd {

// A task together with an odd worker set whose majority vote meets the
// task's required confidence.
struct CorrectMatch {
  int task_id = 0;
  std::vector<int> worker_ids;  // ascending
  double ars = 0.0;             // aggregate reputation score
  double aggregate_distance = 0.0;
};

// Aggregate reputation score with reliabilities taken in worker-id order, so
// every caller gets bit-identical values for the same set.
inline double aggregate_reputation(std::span<const Worker> members) {
  std::vector<const Worker*> sorted;
  for (const auto& w : members) sorted.push_back(&w);
  std::sort(sorted.begin(), sorted.end(),
            [](auto* a, auto* b) { return a->id < b->id; });
  std::vector<double> r;
  for (auto* w : sorted) r.push_back(w->reliability);
  return expected_accuracy(r);
}

namespace detail {

inline std::vector<CorrectMatch> enumerate_matches(
    const Task& task, std::span<const Worker> candidates, int max_set_size,
    bool prune_dominated) {
  if (max_set_size < 1 || max_set_size % 2 == 0) {
    throw std::invalid_argument("max_set_size must be odd and positive");
  }
  if (candidates.size() > 24) {
    throw std::invalid_argument("too many candidate workers for enumeration");
  }
  std::vector<Worker> cand(candidates.begin(), candidates.end());
  std::sort(cand.begin(), cand.end(),
            [](const Worker& a, const Worker& b) { return a.id < b.id; });
  const int n = static_cast<int>(cand.size());
  const int limit = std::min(max_set_size, n);

  std::vector<std::uint32_t> masks;
  for (std::uint32_t m = 1; m < (std::uint32_t{1} << n); ++m) {
    int size = std::popcount(m);
    if (size % 2 == 1 && size <= limit) masks.push_back(m);
  }
  // Size, then lexicographic order of the member indices (== id order).
  auto members = [&](std::uint32_t m) {
    std::vector<int> v;
    for (int i = 0; i < n; ++i) {
      if (m >> i & 1) v.push_back(i);
    }
    return v;
  };
  std::sort(masks.begin(), masks.end(), [&](std::uint32_t a, std::uint32_t b) {
    int sa = std::popcount(a), sb = std::popcount(b);
    if (sa != sb) return sa < sb;
    return members(a) < members(b);
  });

  std::vector<std::uint32_t> accepted;
  std::vector<CorrectMatch> out;
  for (std::uint32_t m : masks) {
    bool dominated = std::any_of(accepted.begin(), accepted.end(),
                                 [&](std::uint32_t a) { return (a & m) == a; });
    if (prune_dominated && dominated) continue;
    std::vector<Worker> set;
    for (int i : members(m)) set.push_back(cand[i]);
    double ars = aggregate_reputation(set);
    if (ars < task.required_confidence) continue;
    accepted.push_back(m);
    CorrectMatch cm;
    cm.task_id = task.id;
    cm.ars = ars;
    for (const auto& w : set) {
      cm.worker_ids.push_back(w.id);
      cm.aggregate_distance += distance(w.location, task.location);
    }
    out.push_back(std::move(cm));
  }
  return out;
}

}  // namespace detail

// All minimal correct matches for `task` among `candidates`: odd sets of at
// most max_set_size workers whose ARS reaches the required confidence, with
// any set containing another qualifying set dropped. Sorted by size, then
// lexicographically by worker ids.
inline std::vector<CorrectMatch> enumerate_correct_matches(
    const Task& task, std::span<const Worker> candidates, int max_set_size) {
  return detail::enumerate_matches(task, candidates, max_set_size, true);
}

struct GtOptions {
  int max_set_size = 9;
  int candidate_limit = 8;  // most reliable feasible workers kept per task
};

namespace detail {

enum class GtOrder { task_then_workers, least_workers_then_distance };

inline AssignmentInstanceSet gt_assign(const SlotSnapshot& snap,
                                       const GtOptions& opt, GtOrder order) {
  if (opt.max_set_size < 1 || opt.max_set_size % 2 == 0) {
    throw std::invalid_argument("max_set_size must be odd and positive");
  }
  std::map<int, const Worker*> workers;
  for (const auto& w : snap.workers) workers[w.id] = &w;
  std::map<int, const Task*> tasks;
  for (const auto& t : snap.tasks) tasks[t.id] = &t;

  std::vector<CorrectMatch> matches;
  for (const auto& [tid, t] : tasks) {
    // Only untouched tasks: a correct match supplies the whole answer set.
    if (!t->assigned_workers.empty()) continue;
    int cap = std::min(opt.max_set_size, t->remaining_answers());
    if (cap % 2 == 0) --cap;
    if (cap < 1) continue;
    std::vector<Worker> cand;
    for (const auto& [wid, w] : workers) {
      if (w->capacity >= 1 && feasible(*w, *t, snap.slot, snap.geometry)) {
        cand.push_back(*w);
      }
    }
    std::stable_sort(cand.begin(), cand.end(), [](const Worker& a, const Worker& b) {
      if (a.reliability != b.reliability) return a.reliability > b.reliability;
      return a.id < b.id;
    });
    if (static_cast<int>(cand.size()) > opt.candidate_limit) {
      cand.resize(opt.candidate_limit);
    }
    auto found = enumerate_matches(*t, cand, cap,
                                   order != GtOrder::task_then_workers);
    matches.insert(matches.end(), found.begin(), found.end());
  }

  if (order == GtOrder::task_then_workers) {
    // Within a task, full answer sets before smaller ones.
    std::stable_sort(matches.begin(), matches.end(), [](const auto& a, const auto& b) {
      auto sa = a.worker_ids.size(), sb = b.worker_ids.size();
      return std::tie(a.task_id, sb, a.worker_ids) < std::tie(b.task_id, sa, b.worker_ids);
    });
  } else {
    std::stable_sort(matches.begin(), matches.end(), [](const auto& a, const auto& b) {
      auto sa = a.worker_ids.size(), sb = b.worker_ids.size();
      return std::tie(sa, a.aggregate_distance, a.task_id, a.worker_ids) <
             std::tie(sb, b.aggregate_distance, b.task_id, b.worker_ids);
    });
  }

  std::map<int, int> remaining;
  for (const auto& [wid, w] : workers) remaining[wid] = w->capacity;
  std::map<int, bool> served;

  AssignmentInstanceSet out;
  out.slot = snap.slot;
  for (const auto& m : matches) {
    if (served[m.task_id]) continue;
    bool free = std::all_of(m.worker_ids.begin(), m.worker_ids.end(),
                            [&](int w) { return remaining[w] >= 1; });
    if (!free) continue;
    served[m.task_id] = true;
    const Task& t = *tasks[m.task_id];
    double utility = 1.0 / static_cast<double>(m.worker_ids.size());
    for (int w : m.worker_ids) {
      --remaining[w];
      out.pairs.push_back({w, m.task_id, utility,
                           distance(workers[w]->location, t.location)});
    }
    out.settled_tasks.push_back(m.task_id);
  }
  std::sort(out.pairs.begin(), out.pairs.end(), [](const auto& a, const auto& b) {
    return std::pair(a.worker_id, a.task_id) < std::pair(b.worker_id, b.task_id);
  });
  std::sort(out.settled_tasks.begin(), out.settled_tasks.end());
  return out;
}

}  // namespace detail

// Basic greedy: every correct match (no dominance filter) taken in task-id
// order, largest sets first, then lexicographic worker ids.
inline AssignmentInstanceSet gt_greedy(const SlotSnapshot& snap,
                                       int max_set_size,
                                       int candidate_limit = 8) {
  return detail::gt_assign(snap, {max_set_size, candidate_limit},
                           detail::GtOrder::task_then_workers);
}

// Greedy over non-dominated matches, fewest workers first (LWA), then least
// aggregate distance (LAD).
inline AssignmentInstanceSet gt_hgr(const SlotSnapshot& snap, int max_set_size,
                                    int candidate_limit = 8) {
  return detail::gt_assign(snap, {max_set_size, candidate_limit},
                           detail::GtOrder::least_workers_then_distance);
}

}  // namespace geocrowd
