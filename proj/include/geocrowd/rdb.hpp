#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "geocrowd/domain.hpp"
#include "geocrowd/rng.hpp"

namespace geocrowd {

// Sample-size search record for the sampling algorithm.
struct SampleBound {
  double epsilon = 0.1;
  double delta = 0.9;
  double population = 1.0;  // N, may be +inf for astronomically large spaces
  double m_cut = 0.0;       // M = floor((1 - epsilon) * N)
  double p = 1.0;
  double interval_low = 0.0;  // exclusive lower end of the search bracket
  std::int64_t k = 1;
};

// Probability that K distinct uniform draws from N all fall among the bottom
// M ranks: C(M, K) / C(N, K).
inline double bottom_rank_probability(double population, double m_cut,
                                      std::int64_t k) {
  if (static_cast<double>(k) > m_cut) return 0.0;
  long double ratio = 1.0L;
  for (std::int64_t i = 0; i < k; ++i) {
    ratio *= (static_cast<long double>(m_cut) - i) /
             (static_cast<long double>(population) - i);
    if (ratio == 0.0L) break;
  }
  return static_cast<double>(ratio);
}

inline SampleBound rdb_sample_bound(double epsilon, double delta,
                                    double population, double p) {
  if (!(epsilon > 0.0 && epsilon < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("epsilon and delta must lie in (0, 1)");
  }
  if (!(population >= 1.0) || !(p > 0.0 || population > 1e300) || p > 1.0) {
    throw std::invalid_argument("population must be >= 1 and p in (0, 1]");
  }
  SampleBound b;
  b.epsilon = epsilon;
  b.delta = delta;
  b.population = std::isfinite(population) ? std::floor(population) : population;
  b.p = p;
  if (b.population <= 1.0) {
    b.k = 1;
    return b;
  }
  const double e = std::exp(1.0);
  const double target = 1.0 - delta;

  std::function<double(std::int64_t)> prob;
  std::int64_t upper;
  if (std::isfinite(b.population) && b.population < 9e15) {
    b.m_cut = std::floor((1.0 - epsilon) * b.population);
    prob = [&](std::int64_t k) {
      return bottom_rank_probability(b.population, b.m_cut, k);
    };
    upper = static_cast<std::int64_t>(b.m_cut);
  } else {
    // Huge populations: the ratio tends to (1 - epsilon)^K.
    b.m_cut = (1.0 - epsilon) * b.population;
    prob = [&](std::int64_t k) {
      return std::pow(1.0 - epsilon, static_cast<double>(k));
    };
    upper = std::numeric_limits<std::int32_t>::max();
  }
  b.interval_low =
      (p * b.m_cut * e - 1.0 + p) / (1.0 - p + e * p);
  if (!std::isfinite(b.interval_low)) b.interval_low = 0.0;

  std::int64_t lo = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::floor(std::max(b.interval_low, 0.0))) + 1);
  if (lo > upper) {
    throw std::domain_error("empty sample-size search interval");
  }
  // prob is nonincreasing in K. If the bracket's lower end already qualifies,
  // search below it so the returned K stays minimal; otherwise gallop upward
  // to bracket the first qualifying K.
  std::int64_t hi = lo;
  if (prob(lo) <= target) {
    lo = 1;
  } else {
    while (prob(hi) > target) {
      if (hi == upper) {
        throw std::domain_error("no sample size within the search interval "
                                "meets the (epsilon, delta) bound");
      }
      lo = hi + 1;
      hi = std::min(upper, hi * 2);
    }
  }
  while (lo < hi) {
    std::int64_t mid = lo + (hi - lo) / 2;
    if (prob(mid) <= target) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  b.k = lo;
  return b;
}

inline std::int64_t rdb_sample_size(double epsilon, double delta,
                                    double population, double p) {
  return rdb_sample_bound(epsilon, delta, population, p).k;
}

namespace detail {

struct WorkerView {
  const Worker* worker;
  std::vector<const Task*> tasks;  // feasible, id order
};

inline std::vector<WorkerView> feasible_views(const SlotSnapshot& snap) {
  std::vector<WorkerView> views;
  auto wi = order_by_id(std::span<const Worker>(snap.workers));
  auto ti = order_by_id(std::span<const Task>(snap.tasks));
  for (auto a : wi) {
    const Worker& w = snap.workers[a];
    if (w.capacity < 1) continue;
    WorkerView v{&w, {}};
    for (auto b : ti) {
      const Task& t = snap.tasks[b];
      if (t.remaining_answers() >= 1 && feasible(w, t, snap.slot, snap.geometry)) {
        v.tasks.push_back(&t);
      }
    }
    views.push_back(std::move(v));
  }
  return views;
}

// Minimum majority accuracy over the tasks a set touches; -1 when empty.
inline double min_task_reliability(const std::vector<AssignmentPair>& pairs,
                                   const std::map<int, const Worker*>& workers) {
  if (pairs.empty()) return -1.0;
  std::map<int, std::vector<std::pair<int, double>>> by_task;
  for (const auto& p : pairs) {
    by_task[p.task_id].emplace_back(p.worker_id, workers.at(p.worker_id)->reliability);
  }
  double worst = 1.0;
  for (auto& [tid, members] : by_task) {
    std::sort(members.begin(), members.end());
    std::vector<double> r;
    for (auto& m : members) r.push_back(m.second);
    worst = std::min(worst, majority_accuracy(r));
  }
  return worst;
}

inline void sort_pairs(std::vector<AssignmentPair>& pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    return std::pair(a.worker_id, a.task_id) < std::pair(b.worker_id, b.task_id);
  });
}

}  // namespace detail

// Random assignment sampling: draws K random feasible assignment sets and
// keeps the one whose least reliable task is most reliable (more pairs, then
// earlier draw, break ties). K comes from rdb_sample_size unless given.
inline AssignmentInstanceSet rdb_sam(const SlotSnapshot& snap, double epsilon,
                                     double delta, std::uint64_t rng_seed,
                                     std::optional<std::int64_t> sample_count = {}) {
  AssignmentInstanceSet best;
  best.slot = snap.slot;
  auto views = detail::feasible_views(snap);
  double log_population = 0.0;
  for (const auto& v : views) {
    if (!v.tasks.empty()) log_population += std::log(static_cast<double>(v.tasks.size()));
  }
  if (std::all_of(views.begin(), views.end(), [](auto& v) { return v.tasks.empty(); })) {
    return best;
  }

  std::int64_t k;
  if (sample_count) {
    k = std::max<std::int64_t>(1, *sample_count);
  } else {
    // Exact integer while it fits in a double's mantissa.
    double population = log_population < 36.0 ? std::round(std::exp(log_population))
                                              : std::exp(log_population);
    double p = 1.0 / population;
    try {
      k = rdb_sample_size(epsilon, delta, population, p);
    } catch (const std::domain_error&) {
      // Tiny sample spaces: draw as many samples as there are outcomes.
      k = static_cast<std::int64_t>(std::ceil(population));
    }
  }

  std::map<int, const Worker*> workers;
  for (const auto& w : snap.workers) workers[w.id] = &w;
  std::map<int, int> base_need;
  for (const auto& t : snap.tasks) base_need[t.id] = t.remaining_answers();

  Rng rng(rng_seed);
  double best_score = -2.0;
  std::size_t best_pairs = 0;
  for (std::int64_t s = 0; s < k; ++s) {
    std::vector<std::size_t> order(views.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order.begin(), order.end());
    auto need = base_need;
    std::vector<AssignmentPair> pairs;
    for (auto i : order) {
      const auto& v = views[i];
      std::vector<const Task*> open;
      for (const Task* t : v.tasks) {
        if (need[t->id] > 0) open.push_back(t);
      }
      std::size_t take = std::min<std::size_t>(v.worker->capacity, open.size());
      // Partial Fisher-Yates: a uniform subset of size `take`.
      for (std::size_t j = 0; j < take; ++j) {
        std::size_t pick = j + rng.index(open.size() - j);
        std::swap(open[j], open[pick]);
        const Task* t = open[j];
        --need[t->id];
        pairs.push_back({v.worker->id, t->id, 1.0,
                         distance(v.worker->location, t->location)});
      }
    }
    double score = detail::min_task_reliability(pairs, workers);
    if (score > best_score || (score == best_score && pairs.size() > best_pairs)) {
      best_score = score;
      best_pairs = pairs.size();
      best.pairs = std::move(pairs);
    }
  }
  detail::sort_pairs(best.pairs);
  return best;
}

namespace detail {

struct DcSolver {
  const SlotSnapshot& snap;
  std::map<int, const Worker*> workers;
  std::map<int, const Task*> tasks;
  int leaf_size;

  DcSolver(const SlotSnapshot& s, int leaf) : snap(s), leaf_size(leaf) {
    for (const auto& w : snap.workers) workers[w.id] = &w;
    for (const auto& t : snap.tasks) tasks[t.id] = &t;
  }

  double task_score(const std::vector<int>& members) const {
    std::vector<int> ids = members;
    std::sort(ids.begin(), ids.end());
    std::vector<double> r;
    for (int w : ids) r.push_back(workers.at(w)->reliability);
    return majority_accuracy(r);
  }

  // Per task: its most reliable feasible workers up to the remaining need,
  // using each worker's full capacity within this leaf.
  std::vector<AssignmentPair> solve_leaf(const std::vector<const Task*>& leaf) const {
    std::map<int, int> cap;
    for (const auto& [id, w] : workers) cap[id] = w->capacity;
    std::vector<AssignmentPair> out;
    for (const Task* t : leaf) {
      std::vector<const Worker*> cand;
      for (const auto& [id, w] : workers) {
        if (cap[id] >= 1 && feasible(*w, *t, snap.slot, snap.geometry)) cand.push_back(w);
      }
      std::stable_sort(cand.begin(), cand.end(), [](auto* a, auto* b) {
        if (a->reliability != b->reliability) return a->reliability > b->reliability;
        return a->id < b->id;
      });
      int need = t->remaining_answers();
      for (const Worker* w : cand) {
        if (need <= 0) break;
        --cap[w->id];
        --need;
        out.push_back({w->id, t->id, 1.0, distance(w->location, t->location)});
      }
    }
    return out;
  }

  // Resolves workers assigned beyond capacity: drop the assignment whose loss
  // of task score is smallest and hand it to the most reliable free worker.
  void repair(std::vector<AssignmentPair>& pairs) const {
    std::map<int, int> load;
    std::map<int, std::vector<int>> members;
    for (const auto& p : pairs) {
      ++load[p.worker_id];
      members[p.task_id].push_back(p.worker_id);
    }
    for (const auto& [wid, w] : workers) {
      while (load[wid] > w->capacity) {
        std::size_t drop = pairs.size();
        double drop_cost = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pairs.size(); ++i) {
          if (pairs[i].worker_id != wid) continue;
          const auto& with = members[pairs[i].task_id];
          auto without = with;
          without.erase(std::find(without.begin(), without.end(), wid));
          double cost = task_score(with) - task_score(without);
          if (cost < drop_cost ||
              (cost == drop_cost && pairs[i].task_id < pairs[drop].task_id)) {
            drop = i;
            drop_cost = cost;
          }
        }
        int task_id = pairs[drop].task_id;
        pairs.erase(pairs.begin() + static_cast<std::ptrdiff_t>(drop));
        --load[wid];
        auto& current = members[task_id];
        current.erase(std::find(current.begin(), current.end(), wid));

        const Task& t = *tasks.at(task_id);
        const Worker* sub = nullptr;
        for (const auto& [cid, c] : workers) {
          if (cid == wid || load[cid] >= c->capacity) continue;
          if (std::find(current.begin(), current.end(), cid) != current.end()) continue;
          if (!feasible(*c, t, snap.slot, snap.geometry)) continue;
          if (!sub || c->reliability > sub->reliability) sub = c;
        }
        if (sub) {
          pairs.push_back({sub->id, task_id, 1.0, distance(sub->location, t.location)});
          ++load[sub->id];
          current.push_back(sub->id);
        }
      }
    }
  }

  std::vector<AssignmentPair> solve(std::vector<const Task*> part, int depth) const {
    if (static_cast<int>(part.size()) <= leaf_size) return solve_leaf(part);
    bool by_x = depth % 2 == 0;
    std::stable_sort(part.begin(), part.end(), [&](const Task* a, const Task* b) {
      double ka = by_x ? a->location.x : a->location.y;
      double kb = by_x ? b->location.x : b->location.y;
      if (ka != kb) return ka < kb;
      return a->id < b->id;
    });
    std::size_t mid = part.size() / 2;
    std::vector<const Task*> left(part.begin(), part.begin() + static_cast<std::ptrdiff_t>(mid));
    std::vector<const Task*> right(part.begin() + static_cast<std::ptrdiff_t>(mid), part.end());
    auto merged = solve(std::move(left), depth + 1);
    auto rhs = solve(std::move(right), depth + 1);
    merged.insert(merged.end(), rhs.begin(), rhs.end());
    repair(merged);
    return merged;
  }
};

}  // namespace detail

// Divide and conquer: median splits on alternating axes down to leaf_size
// tasks, greedy leaves, capacity conflicts repaired while merging.
inline AssignmentInstanceSet rdb_dc(const SlotSnapshot& snap, int leaf_size = 8) {
  if (leaf_size < 1) throw std::invalid_argument("leaf_size must be >= 1");
  detail::DcSolver solver(snap, leaf_size);
  std::vector<const Task*> all;
  for (const auto& [id, t] : solver.tasks) {
    if (t->remaining_answers() >= 1) all.push_back(t);
  }
  AssignmentInstanceSet out;
  out.slot = snap.slot;
  out.pairs = solver.solve(std::move(all), 0);
  detail::sort_pairs(out.pairs);
  return out;
}

}  // namespace geocrowd
