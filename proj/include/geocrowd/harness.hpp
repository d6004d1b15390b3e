#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "geocrowd/batch.hpp"
#include "geocrowd/correct_match.hpp"
#include "geocrowd/datagen.hpp"
#include "geocrowd/domain.hpp"
#include "geocrowd/entropy.hpp"
#include "geocrowd/online.hpp"
#include "geocrowd/rdb.hpp"
#include "geocrowd/rng.hpp"
#include "geocrowd/validate.hpp"

namespace geocrowd {

enum class Algorithm { g_greedy, g_llep, g_nnp, gt_greedy, gt_hgr, rdb_sam, rdb_dc, dp, bb, ha, prs };

inline constexpr std::array<std::pair<Algorithm, std::string_view>, 11> kAlgorithms{{
    {Algorithm::g_greedy, "g-greedy"},
    {Algorithm::g_llep, "g-llep"},
    {Algorithm::g_nnp, "g-nnp"},
    {Algorithm::gt_greedy, "gt-greedy"},
    {Algorithm::gt_hgr, "gt-hgr"},
    {Algorithm::rdb_sam, "rdb-sam"},
    {Algorithm::rdb_dc, "rdb-dc"},
    {Algorithm::dp, "dp"},
    {Algorithm::bb, "bb"},
    {Algorithm::ha, "ha"},
    {Algorithm::prs, "prs"},
}};

inline std::string_view to_string(Algorithm a) {
  for (auto [alg, name] : kAlgorithms) {
    if (alg == a) return name;
  }
  return "?";
}

inline std::string algorithm_registry() {
  std::string s;
  for (auto [alg, name] : kAlgorithms) {
    if (!s.empty()) s += ", ";
    s += name;
  }
  return s;
}

inline std::optional<Algorithm> find_algorithm(std::string_view name) {
  for (auto [alg, n] : kAlgorithms) {
    if (n == name) return alg;
  }
  return std::nullopt;
}

inline Algorithm parse_algorithm(std::string_view name) {
  if (auto a = find_algorithm(name)) return *a;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                              "'; known algorithms: " + algorithm_registry());
}

inline bool is_online(Algorithm a) {
  return a == Algorithm::dp || a == Algorithm::bb || a == Algorithm::ha || a == Algorithm::prs;
}

inline bool is_correct_match(Algorithm a) {
  return a == Algorithm::gt_greedy || a == Algorithm::gt_hgr;
}

struct RunOptions {
  Geometry geometry = Geometry::square;
  std::uint64_t seed = 1;
  double rdb_epsilon = 0.1;
  double rdb_delta = 0.9;
  int dc_leaf_size = 8;
  int gt_max_set_size = 9;
  int gt_candidate_limit = 8;
  int prs_prefix = 2;
  std::size_t online_task_limit = 20;  // nearest candidates kept per query
  double cell_side = 0.05;
};

struct Metrics {
  double avg_moving_distance = 0.0;
  int finished = 0;
  int confident_finished = 0;
  double running_time = 0.0;  // seconds spent inside algorithm calls
  double total_distance = 0.0;
  int moving_workers = 0;
  int assigned_answers = 0;
  int truncated_queries = 0;  // online queries cut to the task limit
};

enum class EventKind { assign, arrive, finish, expire };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::assign: return "assign";
    case EventKind::arrive: return "arrive";
    case EventKind::finish: return "finish";
    case EventKind::expire: return "expire";
  }
  return "?";
}

// assign: value = leg length; arrive: value = arrival time;
// finish: value = aggregate reputation of the answer set;
// expire: value = answers received on time.
struct Event {
  double time = 0.0;
  EventKind kind = EventKind::assign;
  int worker_id = -1;
  int task_id = -1;
  double value = 0.0;
};

struct RunResult {
  Metrics metrics;
  std::vector<Event> events;
};

inline void write_event_log(std::ostream& out, const std::vector<Event>& events) {
  char buf[64];
  out << "slot,event_kind,worker_id,task_id,value\n";
  for (const auto& e : events) {
    std::snprintf(buf, sizeof buf, "%.9g", e.value);
    out << static_cast<long long>(std::floor(e.time)) << ',' << to_string(e.kind) << ','
        << e.worker_id << ',' << e.task_id << ',' << buf << '\n';
  }
}

namespace detail {

struct Leg {
  double arrival;
  int worker_id;
  int task_id;

  bool operator>(const Leg& o) const {
    return std::tie(arrival, worker_id, task_id) > std::tie(o.arrival, o.worker_id, o.task_id);
  }
};

struct TaskState {
  Task task;                  // required_answers is the current quota
  std::vector<int> answered;  // workers that arrived in time
  bool done = false;          // finished or expired
};

struct WorkerState {
  Worker worker;
  Point position;        // where the worker's itinerary ends
  double free_at = 0.0;  // when that itinerary ends
  int load = 0;          // committed legs not yet arrived
  double travelled = 0.0;
};

// Visiting order for the tasks a worker receives in one batch: the order
// reaching the most of them by their deadlines, then the shortest, then the
// lexicographically smallest by id. Large batches fall back to deadline order.
inline std::vector<int> plan_legs(const Worker& w, Point from, double start,
                                  std::vector<const Task*> batch) {
  std::sort(batch.begin(), batch.end(), [](auto* a, auto* b) { return a->id < b->id; });
  auto ids = [&] {
    std::vector<int> out;
    for (auto* t : batch) out.push_back(t->id);
    return out;
  };
  if (batch.size() > 7) {
    std::stable_sort(batch.begin(), batch.end(), [](auto* a, auto* b) {
      return std::tie(a->deadline, a->id) < std::tie(b->deadline, b->id);
    });
    return ids();
  }
  std::vector<const Task*> best = batch;
  int best_on_time = -1;
  double best_length = 0.0;
  do {
    Point here = from;
    double t = start, length = 0.0;
    int on_time = 0;
    for (auto* task : batch) {
      double d = distance(here, task->location);
      t += d / w.speed;
      length += d;
      on_time += t <= task->deadline;
      here = task->location;
    }
    if (on_time > best_on_time || (on_time == best_on_time && length < best_length)) {
      best = batch;
      best_on_time = on_time;
      best_length = length;
    }
  } while (std::next_permutation(batch.begin(), batch.end(),
                                 [](auto* a, auto* b) { return a->id < b->id; }));
  batch = best;
  return ids();
}

// Task lifecycle and travel bookkeeping shared by both modes.
class World {
 public:
  explicit World(const Scenario& s) {
    for (const auto& w : s.workers) {
      workers_.emplace(w.id, WorkerState{w, w.location, static_cast<double>(w.arrival_slot), 0, 0.0});
    }
    for (const auto& t : s.tasks) {
      tasks_.emplace(t.id, TaskState{t, {}, false});
    }
  }

  std::map<int, WorkerState>& workers() { return workers_; }
  std::map<int, TaskState>& tasks() { return tasks_; }
  RunResult& result() { return result_; }

  void time_call(auto&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    result_.metrics.running_time +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  // Sends the worker from `from` at `start` to the task and returns the arrival.
  double dispatch(WorkerState& ws, TaskState& ts, Point from, double start, double now) {
    double d = distance(from, ts.task.location);
    double arrival = start + d / ws.worker.speed;
    ts.task.assigned_workers.push_back(ws.worker.id);
    ++ws.load;
    ws.travelled += d;
    result_.metrics.total_distance += d;
    ++result_.metrics.assigned_answers;
    legs_.push({arrival, ws.worker.id, ts.task.id});
    result_.events.push_back({now, EventKind::assign, ws.worker.id, ts.task.id, d});
    return arrival;
  }

  bool has_leg_until(double t) const { return !legs_.empty() && legs_.top().arrival <= t; }
  bool has_legs() const { return !legs_.empty(); }

  void arrive_next() {
    Leg leg = legs_.top();
    legs_.pop();
    auto& ws = workers_.at(leg.worker_id);
    --ws.load;
    auto& ts = tasks_.at(leg.task_id);
    result_.events.push_back({leg.arrival, EventKind::arrive, leg.worker_id, leg.task_id, leg.arrival});
    if (ts.done || leg.arrival > ts.task.deadline) return;
    ts.answered.push_back(leg.worker_id);
    if (static_cast<int>(ts.answered.size()) < ts.task.required_answers) return;
    ts.done = true;
    std::vector<int> ids = ts.answered;
    std::sort(ids.begin(), ids.end());
    std::vector<double> r;
    for (int id : ids) r.push_back(workers_.at(id).worker.reliability);
    double ars = majority_accuracy(r);
    ++result_.metrics.finished;
    if (r.size() % 2 == 1 && ars >= ts.task.required_confidence) {
      ++result_.metrics.confident_finished;
    }
    result_.events.push_back({leg.arrival, EventKind::finish, -1, ts.task.id, ars});
  }

  void expire(TaskState& ts, double time) {
    if (ts.done) return;
    ts.done = true;
    result_.events.push_back({time, EventKind::expire, -1, ts.task.id,
                              static_cast<double>(ts.answered.size())});
  }

  void finalize() {
    auto& m = result_.metrics;
    // Averaged over workers that received at least one task, including those
    // whose tasks were at their own location.
    m.moving_workers = static_cast<int>(assigned_.size());
    m.avg_moving_distance = m.moving_workers ? m.total_distance / m.moving_workers : 0.0;
  }

  void mark_assigned(int worker_id) { assigned_.insert(worker_id); }

 private:
  std::map<int, WorkerState> workers_;
  std::map<int, TaskState> tasks_;
  std::priority_queue<Leg, std::vector<Leg>, std::greater<>> legs_;
  std::set<int> assigned_;
  RunResult result_;
};

}  // namespace detail

// Periodic global assignment. Each slot p: deliver answers arriving by p,
// expire tasks whose deadline has passed, build the snapshot of active
// workers with spare capacity and open tasks still short of answers, run the
// algorithm, validate and commit its pairs. A worker travels its new tasks in
// the order given by plan_legs, starting when its previous itinerary ends.
inline RunResult run_batch(Algorithm alg, const Scenario& scenario, const RunOptions& opt = {}) {
  if (is_online(alg)) {
    throw std::invalid_argument(std::string(to_string(alg)) + " is not a batch algorithm");
  }
  detail::World world(scenario);
  VisitHistory history(opt.cell_side);
  auto& workers = world.workers();
  auto& tasks = world.tasks();

  for (int p = 0; p < scenario.slots; ++p) {
    while (world.has_leg_until(p)) world.arrive_next();
    for (auto& [id, ts] : tasks) {
      if (!ts.done && ts.task.created_slot <= p && ts.task.deadline <= p) world.expire(ts, p);
    }

    SlotSnapshot snap;
    snap.slot = p;
    snap.geometry = opt.geometry;
    for (auto& [id, ws] : workers) {
      const Worker& w = ws.worker;
      if (w.arrival_slot > p || p >= w.arrival_slot + w.open_slots) continue;
      int spare = w.capacity - ws.load;
      if (spare < 1) continue;
      Worker view = w;
      view.location = ws.position;
      view.capacity = spare;
      snap.workers.push_back(view);
    }
    for (auto& [id, ts] : tasks) {
      if (ts.done || ts.task.created_slot > p) continue;
      if (ts.task.remaining_answers() < 1) continue;
      snap.tasks.push_back(ts.task);
    }

    AssignmentInstanceSet result;
    if (!snap.workers.empty() && !snap.tasks.empty()) {
      world.time_call([&] {
        switch (alg) {
          case Algorithm::g_greedy: result = g_greedy(snap); break;
          case Algorithm::g_llep: result = g_llep(snap, history); break;
          case Algorithm::g_nnp: result = g_nnp(snap); break;
          case Algorithm::gt_greedy:
            result = gt_greedy(snap, opt.gt_max_set_size, opt.gt_candidate_limit);
            break;
          case Algorithm::gt_hgr:
            result = gt_hgr(snap, opt.gt_max_set_size, opt.gt_candidate_limit);
            break;
          case Algorithm::rdb_sam:
            result = rdb_sam(snap, opt.rdb_epsilon, opt.rdb_delta,
                             mix_seed(opt.seed, static_cast<std::uint64_t>(p)));
            break;
          case Algorithm::rdb_dc: result = rdb_dc(snap, opt.dc_leaf_size); break;
          default: break;
        }
      });
      if (auto v = validate(result, snap)) throw ValidationError(*v);
    }

    std::map<int, std::vector<int>> by_worker;
    for (const auto& pr : result.pairs) by_worker[pr.worker_id].push_back(pr.task_id);
    for (int id : result.settled_tasks) {
      auto& t = tasks.at(id).task;
      int incoming = 0;
      for (const auto& pr : result.pairs) incoming += pr.task_id == id;
      t.required_answers = static_cast<int>(t.assigned_workers.size()) + incoming;
    }
    for (auto& [wid, task_ids] : by_worker) {
      auto& ws = workers.at(wid);
      Point from = ws.position;
      double t = std::max<double>(p, ws.free_at);
      std::vector<const Task*> batch;
      for (int tid : task_ids) batch.push_back(&tasks.at(tid).task);
      task_ids = detail::plan_legs(ws.worker, from, t, batch);
      for (int tid : task_ids) {
        auto& ts = tasks.at(tid);
        t = world.dispatch(ws, ts, from, t, p);
        from = ts.task.location;
      }
      ws.position = from;
      ws.free_at = t;
      world.mark_assigned(wid);
    }
    for (const auto& w : snap.workers) history.record_worker(w, opt.geometry);
  }

  while (world.has_legs()) world.arrive_next();
  for (auto& [id, ts] : tasks) {
    world.expire(ts, std::max<double>(ts.task.deadline, scenario.slots));
  }
  world.finalize();
  return std::move(world.result());
}

// Per-worker route planning. Workers query once, at their arrival slot, in
// id order; each query sees open tasks with unreserved answers that the
// worker can reach (the nearest online_task_limit of them) and reserves one
// answer of every task on the returned route. PRS reserves only its prefix
// and extends the route when the prefix is done, over the query's tasks
// still available then.
inline RunResult run_online(Algorithm alg, const Scenario& scenario, const RunOptions& opt = {}) {
  if (!is_online(alg)) {
    throw std::invalid_argument(std::string(to_string(alg)) + " is not an online algorithm");
  }
  detail::World world(scenario);
  auto& workers = world.workers();
  auto& tasks = world.tasks();
  std::map<int, int> reserved;  // task id -> answer units taken

  enum Kind { kExpire = 0, kQuery = 1, kRefine = 2 };
  struct Pending {
    double time;
    int kind;
    int id;
    bool operator>(const Pending& o) const {
      return std::tie(time, kind, id) > std::tie(o.time, o.kind, o.id);
    }
  };
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;
  for (const auto& [id, ts] : tasks) queue.push({ts.task.deadline, kExpire, id});
  for (const auto& [id, ws] : workers) {
    queue.push({static_cast<double>(ws.worker.arrival_slot), kQuery, id});
  }

  struct Refinement {
    Schedule initial;
    double query_time;
    std::vector<int> candidate_ids;
  };
  std::map<int, Refinement> refinements;

  auto available = [&](const detail::TaskState& ts, double now) {
    return !ts.done && ts.task.created_slot <= now && ts.task.deadline > now &&
           reserved[ts.task.id] < ts.task.required_answers;
  };

  auto commit = [&](detail::WorkerState& ws, const Schedule& s, std::size_t from_index,
                    double now) {
    Point from = from_index == 0 ? ws.worker.location : s.stops[from_index - 1];
    double t = from_index == 0 ? now : s.arrival_times[from_index - 1];
    for (std::size_t i = from_index; i < s.task_ids.size(); ++i) {
      auto& ts = tasks.at(s.task_ids[i]);
      ++reserved[ts.task.id];
      t = world.dispatch(ws, ts, from, t, now);
      from = ts.task.location;
    }
    if (s.task_ids.size() > from_index) world.mark_assigned(ws.worker.id);
    ws.position = from;
    ws.free_at = t;
  };

  RouteOptions route;
  route.dp_task_limit = std::max<std::size_t>(opt.online_task_limit, 1);

  while (!queue.empty()) {
    Pending ev = queue.top();
    queue.pop();
    while (world.has_leg_until(ev.time)) world.arrive_next();

    if (ev.kind == kExpire) {
      auto& ts = tasks.at(ev.id);
      if (!ts.done) world.expire(ts, ev.time);
      continue;
    }

    auto& ws = workers.at(ev.id);
    const Worker& w = ws.worker;
    if (ev.kind == kQuery) {
      std::vector<Task> cand;
      for (auto& [id, ts] : tasks) {
        if (available(ts, ev.time) && feasible(w, ts.task, ev.time, opt.geometry)) {
          cand.push_back(ts.task);
        }
      }
      std::stable_sort(cand.begin(), cand.end(), [&](const Task& a, const Task& b) {
        double da = distance(w.location, a.location), db = distance(w.location, b.location);
        return da != db ? da < db : a.id < b.id;
      });
      if (cand.size() > opt.online_task_limit) {
        cand.resize(opt.online_task_limit);
        ++world.result().metrics.truncated_queries;
      }
      std::sort(cand.begin(), cand.end(), [](const Task& a, const Task& b) { return a.id < b.id; });
      route.max_tasks = static_cast<std::size_t>(w.capacity);

      Schedule s;
      ProgressiveSchedule ps;
      world.time_call([&] {
        switch (alg) {
          case Algorithm::dp: s = dp_schedule(w, cand, ev.time, route); break;
          case Algorithm::bb: s = bb_schedule(w, cand, ev.time, route); break;
          case Algorithm::ha: s = ha_schedule(w, cand, ev.time, route); break;
          case Algorithm::prs:
            ps = prs_schedule(w, cand, ev.time, opt.prs_prefix, route);
            s = ps.initial;
            break;
          default: break;
        }
      });
      if (auto v = validate(s, w, cand, ev.time, opt.geometry, route.max_tasks)) {
        throw ValidationError(*v);
      }
      commit(ws, s, 0, ev.time);
      if (alg == Algorithm::prs && ps.refined.completed_count() > ps.initial.completed_count()) {
        Refinement r{ps.initial, ev.time, {}};
        for (const auto& t : cand) r.candidate_ids.push_back(t.id);
        refinements.emplace(w.id, std::move(r));
        queue.push({ps.initial.arrival_times.back(), kRefine, w.id});
      }
      continue;
    }

    // Refinement: extend the reported prefix over what is still available.
    auto node = refinements.extract(ev.id);
    const Refinement& r = node.mapped();
    std::vector<Task> still;
    for (int id : r.candidate_ids) {
      const auto& ts = tasks.at(id);
      bool in_prefix = std::find(r.initial.task_ids.begin(), r.initial.task_ids.end(), id) !=
                       r.initial.task_ids.end();
      if (in_prefix || available(ts, ev.time)) still.push_back(ts.task);
    }
    route.max_tasks = static_cast<std::size_t>(w.capacity);
    Schedule refined;
    world.time_call([&] { refined = extend_schedule(r.initial, w, still, r.query_time, route); });
    if (auto v = validate(refined, w, still, r.query_time, opt.geometry, route.max_tasks)) {
      throw ValidationError(*v);
    }
    commit(ws, refined, r.initial.task_ids.size(), ev.time);
  }

  while (world.has_legs()) world.arrive_next();
  for (auto& [id, ts] : tasks) world.expire(ts, ts.task.deadline);
  world.finalize();
  return std::move(world.result());
}

inline RunResult run(Algorithm alg, const Scenario& scenario, const RunOptions& opt = {}) {
  return is_online(alg) ? run_online(alg, scenario, opt) : run_batch(alg, scenario, opt);
}

}  // namespace geocrowd
