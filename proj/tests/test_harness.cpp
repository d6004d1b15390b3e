#include <gtest/gtest.h>

#include <sstream>

#include "geocrowd/datagen.hpp"
#include "geocrowd/harness.hpp"

using namespace geocrowd;

namespace {

Worker worker_at(int id, Point p, int slot = 0) {
  Worker w;
  w.id = id;
  w.location = p;
  w.radius = 0.5;
  w.speed = 1.0;
  w.reliability = 0.9;
  w.capacity = 3;
  w.arrival_slot = slot;
  return w;
}

Task task_at(int id, Point p, double deadline, int slot = 0) {
  Task t;
  t.id = id;
  t.location = p;
  t.created_slot = slot;
  t.deadline = deadline;
  t.required_answers = 1;
  t.required_confidence = 0.7;
  return t;
}

std::string log_of(const RunResult& r) {
  std::ostringstream out;
  write_event_log(out, r.events);
  return out.str();
}

bool assigned(const RunResult& r, int worker, int task) {
  return std::any_of(r.events.begin(), r.events.end(), [&](const Event& e) {
    return e.kind == EventKind::assign && e.worker_id == worker && e.task_id == task;
  });
}

Scenario generated(Distribution d, std::uint64_t seed) {
  ScenarioConfig c;
  c.slots = 4;
  c.m = 25;
  c.n = 25;
  c.distribution = d;
  c.seed = seed;
  return generate(c);
}

}  // namespace

TEST(Registry, NamesRoundTrip) {
  EXPECT_EQ(kAlgorithms.size(), 11u);
  for (auto [alg, name] : kAlgorithms) {
    EXPECT_EQ(parse_algorithm(name), alg);
    EXPECT_EQ(to_string(alg), name);
  }
  EXPECT_FALSE(find_algorithm("foo"));
  EXPECT_THROW(parse_algorithm("foo"), std::invalid_argument);
  EXPECT_EQ(algorithm_registry().rfind("g-greedy, g-llep", 0), 0u);
  EXPECT_TRUE(is_online(Algorithm::prs));
  EXPECT_FALSE(is_online(Algorithm::rdb_dc));
}

TEST(Harness, EmptyScenarioHasZeroMetrics) {
  Scenario s;
  s.slots = 3;
  for (auto [alg, name] : kAlgorithms) {
    Metrics m = run(alg, s).metrics;
    EXPECT_EQ(m.finished, 0) << name;
    EXPECT_EQ(m.confident_finished, 0) << name;
    EXPECT_EQ(m.avg_moving_distance, 0.0) << name;
    EXPECT_EQ(m.total_distance, 0.0) << name;
  }
}

TEST(Harness, NoWorkersOnlyExpiries) {
  Scenario s;
  s.slots = 2;
  s.tasks = {task_at(1, {0.5, 0.5}, 1.5)};
  for (auto [alg, name] : kAlgorithms) {
    RunResult r = run(alg, s);
    EXPECT_EQ(r.metrics.finished, 0) << name;
    ASSERT_EQ(r.events.size(), 1u) << name;
    EXPECT_EQ(r.events[0].kind, EventKind::expire);
  }
}

TEST(Harness, OneWorkerOneTask) {
  Scenario s;
  s.slots = 2;
  s.workers = {worker_at(1, {0.5, 0.5})};
  s.tasks = {task_at(1, {0.53, 0.54}, 1.5)};
  for (auto [alg, name] : kAlgorithms) {
    RunResult r = run(alg, s);
    EXPECT_EQ(r.metrics.finished, 1) << name;
    EXPECT_EQ(r.metrics.confident_finished, 1) << name;
    EXPECT_NEAR(r.metrics.avg_moving_distance, 0.05, 1e-12) << name;
    EXPECT_EQ(r.metrics.moving_workers, 1) << name;
  }
}

TEST(Harness, OnlineThreeTaskRoute) {
  Scenario s;
  s.slots = 1;
  s.workers = {worker_at(1, {0.0, 0.0})};
  s.tasks = {task_at(1, {0.1, 0.0}, 0.15), task_at(2, {0.3, 0.0}, 0.35),
             task_at(3, {0.3, 0.4}, 0.6)};
  RunResult r = run(Algorithm::dp, s);
  EXPECT_EQ(r.metrics.finished, 2);
  EXPECT_TRUE(assigned(r, 1, 1));
  EXPECT_TRUE(assigned(r, 1, 2));
  EXPECT_FALSE(assigned(r, 1, 3));
  EXPECT_NEAR(r.metrics.total_distance, 0.3, 1e-12);
  EXPECT_EQ(run(Algorithm::bb, s).metrics.finished, 2);
}

TEST(Harness, LateAnswersDoNotFinishButDistanceCounts) {
  // Still walking to task 1 at slot 1, the worker is planned from where that
  // walk ends; task 2 looks reachable from there but the walk ends too late.
  Scenario s;
  s.slots = 3;
  Worker w = worker_at(1, {0.5, 0.5});
  w.speed = 0.1;
  w.capacity = 2;
  w.open_slots = 2;
  s.workers = {w};
  s.tasks = {task_at(1, {0.65, 0.5}, 5.0), task_at(2, {0.65, 0.54}, 1.45, 1)};
  RunResult r = run(Algorithm::g_greedy, s);
  EXPECT_TRUE(assigned(r, 1, 1));
  EXPECT_TRUE(assigned(r, 1, 2));
  EXPECT_EQ(r.metrics.finished, 1);
  EXPECT_NEAR(r.metrics.total_distance, 0.19, 1e-12);
  EXPECT_NEAR(r.metrics.avg_moving_distance, 0.19, 1e-12);
  auto expired = std::find_if(r.events.begin(), r.events.end(), [](const Event& e) {
    return e.kind == EventKind::expire && e.task_id == 2;
  });
  ASSERT_NE(expired, r.events.end());
  EXPECT_EQ(expired->value, 0.0);
}

TEST(Harness, CarriesOverPartiallyAnsweredTasks) {
  // A three-answer task gets one answer per slot from successive workers.
  Scenario s;
  s.slots = 4;
  for (int i = 0; i < 3; ++i) {
    Worker w = worker_at(i + 1, {0.5, 0.5}, i);
    w.capacity = 1;
    s.workers.push_back(w);
  }
  Task t = task_at(1, {0.5, 0.52}, 3.5);
  t.required_answers = 3;
  s.tasks = {t};
  RunResult r = run(Algorithm::g_greedy, s);
  EXPECT_EQ(r.metrics.finished, 1);
  EXPECT_EQ(r.metrics.assigned_answers, 3);
}

TEST(Harness, PrsRefinementSkipsTasksClaimedMeanwhile) {
  // Worker 1 is told only its first stop; while it walks there, worker 2
  // arrives and takes task 2, which worker 1 would otherwise visit next.
  Scenario s;
  s.slots = 2;
  Worker w1 = worker_at(1, {0.5, 0.5});
  w1.speed = 0.1;
  Task t1 = task_at(1, {0.5, 0.65}, 10.0);
  Task t2 = task_at(2, {0.5, 0.8}, 10.0);
  s.workers = {w1};
  s.tasks = {t1, t2};
  RunOptions opt;
  opt.prs_prefix = 1;

  RunResult alone = run(Algorithm::prs, s, opt);
  EXPECT_TRUE(assigned(alone, 1, 1));
  EXPECT_TRUE(assigned(alone, 1, 2));

  Worker w2 = worker_at(2, {0.5, 0.85}, 1);
  s.workers.push_back(w2);
  RunResult shared = run(Algorithm::prs, s, opt);
  EXPECT_TRUE(assigned(shared, 1, 1));
  EXPECT_TRUE(assigned(shared, 2, 2));
  EXPECT_FALSE(assigned(shared, 1, 2));
  EXPECT_EQ(shared.metrics.finished, 2);
}

TEST(Harness, RejectsWrongMode) {
  Scenario s;
  EXPECT_THROW(run_batch(Algorithm::dp, s), std::invalid_argument);
  EXPECT_THROW(run_online(Algorithm::g_greedy, s), std::invalid_argument);
}

TEST(Harness, DeterministicAndConsistent) {
  for (auto d : {Distribution::unif, Distribution::gaus, Distribution::skew}) {
    Scenario s = generated(d, 7);
    for (auto [alg, name] : kAlgorithms) {
      RunOptions opt;
      opt.seed = 7;
      RunResult a = run(alg, s, opt), b = run(alg, s, opt);
      EXPECT_EQ(log_of(a), log_of(b)) << name;
      EXPECT_EQ(a.metrics.finished, b.metrics.finished) << name;
      EXPECT_EQ(a.metrics.avg_moving_distance, b.metrics.avg_moving_distance) << name;
      EXPECT_LE(a.metrics.confident_finished, a.metrics.finished) << name;
      EXPECT_GE(a.metrics.running_time, 0.0);
      if (is_correct_match(alg)) {
        EXPECT_EQ(a.metrics.confident_finished, a.metrics.finished) << name;
      }
    }
  }
}

TEST(Harness, EventLogFormat) {
  Scenario s;
  s.slots = 2;
  s.workers = {worker_at(1, {0.5, 0.5})};
  s.tasks = {task_at(1, {0.53, 0.54}, 1.5)};
  std::string log = log_of(run(Algorithm::g_greedy, s));
  EXPECT_EQ(log,
            "slot,event_kind,worker_id,task_id,value\n"
            "0,assign,1,1,0.05\n"
            "0,arrive,1,1,0.05\n"
            "0,finish,-1,1,0.9\n");
}

TEST(Harness, CircleGeometryIsStricter) {
  Scenario s;
  s.slots = 1;
  Worker w = worker_at(1, {0.5, 0.5});
  w.radius = 0.1;
  s.workers = {w};
  s.tasks = {task_at(1, {0.59, 0.59}, 0.9)};
  RunOptions square, circle;
  circle.geometry = Geometry::circle;
  EXPECT_EQ(run(Algorithm::g_greedy, s, square).metrics.finished, 1);
  EXPECT_EQ(run(Algorithm::g_greedy, s, circle).metrics.finished, 0);
}
