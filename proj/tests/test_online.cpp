#include <gtest/gtest.h>

#include <map>

#include "geocrowd/online.hpp"
#include "geocrowd/validate.hpp"
#include "oracles.hpp"

using namespace geocrowd;

namespace {

Worker walker(Point p, double speed = 1.0, int id = 1) {
  Worker w;
  w.id = id;
  w.location = p;
  w.radius = 100.0;
  w.speed = speed;
  w.capacity = 10;
  return w;
}

Task stop(int id, Point p, double deadline) {
  Task t;
  t.id = id;
  t.location = p;
  t.deadline = deadline;
  t.required_confidence = 0.7;
  return t;
}

// A(0.1,0) by 0.15, B(0.3,0) by 0.35, C(0.3,0.4) by 0.6; best is A then B.
std::vector<Task> three_tasks(double now = 0.0) {
  return {stop(1, {0.1, 0.0}, now + 0.15), stop(2, {0.3, 0.0}, now + 0.35),
          stop(3, {0.3, 0.4}, now + 0.6)};
}

// Five tasks around a worker at (6,5) with speed 1; only A,E,C,D completes
// four of them.
enum : int { A = 1, B = 2, C = 3, D = 4, E = 5 };
std::vector<Task> five_tasks() {
  return {stop(A, {6, 6}, 1.5), stop(B, {3, 5}, 3.2), stop(C, {8, 8}, 5.5),
          stop(D, {8, 6}, 7.5), stop(E, {6, 8}, 3.5)};
}

void expect_valid(const Schedule& s, const Worker& w, std::span<const Task> tasks, double now,
                  std::size_t max_tasks = std::numeric_limits<std::size_t>::max()) {
  auto v = validate(s, w, tasks, now, Geometry::square, max_tasks);
  EXPECT_FALSE(v) << (v ? v->describe() : "");
  for (std::size_t i = 1; i < s.arrival_times.size(); ++i) {
    EXPECT_LT(s.arrival_times[i - 1], s.arrival_times[i]);
  }
}

}  // namespace

TEST(CanAppend, Examples) {
  Worker w = walker({0, 0});
  Schedule empty;
  EXPECT_TRUE(can_append(empty, stop(1, {0.05, 0}, 10.0), w, 0.0));
  EXPECT_FALSE(can_append(empty, stop(1, {0.05, 0}, 1.0), w, 2.0));

  Task x = stop(1, {0.2, 0.0}, 0.2);
  Task y = stop(2, {0.0, 0.2}, 5.0);
  EXPECT_TRUE(can_append(empty, x, w, 0.0));
  Schedule s;
  append_stop(s, y, w, 0.0);
  EXPECT_FALSE(can_append(s, x, w, 0.0));
}

TEST(DpSchedule, Empty) {
  EXPECT_TRUE(dp_schedule(walker({0, 0}), std::vector<Task>{}, 0.0).empty());
}

TEST(DpSchedule, ThreeTasks) {
  auto tasks = three_tasks();
  Schedule s = dp_schedule(walker({0, 0}), tasks, 0.0);
  EXPECT_EQ(s.task_ids, (std::vector<int>{1, 2}));
  expect_valid(s, walker({0, 0}), tasks, 0.0);
}

TEST(DpSchedule, FiveTasksKnownOptimum) {
  auto tasks = five_tasks();
  Worker w = walker({6, 5});
  EXPECT_EQ(oracle::best_route_length(w, tasks, 0.0), 4);
  EXPECT_EQ(dp_schedule(w, tasks, 0.0).task_ids, (std::vector<int>{A, E, C, D}));
  EXPECT_EQ(bb_schedule(w, tasks, 0.0).task_ids, (std::vector<int>{A, E, C, D}));
}

TEST(DpSchedule, RejectsTooManyTasks) {
  Worker w = walker({0.5, 0.5});
  std::vector<Task> tasks;
  for (int i = 0; i < 21; ++i) tasks.push_back(stop(i + 1, {0.5, 0.5}, 10.0));
  EXPECT_THROW(dp_schedule(w, tasks, 0.0), std::invalid_argument);
  RouteOptions opt;
  opt.dp_task_limit = 25;
  EXPECT_EQ(dp_schedule(w, tasks, 0.0, opt).completed_count(), 21);
}

TEST(BbSchedule, SingleTask) {
  std::vector<Task> tasks{stop(4, {0.1, 0.1}, 1.0)};
  EXPECT_EQ(bb_schedule(walker({0, 0}), tasks, 0.0).task_ids, std::vector<int>{4});
}

TEST(BbSchedule, ThreeTasksMatchesDp) {
  auto tasks = three_tasks();
  EXPECT_EQ(bb_schedule(walker({0, 0}), tasks, 0.0).completed_count(), 2);
}

TEST(BbSchedule, SearchTreeOnFiveTasks) {
  auto tasks = five_tasks();
  Worker w = walker({6, 5});
  RouteProblem rp(w, tasks, 0.0);
  RouteSearch search(rp, std::numeric_limits<std::size_t>::max());
  SearchNode root = search.root();
  EXPECT_EQ(root.upper_bound, 5);

  // Level-one bounds: A 4, E 3, C 2, D 2, B 1 (indices are id - 1).
  std::map<int, int> ub;
  for (const auto& c : search.children(root)) {
    ub[c.sequence.back() + 1] = c.upper_bound;
    EXPECT_EQ(c.upper_bound, c.level + static_cast<int>(c.candidates.size()));
    EXPECT_TRUE(std::includes(root.candidates.begin(), root.candidates.end(),
                              c.candidates.begin(), c.candidates.end()));
  }
  EXPECT_EQ(ub, (std::map<int, int>{{A, 4}, {B, 1}, {C, 2}, {D, 2}, {E, 3}}));

  std::vector<std::vector<int>> expanded;
  BbStats stats;
  Schedule s = bb_schedule(w, tasks, 0.0, {}, &stats, [&](const SearchNode& n) {
    std::vector<int> ids;
    for (int i : n.sequence) ids.push_back(i + 1);
    expanded.push_back(ids);
  });
  EXPECT_EQ(s.task_ids, (std::vector<int>{A, E, C, D}));
  EXPECT_EQ(stats.nodes_expanded, expanded.size());
  // The nearest-neighbour completion of A already reaches four tasks, so no
  // level-one bound (at most 4) can beat it: the root is the only expansion.
  ASSERT_FALSE(expanded.empty());
  EXPECT_TRUE(expanded.front().empty());
  for (const auto& seq : expanded) {
    if (!seq.empty()) {
      EXPECT_EQ(seq[0], A);
    }
  }
}

TEST(GreedySchedules, Examples) {
  Worker w = walker({0, 0});
  EXPECT_TRUE(greedy_schedule(GreedyStrategy::leh, w, std::vector<Task>{}, 0.0).empty());
  EXPECT_TRUE(greedy_schedule(GreedyStrategy::nnh, w, std::vector<Task>{}, 0.0).empty());

  std::vector<Task> two{stop(1, {0.1, 0.0}, 2.0), stop(2, {0.0, 0.1}, 1.0)};
  EXPECT_EQ(greedy_schedule(GreedyStrategy::leh, w, two, 0.0).task_ids, (std::vector<int>{2, 1}));

  auto tasks = three_tasks();
  Schedule nnh = greedy_schedule(GreedyStrategy::nnh, w, tasks, 0.0);
  EXPECT_LE(nnh.completed_count(), 2);
  expect_valid(nnh, w, tasks, 0.0);
}

TEST(NnhSchedule, PicksNearestFirst) {
  Worker w = walker({0, 0});
  std::vector<Task> tasks{stop(1, {0.3, 0.0}, 5.0), stop(2, {0.1, 0.0}, 5.0)};
  EXPECT_EQ(nnh_schedule(w, tasks, 0.0).task_ids, (std::vector<int>{2, 1}));
}

TEST(MphSchedule, SingleTask) {
  std::vector<Task> tasks{stop(9, {0.1, 0.1}, 1.0)};
  EXPECT_EQ(mph_schedule(walker({0, 0}), tasks, 0.0).task_ids, std::vector<int>{9});
}

TEST(PrsSchedule, FewerTasksThanPrefix) {
  std::vector<Task> tasks{stop(1, {0.1, 0.0}, 1.0)};
  Worker w = walker({0, 0});
  auto ps = prs_schedule(w, tasks, 0.0, 2);
  EXPECT_EQ(ps.initial.task_ids, ps.refined.task_ids);
  EXPECT_EQ(ps.refined.task_ids, ha_schedule(w, tasks, 0.0).task_ids);
  EXPECT_THROW(prs_schedule(w, tasks, 0.0, 0), std::invalid_argument);
}

TEST(PrsSchedule, ThreeTasksPrefixOne) {
  auto tasks = three_tasks();
  Worker w = walker({0, 0});
  auto ps = prs_schedule(w, tasks, 0.0, 1);
  EXPECT_LE(ps.refined.completed_count(), 2);
  ASSERT_GE(ps.refined.completed_count(), ps.initial.completed_count());
  EXPECT_TRUE(std::equal(ps.initial.task_ids.begin(), ps.initial.task_ids.end(),
                         ps.refined.task_ids.begin()));
  expect_valid(ps.refined, w, tasks, 0.0);
}

TEST(ExtendSchedule, OnlyAddsPoolTasks) {
  auto tasks = five_tasks();
  Worker fig = walker({6, 5});
  Schedule prefix;
  append_stop(prefix, tasks[0], fig, 0.0);
  std::vector<Task> pool{tasks[0], tasks[3]};  // A and D only
  Schedule s = extend_schedule(prefix, fig, pool, 0.0);
  EXPECT_EQ(s.task_ids, (std::vector<int>{A, D}));
  expect_valid(s, fig, tasks, 0.0);
}

TEST(Schedulers, RandomInstancesAgainstPermutationSearch) {
  Rng rng(1001);
  for (int trial = 0; trial < 150; ++trial) {
    Worker w = walker({rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8)}, rng.uniform(0.3, 1.5));
    int n = static_cast<int>(rng.index(9));
    auto tasks = oracle::random_route_tasks(rng, w, n);
    double now = 0.0;
    RouteOptions opt;
    if (trial % 3 == 0) opt.max_tasks = 1 + rng.index(4);
    int exact = oracle::best_route_length(w, tasks, now, opt.max_tasks);

    Schedule dp = dp_schedule(w, tasks, now, opt);
    RouteOptions plain = opt;
    plain.apriori = false;
    Schedule dp_plain = dp_schedule(w, tasks, now, plain);
    Schedule bb = bb_schedule(w, tasks, now, opt);
    Schedule leh = leh_schedule(w, tasks, now, opt);
    Schedule nnh = nnh_schedule(w, tasks, now, opt);
    Schedule mph = mph_schedule(w, tasks, now, opt);
    Schedule ha = ha_schedule(w, tasks, now, opt);
    auto prs = prs_schedule(w, tasks, now, 1 + trial % 3, opt);

    EXPECT_EQ(dp.completed_count(), exact) << "trial " << trial;
    EXPECT_EQ(dp_plain.task_ids, dp.task_ids) << "trial " << trial;
    EXPECT_EQ(bb.completed_count(), exact) << "trial " << trial;
    EXPECT_LE(mph.completed_count(), bb.completed_count());
    EXPECT_LE(ha.completed_count(), exact);
    EXPECT_LE(prs.refined.completed_count(), exact);
    EXPECT_EQ(ha.completed_count(),
              std::max({leh.completed_count(), nnh.completed_count(), mph.completed_count()}));
    if (leh.completed_count() == ha.completed_count()) {
      EXPECT_EQ(ha.task_ids, leh.task_ids);
    }
    EXPECT_TRUE(std::equal(prs.initial.task_ids.begin(), prs.initial.task_ids.end(),
                           prs.refined.task_ids.begin()));
    for (const Schedule* s : {&dp, &bb, &leh, &nnh, &mph, &ha, &prs.initial, &prs.refined}) {
      expect_valid(*s, w, tasks, now, opt.max_tasks);
    }
  }
}

TEST(Schedulers, DpReturnsLexicographicallySmallestOptimum) {
  Rng rng(2002);
  for (int trial = 0; trial < 60; ++trial) {
    Worker w = walker({0.5, 0.5}, rng.uniform(0.5, 2.0));
    auto tasks = oracle::random_route_tasks(rng, w, 1 + static_cast<int>(rng.index(6)));
    int best = oracle::best_route_length(w, tasks, 0.0);
    // Smallest feasible id sequence of optimal length, by brute force.
    std::vector<int> order(tasks.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> smallest;
    bool found = false;
    do {
      Schedule s;
      for (int i = 0; i < best; ++i) {
        if (!can_append(s, tasks[order[i]], w, 0.0)) break;
        append_stop(s, tasks[order[i]], w, 0.0);
      }
      if (s.completed_count() == best && (!found || s.task_ids < smallest)) {
        smallest = s.task_ids;
        found = true;
      }
    } while (std::next_permutation(order.begin(), order.end()));
    EXPECT_EQ(dp_schedule(w, tasks, 0.0).task_ids, smallest) << "trial " << trial;
  }
}

TEST(Schedulers, UpperBoundsHoldForExpandedNodes) {
  Rng rng(3003);
  for (int trial = 0; trial < 60; ++trial) {
    Worker w = walker({0.5, 0.5}, rng.uniform(0.3, 1.0));
    auto tasks = oracle::random_route_tasks(rng, w, 2 + static_cast<int>(rng.index(6)));
    bb_schedule(w, tasks, 0.0, {}, nullptr, [&](const SearchNode& node) {
      Worker from = w;
      std::vector<Task> rest;
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (std::find(node.sequence.begin(), node.sequence.end(), static_cast<int>(i)) ==
            node.sequence.end()) {
          rest.push_back(tasks[i]);
        }
      }
      if (!node.sequence.empty()) from.location = tasks[node.sequence.back()].location;
      int subtree = node.level + oracle::best_route_length(from, rest, node.time);
      EXPECT_LE(subtree, node.upper_bound);
    });
  }
}

TEST(ScheduleValidator, LateArrivalIsDeadlineViolation) {
  Worker w = walker({0, 0});
  std::vector<Task> tasks{stop(1, {0.5, 0.0}, 0.4)};
  Schedule s;
  s.worker_id = 1;
  s.task_ids = {1};
  s.arrival_times = {0.5};
  s.stops = {{0.5, 0.0}};
  auto v = validate(s, w, tasks, 0.0);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->kind, ViolationKind::deadline);
  EXPECT_EQ(v->task_id, 1);
}

TEST(ScheduleValidator, WrongArrivalTimeAndCapacity) {
  Worker w = walker({0, 0});
  std::vector<Task> tasks{stop(1, {0.5, 0.0}, 2.0), stop(2, {0.6, 0.0}, 2.0)};
  Schedule s;
  append_stop(s, tasks[0], w, 0.0);
  append_stop(s, tasks[1], w, 0.0);
  EXPECT_FALSE(validate(s, w, tasks, 0.0));
  EXPECT_EQ(validate(s, w, tasks, 0.0, Geometry::square, 1)->kind, ViolationKind::capacity);
  s.arrival_times[1] += 0.01;
  EXPECT_EQ(validate(s, w, tasks, 0.0)->kind, ViolationKind::arrival_time);
}
