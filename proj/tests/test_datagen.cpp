#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "geocrowd/datagen.hpp"

using namespace geocrowd;

namespace {

ScenarioConfig small_config(int slots, int m, int n) {
  ScenarioConfig c;
  c.slots = slots;
  c.m = m;
  c.n = n;
  return c;
}

std::string files_of(const Scenario& s) {
  std::ostringstream out;
  write_workers(out, s.workers);
  write_tasks(out, s.tasks);
  return out.str();
}

}  // namespace

TEST(SampleRange, DegenerateRange) {
  Rng rng(1);
  EXPECT_EQ(sample_range({0.37, 0.37}, rng), 0.37);
}

TEST(SampleRange, MeanAndBounds) {
  Rng rng(2);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = sample_range({0.0, 1.0}, rng);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    sum += v;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.01);
  for (int i = 0; i < 1000; ++i) {
    double v = sample_range({2.0, 3.0}, rng);
    EXPECT_GE(v, 2.0);
    EXPECT_LE(v, 3.0);
  }
  EXPECT_THROW(sample_range({1.0, 0.0}, rng), std::invalid_argument);
}

TEST(SampleLocation, UniformMean) {
  Rng rng(3);
  const int n = 100000;
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    Point p = sample_location(Distribution::unif, rng);
    sx += p.x;
    sy += p.y;
  }
  EXPECT_NEAR(sx / n, 0.5, 0.01);
  EXPECT_NEAR(sy / n, 0.5, 0.01);
}

TEST(SampleLocation, GaussianInsideWithExpectedVariance) {
  Rng rng(4);
  const int n = 100000;
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    Point p = sample_location(Distribution::gaus, rng);
    ASSERT_TRUE(p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0);
    sx += p.x;
    sy += p.y;
    sxx += p.x * p.x;
    syy += p.y * p.y;
  }
  double vx = sxx / n - (sx / n) * (sx / n);
  double vy = syy / n - (sy / n) * (sy / n);
  EXPECT_GE(vx, 0.03);
  EXPECT_LE(vx, 0.05);
  EXPECT_GE(vy, 0.03);
  EXPECT_LE(vy, 0.05);
}

TEST(SampleLocation, SkewClusterFraction) {
  Rng rng(5);
  const int n = 100000;
  int clustered = 0;
  for (int i = 0; i < n; ++i) {
    auto tp = sample_location_tagged(Distribution::skew, rng);
    ASSERT_TRUE(tp.point.x >= 0.0 && tp.point.x <= 1.0);
    clustered += tp.clustered;
  }
  EXPECT_NEAR(static_cast<double>(clustered) / n, 0.9, 0.01);
}

TEST(Distribution, ParseIsCaseInsensitive) {
  EXPECT_EQ(parse_distribution("skew"), Distribution::skew);
  EXPECT_EQ(parse_distribution("GAUS"), Distribution::gaus);
  EXPECT_EQ(to_string(Distribution::unif), "UNIF");
  EXPECT_THROW(parse_distribution("zipf"), std::invalid_argument);
}

TEST(NearestOdd, RoundsToOddTiesUp) {
  EXPECT_EQ(nearest_odd(3.0), 3);
  EXPECT_EQ(nearest_odd(3.9), 3);
  EXPECT_EQ(nearest_odd(4.0), 5);
  EXPECT_EQ(nearest_odd(4.1), 5);
  EXPECT_EQ(nearest_odd(5.0), 5);
  EXPECT_EQ(nearest_odd(0.2), 1);
}

TEST(Generate, Counts) {
  Scenario s = generate(small_config(1, 3, 2));
  EXPECT_EQ(s.tasks.size(), 3u);
  EXPECT_EQ(s.workers.size(), 2u);
  std::set<int> wid, tid;
  for (const auto& w : s.workers) wid.insert(w.id);
  for (const auto& t : s.tasks) tid.insert(t.id);
  EXPECT_EQ(wid.size(), 2u);
  EXPECT_EQ(tid.size(), 3u);
}

TEST(Generate, AttributesWithinRanges) {
  ScenarioConfig c = small_config(4, 300, 300);
  c.distribution = Distribution::skew;
  Scenario s = generate(c);
  EXPECT_EQ(s.slots, 4);
  for (const auto& w : s.workers) {
    EXPECT_TRUE(well_formed(w));
    EXPECT_GE(w.radius, c.a.lo);
    EXPECT_LE(w.radius, c.a.hi);
    EXPECT_GE(w.reliability, c.r.lo);
    EXPECT_LE(w.reliability, c.r.hi);
    EXPECT_GE(w.capacity, 2);
    EXPECT_LE(w.capacity, 3);
    EXPECT_DOUBLE_EQ(w.speed, c.speed);
    EXPECT_EQ(w.open_slots, 1);
  }
  for (const auto& t : s.tasks) {
    EXPECT_TRUE(well_formed(t));
    EXPECT_TRUE(t.required_answers == 3 || t.required_answers == 5);
    EXPECT_GT(t.deadline, t.created_slot);
    EXPECT_GE(t.deadline - t.created_slot, c.rt.lo - 1e-9);
    EXPECT_LE(t.deadline - t.created_slot, c.rt.hi + 1e-9);
    EXPECT_GE(t.required_confidence, c.q.lo);
    EXPECT_LE(t.required_confidence, c.q.hi);
  }
}

TEST(Generate, SlotsAndOrdering) {
  Scenario s = generate(small_config(3, 4, 5));
  ASSERT_EQ(s.workers.size(), 15u);
  ASSERT_EQ(s.tasks.size(), 12u);
  for (std::size_t i = 0; i < s.workers.size(); ++i) {
    EXPECT_EQ(s.workers[i].arrival_slot, static_cast<int>(i / 5));
  }
  for (std::size_t i = 0; i < s.tasks.size(); ++i) {
    EXPECT_EQ(s.tasks[i].created_slot, static_cast<int>(i / 4));
  }
}

TEST(Generate, DeterministicPerSeed) {
  ScenarioConfig c = small_config(3, 50, 40);
  c.distribution = Distribution::gaus;
  EXPECT_EQ(files_of(generate(c)), files_of(generate(c)));
  ScenarioConfig d = c;
  d.seed = 2;
  EXPECT_NE(files_of(generate(c)), files_of(generate(d)));
}

TEST(Generate, RejectsBadConfigs) {
  EXPECT_THROW(generate(small_config(0, 1, 1)), std::invalid_argument);
  EXPECT_THROW(generate(small_config(1, 0, 1)), std::invalid_argument);
  EXPECT_THROW(generate(small_config(1, 1, -1)), std::invalid_argument);
  ScenarioConfig c = small_config(1, 1, 1);
  c.rt = {2.0, 1.0};
  EXPECT_THROW(generate(c), std::invalid_argument);
}

TEST(ScenarioFiles, RoundTrip) {
  ScenarioConfig c = small_config(3, 20, 20);
  c.distribution = Distribution::skew;
  Scenario s = generate(c);
  std::ostringstream wo, to;
  write_workers(wo, s.workers);
  write_tasks(to, s.tasks);
  std::istringstream wi(wo.str()), ti(to.str());
  Scenario back;
  back.workers = read_workers(wi);
  back.tasks = read_tasks(ti);
  normalize(back);
  EXPECT_EQ(back.slots, 3);
  ASSERT_EQ(back.workers.size(), s.workers.size());
  ASSERT_EQ(back.tasks.size(), s.tasks.size());
  for (std::size_t i = 0; i < s.workers.size(); ++i) {
    const auto &a = s.workers[i], &b = back.workers[i];
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.location.x, b.location.x);
    EXPECT_EQ(a.location.y, b.location.y);
    EXPECT_EQ(a.radius, b.radius);
    EXPECT_EQ(a.speed, b.speed);
    EXPECT_EQ(a.reliability, b.reliability);
    EXPECT_EQ(a.capacity, b.capacity);
    EXPECT_EQ(a.arrival_slot, b.arrival_slot);
  }
  for (std::size_t i = 0; i < s.tasks.size(); ++i) {
    const auto &a = s.tasks[i], &b = back.tasks[i];
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.location.x, b.location.x);
    EXPECT_EQ(a.deadline, b.deadline);
    EXPECT_EQ(a.required_answers, b.required_answers);
    EXPECT_EQ(a.required_confidence, b.required_confidence);
  }
}

TEST(ScenarioFiles, HeaderAndFieldErrors) {
  std::istringstream bad_header("slot,id\n");
  EXPECT_THROW(read_workers(bad_header), std::invalid_argument);
  std::istringstream short_row(std::string(kTaskHeader) + "\n0,1,0.5,0.5\n");
  EXPECT_THROW(read_tasks(short_row), std::invalid_argument);
  std::istringstream even(std::string(kTaskHeader) + "\n0,1,0.5,0.5,1.5,2,0.8\n");
  EXPECT_THROW(read_tasks(even), std::invalid_argument);
  std::istringstream junk(std::string(kWorkerHeader) + "\n0,1,0.5,abc,0.1,0.3,2,0.8\n");
  EXPECT_THROW(read_workers(junk), std::invalid_argument);
}

TEST(Checkins, HourOfTimestamp) {
  EXPECT_EQ(timestamp_hour("2010-10-19T13:45:00Z"), 13);
  EXPECT_EQ(timestamp_hour("2012-04-03 13:45:11"), 13);
  EXPECT_EQ(timestamp_hour("2011-01-01T00:00:00Z"), 0);
  EXPECT_FALSE(timestamp_hour("2011-01-01"));
  EXPECT_FALSE(timestamp_hour("2011-01-01T25:00:00Z"));
}

TEST(Checkins, ParseCountsMalformedLines) {
  std::istringstream in(
      "user_id,latitude,longitude,timestamp\n"
      "u1,34.0,-118.3,2010-10-19T13:45:00Z\n"
      "u2,not-a-number,-118.3,2010-10-19T13:45:00Z\n"
      "u3,34.0\n"
      "\n"
      "u4,34.1,-118.2,2010-10-19T07:05:00Z\n"
      "u5,34.1,-118.2,yesterday\n");
  auto parsed = parse_checkins(in);
  EXPECT_EQ(parsed.records.size(), 2u);
  EXPECT_EQ(parsed.skipped, 3);
  EXPECT_EQ(parsed.records[0].hour, 13);
  EXPECT_EQ(parsed.records[1].hour, 7);
}

TEST(Checkins, CornersMapToUnitSquare) {
  BoundingBox box;
  std::vector<CheckinRecord> recs{
      {"a", box.lat_min, box.lon_min, "2010-01-01T13:45:00Z", 13},
      {"b", box.lat_max, box.lon_max, "2010-01-01T02:00:00Z", 2},
      {"c", 40.0, -74.0, "2010-01-01T05:00:00Z", 5},
  };
  Rng rng(1);
  ScenarioConfig cfg;
  Scenario s = ingest_checkins(recs, box, CheckinRole::worker, cfg, rng);
  EXPECT_EQ(s.slots, 24);
  ASSERT_EQ(s.workers.size(), 2u);
  EXPECT_TRUE(s.tasks.empty());
  // Ordered by hour: the max corner (02h) first.
  EXPECT_EQ(s.workers[0].arrival_slot, 2);
  EXPECT_EQ(s.workers[0].location.x, 1.0);
  EXPECT_EQ(s.workers[0].location.y, 1.0);
  EXPECT_EQ(s.workers[1].arrival_slot, 13);
  EXPECT_EQ(s.workers[1].location.x, 0.0);
  EXPECT_EQ(s.workers[1].location.y, 0.0);

  Rng rng2(1);
  Scenario t = ingest_checkins(recs, box, CheckinRole::task, cfg, rng2);
  ASSERT_EQ(t.tasks.size(), 2u);
  EXPECT_TRUE(t.workers.empty());
  for (const auto& task : t.tasks) EXPECT_TRUE(well_formed(task));
}

TEST(Checkins, AllOutsideIsAnError) {
  std::vector<CheckinRecord> recs{{"a", 40.7, -74.0, "2010-01-01T13:00:00Z", 13}};
  Rng rng(1);
  EXPECT_THROW(ingest_checkins(recs, BoundingBox{}, CheckinRole::task, ScenarioConfig{}, rng),
               std::invalid_argument);
}
