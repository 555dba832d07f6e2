#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "wifisense/error.hpp"
#include "wifisense/simulator.hpp"

using namespace wifisense;
using namespace wifisense::sim;

namespace {

Real series_mean(const DetectorSeries& s) { return s.rssi.mean(); }

Real series_std(const DetectorSeries& s) {
  return oracle::two_pass(std::vector<Real>(s.rssi.data(), s.rssi.data() + s.rssi.size())).sample_std;
}

Scene line_scene(Real distance) {
  Scene s;
  s.room = {0, 0, 20, 20};
  s.region = s.room;
  s.source = {1, 1, 1};
  s.detectors = {{1, {1 + distance, 1, 1}}};
  return s;
}

}  // namespace

TEST(BaselineRssi, LogDistance) {
  EXPECT_NEAR(baseline_rssi(line_scene(1), line_scene(1).detectors[0]), -30, 1e-12);
  EXPECT_NEAR(baseline_rssi(line_scene(10), line_scene(10).detectors[0]), -50, 1e-12);
  const Scene zero = line_scene(0);
  try {
    baseline_rssi(zero, zero.detectors[0]);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateGeometry);
  }
}

TEST(Geometry, DiskAndEllipse) {
  EXPECT_TRUE(disk_intersects_segment({1, 0.2}, 0.25, {0, 0}, {2, 0}));
  EXPECT_FALSE(disk_intersects_segment({1, 0.3}, 0.25, {0, 0}, {2, 0}));
  EXPECT_FALSE(disk_intersects_segment({2.3, 0}, 0.25, {0, 0}, {2, 0}));
  EXPECT_TRUE(disk_intersects_segment({2.2, 0}, 0.25, {0, 0}, {2, 0}));
  EXPECT_TRUE(near_path({1, 0.5}, {0, 0}, {2, 0}, 0.5));   // 2 * sqrt(1.25) - 2 = 0.236
  EXPECT_FALSE(near_path({1, 1.0}, {0, 0}, {2, 0}, 0.5));  // 2 * sqrt(2) - 2 = 0.828
}

TEST(Simulate, EmptyRoomIsNoiseOnly) {
  Real mean_ratio = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Scene scene = make_scene(Variant::M1, seed);
    const Session s = simulate(scene, {});
    ASSERT_EQ(s.series.size(), 3u);
    for (const auto& series : s.series) {
      EXPECT_EQ(series.size(), 24000);
      EXPECT_NEAR(series_mean(series), baseline_rssi(scene, scene.detectors[static_cast<std::size_t>(series.detector_id - 1)]), 0.02);
      mean_ratio += series_std(series) / 0.43 / 15;
    }
  }
  EXPECT_NEAR(mean_ratio, 1, 0.1);
}

TEST(Simulate, StillBodyOnLineOfSightAttenuatesOnlyThatDetector) {
  const Scene scene = make_scene(Variant::M1, 3);
  const Session empty = simulate(scene, {});
  SimConfig config;
  const Point2 src{scene.source.x, scene.source.y};
  const Point2 d1{scene.detectors[0].position.x, scene.detectors[0].position.y};
  config.bodies = {Body{{(src.x + d1.x) / 2, (src.y + d1.y) / 2}, 0.25, Still{}}};
  const Session blocked = simulate(scene, config);
  EXPECT_NEAR(series_mean(empty.series[0]) - series_mean(blocked.series[0]), 6, 0.05);
  EXPECT_NEAR(series_mean(empty.series[1]), series_mean(blocked.series[1]), 0.05);
  EXPECT_NEAR(series_mean(empty.series[2]), series_mean(blocked.series[2]), 0.05);
  // A still body adds no scatter.
  EXPECT_NEAR(series_std(blocked.series[0]), 0.43, 0.03);
}

TEST(Simulate, MovingPeopleRaiseDeviation) {
  const Scene scene = make_scene(Variant::M1, 4);
  SimConfig config;
  config.people = 3;
  config.duration = 300;
  const Session s = simulate(scene, config);
  EXPECT_EQ(s.label.count, 3);
  for (const auto& series : s.series) EXPECT_GT(series_std(series), 0.6);
}

TEST(Simulate, SeedDeterminism) {
  SimConfig config;
  config.people = 2;
  config.duration = 60;
  const Session a = simulate(make_scene(Variant::Counting, 11), config);
  const Session b = simulate(make_scene(Variant::Counting, 11), config);
  const Session c = simulate(make_scene(Variant::Counting, 12), config);
  for (std::size_t d = 0; d < a.series.size(); ++d) {
    EXPECT_EQ(a.series[d].rssi, b.series[d].rssi);
    EXPECT_EQ(a.series[d].times, b.series[d].times);
  }
  EXPECT_NE(a.series[0].rssi, c.series[0].rssi);
}

TEST(Simulate, CountingSceneSession) {
  SimConfig config;
  config.people = 5;
  config.duration = 1200;
  const Session s = simulate(make_scene(Variant::Counting, 1), config);
  EXPECT_EQ(s.series.size(), 9u);
  EXPECT_EQ(s.label.count, 5);
  EXPECT_EQ(split_windows(s, 20).size(), 60u);
}

TEST(Simulate, BodyOutsideRoom) {
  SimConfig config;
  config.bodies = {Body{{-1, 1}}};
  try {
    simulate(make_scene(Variant::M1, 1), config);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateGeometry);
  }
}

TEST(Scenes, BuiltInVariants) {
  const Scene m1 = make_scene(Variant::M1);
  const Scene m2 = make_scene(Variant::M2);
  EXPECT_EQ(m1.detectors.size(), 3u);
  EXPECT_EQ(m2.detectors.size(), 3u);
  EXPECT_TRUE(m1.room.contains({m1.source.x, m1.source.y}));
  EXPECT_FALSE(m2.room.contains({m2.source.x, m2.source.y}));
  EXPECT_EQ(make_scene(Variant::Counting).detectors.size(), 9u);
  for (auto v : {Variant::M1, Variant::M2, Variant::Counting}) EXPECT_EQ(parse_variant(variant_name(v)), v);
  EXPECT_THROW(parse_variant("m3"), Error);
}
