#include "wifisense/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "wifisense/error.hpp"

namespace wifisense::sim {

namespace {

Point2 plan(Point3 p) { return {p.x, p.y}; }

Real distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool in_region(const Rect& r, Point3 p) { return r.contains(plan(p)); }

struct Walker {
  Body body;
  Real heading = 0;
};

void step(Walker& w, const Rect& room, Real dt, Real diffusion, std::mt19937_64& rng) {
  const auto* walk = std::get_if<RandomWalk>(&w.body.motion);
  if (walk == nullptr || walk->speed <= 0) return;
  std::normal_distribution<Real> turn(0.0, diffusion * std::sqrt(dt));
  w.heading += turn(rng);
  auto& p = w.body.position;
  p.x += walk->speed * dt * std::cos(w.heading);
  p.y += walk->speed * dt * std::sin(w.heading);

  // Specular reflection off the walls, keeping the whole disk inside.
  const Real r = w.body.radius;
  const Real lo_x = room.x0 + r, hi_x = room.x1 - r, lo_y = room.y0 + r, hi_y = room.y1 - r;
  if (p.x < lo_x) { p.x = std::min(2 * lo_x - p.x, hi_x); w.heading = std::numbers::pi - w.heading; }
  if (p.x > hi_x) { p.x = std::max(2 * hi_x - p.x, lo_x); w.heading = std::numbers::pi - w.heading; }
  if (p.y < lo_y) { p.y = std::min(2 * lo_y - p.y, hi_y); w.heading = -w.heading; }
  if (p.y > hi_y) { p.y = std::max(2 * hi_y - p.y, lo_y); w.heading = -w.heading; }
}

}  // namespace

Real baseline_rssi(const Scene& scene, const DetectorSite& detector) {
  const Real d = std::sqrt(std::pow(scene.source.x - detector.position.x, 2) +
                           std::pow(scene.source.y - detector.position.y, 2) +
                           std::pow(scene.source.z - detector.position.z, 2));
  if (!(d > 0)) throw Error(Errc::DegenerateGeometry, "detector " + std::to_string(detector.id) + " coincides with the source");
  const auto& pl = scene.path_loss;
  return pl.reference_dbm - 10 * pl.exponent * std::log10(d / pl.reference_distance);
}

bool disk_intersects_segment(Point2 c, Real radius, Point2 a, Point2 b) {
  const Real dx = b.x - a.x;
  const Real dy = b.y - a.y;
  const Real len2 = dx * dx + dy * dy;
  Real t = len2 > 0 ? ((c.x - a.x) * dx + (c.y - a.y) * dy) / len2 : 0;
  t = std::clamp<Real>(t, 0, 1);
  return distance(c, {a.x + t * dx, a.y + t * dy}) <= radius;
}

bool near_path(Point2 p, Point2 a, Point2 b, Real margin) {
  return distance(p, a) + distance(p, b) <= distance(a, b) + margin;
}

Session simulate(const Scene& scene, const SimConfig& config) {
  if (!(scene.rate > 0)) throw Error(Errc::InvalidArgument, "sample rate must be positive");
  if (!(scene.noise_sigma > 0)) throw Error(Errc::InvalidArgument, "noise_sigma must be positive");
  if (!(config.duration > 0)) throw Error(Errc::InvalidArgument, "duration must be positive");
  if (config.people < 0) throw Error(Errc::InvalidArgument, "people count must be non-negative");
  if (config.los_attenuation_db < 0 || config.scatter_gain_db < 0) {
    throw Error(Errc::InvalidArgument, "attenuation and scatter gain must be non-negative");
  }
  if (scene.detectors.empty()) throw Error(Errc::DegenerateGeometry, "scene has no detectors");
  if (!in_region(scene.region, scene.source)) throw Error(Errc::DegenerateGeometry, "source outside the scene region");
  for (const auto& d : scene.detectors) {
    if (!in_region(scene.region, d.position)) {
      throw Error(Errc::DegenerateGeometry, "detector " + std::to_string(d.id) + " outside the scene region");
    }
  }

  std::mt19937_64 rng(scene.seed);
  std::uniform_real_distribution<Real> unit(0.0, 1.0);

  std::vector<Walker> walkers;
  if (!config.bodies.empty()) {
    for (const auto& b : config.bodies) {
      if (!scene.room.contains(b.position)) throw Error(Errc::DegenerateGeometry, "body starts outside the room");
      walkers.push_back({b, 0});
    }
  } else {
    const auto moving = static_cast<int>(std::lround(config.fraction_moving * config.people));
    const Real r = config.body_radius;
    for (int i = 0; i < config.people; ++i) {
      Walker w;
      w.body.radius = r;
      w.body.position = {scene.room.x0 + r + unit(rng) * (scene.room.x1 - scene.room.x0 - 2 * r),
                         scene.room.y0 + r + unit(rng) * (scene.room.y1 - scene.room.y0 - 2 * r)};
      if (i < moving) {
        w.body.motion = RandomWalk{config.walk_speed};
      } else {
        w.body.motion = Still{};
      }
      walkers.push_back(w);
    }
  }
  for (auto& w : walkers) w.heading = 2 * std::numbers::pi * unit(rng);

  const auto ticks = floor_div(config.duration * scene.rate, 1.0);
  const auto nd = scene.detectors.size();
  std::vector<Real> baseline(nd);
  for (std::size_t j = 0; j < nd; ++j) baseline[j] = baseline_rssi(scene, scene.detectors[j]);

  Session session;
  session.duration = config.duration;
  session.label = walkers.empty() ? Label::noise() : Label::persons(static_cast<int>(walkers.size()));
  session.metadata = scene.name + " people=" + std::to_string(walkers.size());
  session.series.resize(nd);
  for (std::size_t j = 0; j < nd; ++j) {
    auto& s = session.series[j];
    s.detector_id = scene.detectors[j].id;
    s.nominal_rate = scene.rate;
    s.times.resize(ticks);
    s.rssi.resize(ticks);
  }

  std::normal_distribution<Real> gauss(0.0, 1.0);
  const Point2 src = plan(scene.source);
  const Real dt = 1.0 / scene.rate;
  for (long k = 0; k < ticks; ++k) {
    const Real t = static_cast<Real>(k) / scene.rate;
    for (std::size_t j = 0; j < nd; ++j) {
      const Point2 det = plan(scene.detectors[j].position);
      bool blocked = false;
      int scatterers = 0;
      for (const auto& w : walkers) {
        blocked = blocked || disk_intersects_segment(w.body.position, w.body.radius, src, det);
        if (std::holds_alternative<RandomWalk>(w.body.motion) && near_path(w.body.position, src, det, config.ellipse_margin)) {
          ++scatterers;
        }
      }
      const Real scatter = config.scatter_gain_db * scatterers * gauss(rng);
      const Real noise = scene.noise_sigma * gauss(rng);
      auto& s = session.series[j];
      s.times[k] = t;
      s.rssi[k] = baseline[j] - (blocked ? config.los_attenuation_db : 0.0) + scatter + noise;
    }
    for (auto& w : walkers) step(w, scene.room, dt, config.heading_diffusion, rng);
  }
  std::sort(session.series.begin(), session.series.end(),
            [](const auto& a, const auto& b) { return a.detector_id < b.detector_id; });
  return session;
}

Variant parse_variant(const std::string& name) {
  if (name == "m1") return Variant::M1;
  if (name == "m2") return Variant::M2;
  if (name == "counting") return Variant::Counting;
  throw Error(Errc::InvalidArgument, "unknown scene variant '" + name + "'");
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::M1: return "m1";
    case Variant::M2: return "m2";
    case Variant::Counting: return "counting";
  }
  return "unknown";
}

Scene make_scene(Variant variant, std::uint64_t seed) {
  Scene scene;
  scene.seed = seed;
  scene.rate = 20;
  scene.noise_sigma = 0.43;
  scene.name = variant_name(variant);
  switch (variant) {
    case Variant::M1:
    case Variant::M2:
      scene.room = {0, 0, 3.5, 4.5};
      scene.detectors = {{1, {3.1, 4.1, 1.0}}, {2, {3.1, 2.25, 1.0}}, {3, {3.1, 0.4, 1.0}}};
      if (variant == Variant::M1) {
        scene.source = {0.4, 2.25, 1.0};
        scene.region = scene.room;
      } else {
        scene.source = {2.6, 6.5, 1.0};
        scene.region = {0, 0, 3.5, 7.0};
      }
      break;
    case Variant::Counting:
      scene.room = {0, 0, 4.0, 4.5};
      scene.region = scene.room;
      scene.source = {2.0, 2.25, 0.5};
      // Detectors 1-4 sit in the corners so any four-detector prefix covers
      // the whole floor; 5-9 fill the wall midpoints and one interior spot.
      scene.detectors = {{1, {0.3, 0.3, 1.0}}, {2, {3.7, 4.2, 1.0}}, {3, {3.7, 0.3, 1.0}},
                         {4, {0.3, 4.2, 1.0}}, {5, {2.0, 0.3, 1.0}}, {6, {2.0, 4.2, 1.0}},
                         {7, {0.3, 2.25, 1.0}}, {8, {3.7, 2.25, 1.0}}, {9, {1.0, 3.3, 1.0}}};
      break;
  }
  return scene;
}

}  // namespace wifisense::sim
