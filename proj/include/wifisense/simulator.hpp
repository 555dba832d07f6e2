#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "wifisense/core.hpp"

namespace wifisense::sim {

struct Point2 {
  Real x = 0;
  Real y = 0;
};

struct Point3 {
  Real x = 0;
  Real y = 0;
  Real z = 0;
};

struct Rect {
  Real x0 = 0;
  Real y0 = 0;
  Real x1 = 0;
  Real y1 = 0;

  bool contains(Point2 p, Real inset = 0) const {
    return p.x >= x0 + inset && p.x <= x1 - inset && p.y >= y0 + inset && p.y <= y1 - inset;
  }
};

struct DetectorSite {
  DetectorId id = 0;
  Point3 position;
};

struct PathLoss {
  Real reference_dbm = -30;  // P0 at reference_distance
  Real reference_distance = 1;
  Real exponent = 2;
};

struct Scene {
  Rect room;    // where people walk
  Rect region;  // encloses source and detectors
  Point3 source;
  std::vector<DetectorSite> detectors;
  Real rate = 20;
  Real noise_sigma = 0.43;
  PathLoss path_loss;
  std::uint64_t seed = 1;
  std::string name;
};

struct Still {};
struct RandomWalk {
  Real speed = 0.5;  // m/s
};

using Motion = std::variant<Still, RandomWalk>;

struct Body {
  Point2 position;
  Real radius = 0.25;
  Motion motion = RandomWalk{};
};

struct SimConfig {
  Real duration = 1200;
  int people = 0;
  Real fraction_moving = 1.0;
  Real los_attenuation_db = 6;     // A
  Real scatter_gain_db = 1.2;      // g, per moving body near a path
  Real ellipse_margin = 0.5;       // m of excess path length
  Real walk_speed = 1.0;           // m/s for randomly placed bodies
  Real heading_diffusion = 0.3;    // rad / sqrt(s) of random-walk turning
  Real body_radius = 0.25;
  std::vector<Body> bodies;        // explicit placement; overrides `people` when non-empty
};

/// Log-distance path loss: P0 - 10 n log10(d / d0).
Real baseline_rssi(const Scene& scene, const DetectorSite& detector);

/// Does a disk of `radius` around `c` touch the segment [a, b]?
bool disk_intersects_segment(Point2 c, Real radius, Point2 a, Point2 b);

/// Inside the ellipse with foci a and b whose path length exceeds |ab| by at most `margin`.
bool near_path(Point2 p, Point2 a, Point2 b, Real margin);

Session simulate(const Scene& scene, const SimConfig& config);

enum class Variant { M1, M2, Counting };

Variant parse_variant(const std::string& name);
std::string variant_name(Variant v);

/// Source and three detectors inside a 3.5 x 4.5 m room (M1), the same room
/// with the source moved outside (M2), or a 4 x 4.5 m room with nine
/// detectors (Counting).
Scene make_scene(Variant variant, std::uint64_t seed = 1);

}  // namespace wifisense::sim
