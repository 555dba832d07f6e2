#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wifisense {

using Real = double;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using DetectorId = int;

/// One signal-strength reading. Timestamps are seconds since session start.
struct RssiRecord {
  Real timestamp_s = 0;
  DetectorId detector_id = 0;
  Real rssi_dbm = 0;
};

/// Ground truth of a session or window: 0 is noise (nobody present).
struct Label {
  int count = 0;

  static constexpr Label noise() { return Label{0}; }
  static constexpr Label persons(int n) { return Label{n}; }
  constexpr bool is_noise() const { return count == 0; }
  constexpr int presence() const { return count > 0 ? 1 : 0; }
  friend constexpr bool operator==(Label, Label) = default;
};

struct DetectorSeries {
  DetectorId detector_id = 0;
  Vector times;  // strictly increasing
  Vector rssi;
  Real nominal_rate = 0;  // samples per second

  Eigen::Index size() const { return times.size(); }
};

struct Session {
  std::vector<DetectorSeries> series;  // sorted by detector id
  Label label;
  Real duration = 0;
  std::string metadata;

  std::vector<DetectorId> detector_ids() const;
  const DetectorSeries* find(DetectorId id) const;
};

struct Window {
  DetectorId detector_id = 0;
  Vector times;
  Vector values;
  Real start = 0;
  Real length = 0;
  Real expected_count = 0;  // nominal_rate * length

  /// False when fewer than half of the expected samples are present.
  bool accepted() const;
  /// Throws UnderfilledWindow unless accepted().
  void require_accepted() const;
};

struct WindowSet {
  std::vector<Window> windows;  // sorted by detector id, shared [start, start + length)
  std::optional<Label> label;

  Real start() const { return windows.empty() ? 0 : windows.front().start; }
  Real length() const { return windows.empty() ? 0 : windows.front().length; }
  std::vector<DetectorId> detector_ids() const;
  const Window* find(DetectorId id) const;
};

/// Groups records per detector, sorts by time and collapses duplicate
/// timestamps (last value wins). A non-positive `duration` is inferred from
/// the data as the longest span plus one sample period.
Session assemble_session(std::span<const RssiRecord> records, Real duration, Label label,
                         std::string metadata = {});

/// floor(duration / tau) consecutive windows; the trailing remainder is dropped.
std::vector<WindowSet> split_windows(const Session& session, Real tau);

/// Nearest-neighbour resampling of every detector onto the grid k / rate,
/// k = 0 .. floor(duration * rate) - 1.
Session align_series(const Session& session, Real rate);

/// True when all series share an identical time grid.
bool is_aligned(const Session& session);
bool is_aligned(const WindowSet& ws);

/// floor(x / step) with a relative tolerance against representation error.
long floor_div(Real x, Real step);

}  // namespace wifisense
