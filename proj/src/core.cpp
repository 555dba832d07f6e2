#include "wifisense/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "wifisense/error.hpp"

namespace wifisense {

namespace {

constexpr Real kRateTolerance = 1e-6;

bool finite(const RssiRecord& r) { return std::isfinite(r.timestamp_s) && std::isfinite(r.rssi_dbm); }

}  // namespace

long floor_div(Real x, Real step) {
  const Real q = x / step;
  return static_cast<long>(std::floor(q + 1e-9 * std::max<Real>(1.0, std::abs(q))));
}

std::vector<DetectorId> Session::detector_ids() const {
  std::vector<DetectorId> ids;
  ids.reserve(series.size());
  for (const auto& s : series) ids.push_back(s.detector_id);
  return ids;
}

const DetectorSeries* Session::find(DetectorId id) const {
  auto it = std::find_if(series.begin(), series.end(), [id](const auto& s) { return s.detector_id == id; });
  return it == series.end() ? nullptr : &*it;
}

bool Window::accepted() const { return static_cast<Real>(values.size()) >= 0.5 * expected_count && values.size() > 0; }

void Window::require_accepted() const {
  if (!accepted()) {
    throw Error(Errc::UnderfilledWindow, "detector " + std::to_string(detector_id) + " window at " +
                                             std::to_string(start) + " s has " + std::to_string(values.size()) +
                                             " of ~" + std::to_string(expected_count) + " samples");
  }
}

std::vector<DetectorId> WindowSet::detector_ids() const {
  std::vector<DetectorId> ids;
  ids.reserve(windows.size());
  for (const auto& w : windows) ids.push_back(w.detector_id);
  return ids;
}

const Window* WindowSet::find(DetectorId id) const {
  auto it = std::find_if(windows.begin(), windows.end(), [id](const auto& w) { return w.detector_id == id; });
  return it == windows.end() ? nullptr : &*it;
}

Session assemble_session(std::span<const RssiRecord> records, Real duration, Label label, std::string metadata) {
  if (records.empty()) throw Error(Errc::EmptySession, "no records");
  if (label.count < 0) throw Error(Errc::InvalidArgument, "negative person count");

  std::map<DetectorId, std::vector<std::pair<Real, Real>>> grouped;
  for (const auto& r : records) {
    if (!finite(r) || r.timestamp_s < 0) {
      throw Error(Errc::MalformedRecord, "non-finite or negative value for detector " + std::to_string(r.detector_id));
    }
    grouped[r.detector_id].emplace_back(r.timestamp_s, r.rssi_dbm);
  }

  Session session;
  session.label = label;
  session.metadata = std::move(metadata);
  Real inferred = 0;
  for (auto& [id, samples] : grouped) {
    // Stable sort keeps append order among equal timestamps, so the last one
    // of each run is the most recent value.
    std::stable_sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<Real, Real>> unique;
    unique.reserve(samples.size());
    for (const auto& s : samples) {
      if (!unique.empty() && unique.back().first == s.first) {
        unique.back().second = s.second;
      } else {
        unique.push_back(s);
      }
    }

    DetectorSeries series;
    series.detector_id = id;
    series.times.resize(static_cast<Eigen::Index>(unique.size()));
    series.rssi.resize(static_cast<Eigen::Index>(unique.size()));
    for (std::size_t i = 0; i < unique.size(); ++i) {
      series.times[static_cast<Eigen::Index>(i)] = unique[i].first;
      series.rssi[static_cast<Eigen::Index>(i)] = unique[i].second;
    }
    const Real span = unique.back().first - unique.front().first;
    if (unique.size() < 2 || span <= 0) {
      throw Error(Errc::EmptySession, "detector " + std::to_string(id) + " has fewer than two distinct samples");
    }
    series.nominal_rate = static_cast<Real>(unique.size() - 1) / span;
    inferred = std::max(inferred, unique.back().first + 1.0 / series.nominal_rate);
    session.series.push_back(std::move(series));
  }
  session.duration = duration > 0 ? duration : inferred;
  return session;
}

std::vector<WindowSet> split_windows(const Session& session, Real tau) {
  if (!(tau > 0)) throw Error(Errc::InvalidArgument, "tau must be positive");
  if (session.series.empty()) throw Error(Errc::EmptySession, "session has no detectors");
  const long count = floor_div(session.duration, tau);
  if (count < 1) {
    throw Error(Errc::NoCompleteWindow,
                "duration " + std::to_string(session.duration) + " s is shorter than tau " + std::to_string(tau) + " s");
  }

  std::vector<WindowSet> sets(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) sets[static_cast<std::size_t>(i)].label = session.label;

  for (const auto& series : session.series) {
    const Real* begin = series.times.data();
    const Real* end = begin + series.times.size();
    const Real* lo = std::lower_bound(begin, end, 0.0);
    for (long i = 0; i < count; ++i) {
      const Real start = static_cast<Real>(i) * tau;
      const Real stop = static_cast<Real>(i + 1) * tau;
      const Real* hi = std::lower_bound(lo, end, stop);
      const auto offset = static_cast<Eigen::Index>(lo - begin);
      const auto n = static_cast<Eigen::Index>(hi - lo);

      Window w;
      w.detector_id = series.detector_id;
      w.times = series.times.segment(offset, n);
      w.values = series.rssi.segment(offset, n);
      w.start = start;
      w.length = tau;
      w.expected_count = series.nominal_rate * tau;
      sets[static_cast<std::size_t>(i)].windows.push_back(std::move(w));
      lo = hi;
    }
  }
  return sets;
}

Session align_series(const Session& session, Real rate) {
  if (!(rate > 0)) throw Error(Errc::InvalidArgument, "rate must be positive");
  for (const auto& s : session.series) {
    if (rate > s.nominal_rate * (1 + kRateTolerance)) {
      throw Error(Errc::RateTooHigh, "rate " + std::to_string(rate) + "/s exceeds detector " +
                                         std::to_string(s.detector_id) + " nominal rate " +
                                         std::to_string(s.nominal_rate) + "/s");
    }
  }

  const long n = floor_div(session.duration * rate, 1.0);
  Session out;
  out.label = session.label;
  out.duration = session.duration;
  out.metadata = session.metadata;
  for (const auto& s : session.series) {
    DetectorSeries aligned;
    aligned.detector_id = s.detector_id;
    aligned.nominal_rate = rate;
    aligned.times.resize(n);
    aligned.rssi.resize(n);
    Eigen::Index j = 0;
    const Eigen::Index last = s.size() - 1;
    for (long k = 0; k < n; ++k) {
      const Real t = static_cast<Real>(k) / rate;
      while (j < last && s.times[j + 1] <= t) ++j;
      Eigen::Index pick = j;
      // Ties go to the earlier sample.
      if (j < last && std::abs(s.times[j + 1] - t) < std::abs(s.times[j] - t)) pick = j + 1;
      aligned.times[k] = t;
      aligned.rssi[k] = s.rssi[pick];
    }
    out.series.push_back(std::move(aligned));
  }
  return out;
}

bool is_aligned(const Session& session) {
  if (session.series.empty()) return false;
  const auto& ref = session.series.front().times;
  return std::all_of(session.series.begin(), session.series.end(),
                     [&](const auto& s) { return s.times.size() == ref.size() && s.times == ref; });
}

bool is_aligned(const WindowSet& ws) {
  if (ws.windows.empty()) return false;
  const auto& ref = ws.windows.front().times;
  return std::all_of(ws.windows.begin(), ws.windows.end(),
                     [&](const auto& w) { return w.times.size() == ref.size() && w.times == ref; });
}

}  // namespace wifisense
