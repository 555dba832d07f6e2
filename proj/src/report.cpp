#include "wifisense/report.hpp"

#include <ostream>

#include "wifisense/io.hpp"

namespace wifisense {

using nlohmann::json;

json to_json(const PresenceReport& report) {
  json trace = json::array();
  for (const auto& t : report.trace) {
    trace.push_back({{"start_s", t.start}, {"truth", t.truth}, {"predicted", t.predicted}, {"score", t.score}});
  }
  return {{"method", report.method},
          {"windows", report.windows},
          {"correct", report.correct},
          {"accuracy", report.accuracy},
          {"trace", std::move(trace)}};
}

json to_json(const CvReport& report) {
  json confusion = json::array();
  for (const auto& m : report.confusion) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      std::vector<int> row(static_cast<std::size_t>(m.cols()));
      for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
      rows.push_back(row);
    }
    confusion.push_back(std::move(rows));
  }
  return {{"folds", report.folds},
          {"seed", report.seed},
          {"stratified", report.stratified},
          {"class_set", report.class_set},
          {"fold_accuracy", report.fold_accuracy},
          {"mean_accuracy", report.mean_accuracy},
          {"confusion", std::move(confusion)},
          {"fold_of", report.fold_of}};
}

json to_json(const SweepReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"algorithm", r.algorithm},
                    {"detectors", r.detectors},
                    {"mean_accuracy", r.mean_accuracy},
                    {"fold_accuracy", r.fold_accuracy}});
  }
  return {{"order", report.order}, {"rows", std::move(rows)}};
}

json to_json(const std::vector<CountPrediction>& predictions) {
  json out = json::array();
  for (const auto& p : predictions) out.push_back({{"start_s", p.start}, {"label", p.label}});
  return out;
}

json to_json(const CountEvaluation& e) {
  return {{"algorithm", e.algorithm}, {"windows", e.windows},   {"correct", e.correct},
          {"accuracy", e.accuracy},   {"truth", e.truth},       {"trace", to_json(e.trace)}};
}

void write_trace_csv(const PresenceReport& report, std::ostream& out) {
  out << "start_s,truth,predicted,score\n";
  for (const auto& t : report.trace) {
    out << io::format_real(t.start) << ',' << t.truth << ',' << t.predicted << ',' << io::format_real(t.score) << '\n';
  }
}

void write_sweep_csv(const SweepReport& report, std::ostream& out) {
  out << "algorithm,detectors,mean_accuracy\n";
  for (const auto& r : report.rows) out << r.algorithm << ',' << r.detectors << ',' << io::format_real(r.mean_accuracy) << '\n';
}

void write_predictions_csv(const std::vector<CountPrediction>& predictions, std::ostream& out) {
  out << "start_s,label\n";
  for (const auto& p : predictions) out << io::format_real(p.start) << ',' << p.label << '\n';
}

}  // namespace wifisense
