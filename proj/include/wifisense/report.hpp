#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "wifisense/counting.hpp"
#include "wifisense/presence.hpp"

namespace wifisense {

nlohmann::json to_json(const PresenceReport& report);
nlohmann::json to_json(const CvReport& report);
nlohmann::json to_json(const SweepReport& report);

struct CountPrediction {
  Real start = 0;
  int label = 0;
};

struct CountEvaluation {
  std::string algorithm;
  std::size_t windows = 0;
  std::size_t correct = 0;
  Real accuracy = 0;
  int truth = 0;
  std::vector<CountPrediction> trace;
};

nlohmann::json to_json(const std::vector<CountPrediction>& predictions);
nlohmann::json to_json(const CountEvaluation& evaluation);

void write_trace_csv(const PresenceReport& report, std::ostream& out);
void write_sweep_csv(const SweepReport& report, std::ostream& out);
void write_predictions_csv(const std::vector<CountPrediction>& predictions, std::ostream& out);

}  // namespace wifisense
