#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "wifisense/counting.hpp"
#include "wifisense/presence.hpp"

namespace wifisense {

/// Global settings every model is trained under; echoed into the file so a
/// mismatching request can be refused.
struct RunConfig {
  Real tau = 20;
  Real rate = 20;
  std::uint64_t seed = 0;
  std::vector<DetectorId> detectors;
};

struct ModelFile {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  std::string created_at;
  RunConfig config;
  std::variant<PresenceModel, CountModel> model;

  /// "m1", "m2a", "m2b", "iforest", "knn", "tree" or "forest".
  std::string kind() const;
  bool is_presence() const { return model.index() == 0; }
};

nlohmann::json to_json(const ModelFile& file);
/// Throws ModelMismatch for unknown versions or kinds.
ModelFile model_file_from_json(const nlohmann::json& j);

void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

/// Throws ModelMismatch when tau or rate disagree with the model's.
void require_compatible(const ModelFile& file, Real tau, Real rate);

}  // namespace wifisense
