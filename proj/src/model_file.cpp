#include "wifisense/model_file.hpp"

#include <cmath>
#include <fstream>

#include "wifisense/error.hpp"

namespace wifisense {

using nlohmann::json;

namespace {

json vec_json(const Vector& v) { return std::vector<Real>(v.data(), v.data() + v.size()); }

Vector vec_from(const json& j) {
  const auto v = j.get<std::vector<Real>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json mat_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vec_json(m.row(r).transpose()));
  return rows;
}

Matrix mat_from(const json& j, Eigen::Index cols) {
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = vec_from(j[r]);
    if (row.size() != cols) throw Error(Errc::ModelMismatch, "ragged matrix in model file");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

json layout_json(const FeatureLayout& l) { return {{"detectors", l.detectors()}, {"spectrum_bins", l.bins()}}; }

FeatureLayout layout_from(const json& j) {
  return FeatureLayout(j.at("detectors").get<std::vector<DetectorId>>(), j.at("spectrum_bins").get<int>());
}

json tree_json(const DecisionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.label});
  return nodes;
}

DecisionTree tree_from(const json& j, const FeatureLayout& layout, const std::vector<int>& class_set) {
  DecisionTree t;
  t.layout = layout;
  t.class_set = class_set;
  for (const auto& n : j) {
    t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<Real>(), n.at(2).get<int>(), n.at(3).get<int>(), n.at(4).get<int>()});
  }
  return t;
}

json payload(const PresenceModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Method1Model>) {
          return {{"detectors", m.detectors}, {"sigma_bar", vec_json(m.sigma_bar)}, {"f", m.f}};
        } else if constexpr (std::is_same_v<M, Method2aModel>) {
          return {{"detectors", m.detectors}, {"correlated_noise_dev", m.correlated_noise_dev}, {"factor", m.factor}};
        } else if constexpr (std::is_same_v<M, Method2bModel>) {
          return {{"detectors", m.detectors}, {"sigma_product_series", m.sigma_product_series}, {"factor", m.factor}};
        } else {
          json trees = json::array();
          for (const auto& tree : m.forest.trees()) {
            json nodes = json::array();
            for (const auto& n : tree) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.size});
            trees.push_back(std::move(nodes));
          }
          return {{"subsample", m.forest.subsample()},
                  {"height_limit", m.forest.height_limit()},
                  {"score_threshold", m.score_threshold},
                  {"quantile", m.quantile},
                  {"trees", std::move(trees)}};
        }
      },
      model);
}

json payload(const CountModel& model) {
  return std::visit(
      [](const auto& m) -> json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, KnnModel>) {
          return {{"neighbors", m.neighbors}, {"mean", vec_json(m.mean)}, {"scale", vec_json(m.scale)},
                  {"labels", m.labels},       {"train", mat_json(m.train)}};
        } else if constexpr (std::is_same_v<M, DecisionTree>) {
          return {{"nodes", tree_json(m)}};
        } else {
          json trees = json::array();
          for (const auto& t : m.trees) trees.push_back(tree_json(t));
          return {{"trees", std::move(trees)}};
        }
      },
      model);
}

FeatureLayout layout_of_model(const ModelFile& file) {
  if (!file.is_presence()) return layout_of(std::get<CountModel>(file.model));
  const auto& pm = std::get<PresenceModel>(file.model);
  return std::visit(
      [](const auto& m) -> FeatureLayout {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, IsolationForestModel>) return m.layout;
        else return FeatureLayout(m.detectors, 8);
      },
      pm);
}

}  // namespace

std::string ModelFile::kind() const {
  if (is_presence()) return method_name(method_of(std::get<PresenceModel>(model)));
  return model_kind(std::get<CountModel>(model));
}

json to_json(const ModelFile& file) {
  const FeatureLayout layout = layout_of_model(file);
  json j;
  j["format_version"] = file.format_version;
  j["kind"] = file.kind();
  j["created_at"] = file.created_at;
  j["config"] = {{"tau", file.config.tau},
                 {"rate", file.config.rate},
                 {"seed", file.config.seed},
                 {"detectors", file.config.detectors}};
  j["layout"] = layout_json(layout);
  if (file.is_presence()) {
    j["payload"] = payload(std::get<PresenceModel>(file.model));
  } else {
    const auto& cm = std::get<CountModel>(file.model);
    j["class_set"] = class_set_of(cm);
    j["payload"] = payload(cm);
  }
  return j;
}

ModelFile model_file_from_json(const json& j) {
  try {
    ModelFile file;
    file.format_version = j.at("format_version").get<int>();
    if (file.format_version != ModelFile::kFormatVersion) {
      throw Error(Errc::ModelMismatch, "unsupported model format version " + std::to_string(file.format_version));
    }
    file.created_at = j.value("created_at", "");
    const auto& c = j.at("config");
    file.config.tau = c.at("tau").get<Real>();
    file.config.rate = c.at("rate").get<Real>();
    file.config.seed = c.at("seed").get<std::uint64_t>();
    file.config.detectors = c.at("detectors").get<std::vector<DetectorId>>();

    const std::string kind = j.at("kind").get<std::string>();
    const FeatureLayout layout = layout_from(j.at("layout"));
    const json& p = j.at("payload");

    if (kind == "m1") {
      Method1Model m;
      m.detectors = p.at("detectors").get<std::vector<DetectorId>>();
      m.sigma_bar = vec_from(p.at("sigma_bar"));
      m.f = p.at("f").get<Real>();
      file.model = PresenceModel(m);
    } else if (kind == "m2a") {
      Method2aModel m;
      m.detectors = p.at("detectors").get<std::vector<DetectorId>>();
      m.correlated_noise_dev = p.at("correlated_noise_dev").get<Real>();
      m.factor = p.at("factor").get<Real>();
      file.model = PresenceModel(m);
    } else if (kind == "m2b") {
      Method2bModel m;
      m.detectors = p.at("detectors").get<std::vector<DetectorId>>();
      m.sigma_product_series = p.at("sigma_product_series").get<Real>();
      m.factor = p.at("factor").get<Real>();
      file.model = PresenceModel(m);
    } else if (kind == "iforest") {
      std::vector<IsolationForest::Tree> trees;
      for (const auto& t : p.at("trees")) {
        IsolationForest::Tree tree;
        for (const auto& n : t) {
          tree.push_back({n.at(0).get<int>(), n.at(1).get<Real>(), n.at(2).get<int>(), n.at(3).get<int>(),
                          n.at(4).get<int>()});
        }
        trees.push_back(std::move(tree));
      }
      IsolationForestModel m;
      m.forest = IsolationForest(std::move(trees), p.at("subsample").get<int>(), p.at("height_limit").get<int>(),
                                 layout.size());
      m.layout = layout;
      m.score_threshold = p.at("score_threshold").get<Real>();
      m.quantile = p.at("quantile").get<Real>();
      file.model = PresenceModel(std::move(m));
    } else if (kind == "knn" || kind == "tree" || kind == "forest") {
      const auto class_set = j.at("class_set").get<std::vector<int>>();
      if (kind == "knn") {
        KnnModel m;
        m.neighbors = p.at("neighbors").get<int>();
        m.mean = vec_from(p.at("mean"));
        m.scale = vec_from(p.at("scale"));
        m.labels = p.at("labels").get<std::vector<int>>();
        m.train = mat_from(p.at("train"), layout.size());
        m.layout = layout;
        m.class_set = class_set;
        file.model = CountModel(std::move(m));
      } else if (kind == "tree") {
        file.model = CountModel(tree_from(p.at("nodes"), layout, class_set));
      } else {
        RandomForest f;
        f.layout = layout;
        f.class_set = class_set;
        for (const auto& t : p.at("trees")) f.trees.push_back(tree_from(t, layout, class_set));
        file.model = CountModel(std::move(f));
      }
    } else {
      throw Error(Errc::ModelMismatch, "unknown model kind '" + kind + "'");
    }
    return file;
  } catch (const json::exception& e) {
    throw Error(Errc::ModelMismatch, std::string("malformed model file: ") + e.what());
  }
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write '" + path.string() + "'");
  out << to_json(file).dump(1) << '\n';
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open '" + path.string() + "'");
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::ModelMismatch, "'" + path.string() + "' is not valid JSON");
  return model_file_from_json(j);
}

void require_compatible(const ModelFile& file, Real tau, Real rate) {
  auto differs = [](Real a, Real b) { return std::abs(a - b) > 1e-9 * std::max<Real>(1, std::abs(b)); };
  if (differs(file.config.tau, tau) || differs(file.config.rate, rate)) {
    throw Error(Errc::ModelMismatch, "model was built with tau=" + std::to_string(file.config.tau) +
                                         " rate=" + std::to_string(file.config.rate) + ", request has tau=" +
                                         std::to_string(tau) + " rate=" + std::to_string(rate));
  }
}

}  // namespace wifisense
