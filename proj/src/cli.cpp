#include "wifisense/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "wifisense/counting.hpp"
#include "wifisense/error.hpp"
#include "wifisense/io.hpp"
#include "wifisense/model_file.hpp"
#include "wifisense/presence.hpp"
#include "wifisense/report.hpp"
#include "wifisense/simulator.hpp"

namespace wifisense::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  Real tau = 20;
  Real rate = 20;
  std::uint64_t seed = 1;
  std::vector<DetectorId> detectors;
  std::string format;
};

struct LabeledPath {
  int label = 0;
  std::string path;
};

LabeledPath parse_labeled(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw UsageError("--labeled expects COUNT=PATH, got '" + spec + "'");
  }
  int label = 0;
  try {
    std::size_t used = 0;
    label = std::stoi(spec.substr(0, eq), &used);
    if (used != eq || label < 0) throw std::invalid_argument("count");
  } catch (const std::exception&) {
    throw UsageError("bad person count in '" + spec + "'");
  }
  return {label, spec.substr(eq + 1)};
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Session restrict_detectors(Session s, const std::vector<DetectorId>& keep) {
  if (keep.empty()) return s;
  std::vector<DetectorSeries> kept;
  for (DetectorId id : keep) {
    const DetectorSeries* series = s.find(id);
    if (series == nullptr) throw Error(Errc::DetectorMismatch, "session lacks detector " + std::to_string(id));
    kept.push_back(*series);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.detector_id < b.detector_id; });
  s.series = std::move(kept);
  return s;
}

// Writes to `path` when given, otherwise to the command's output stream.
template <typename Fn>
void emit(const std::string& path, std::ostream& out, Fn&& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error(Errc::Io, "cannot write '" + path + "'");
  write(file);
}

bool csv_report(const Globals& g) {
  if (g.format.empty() || g.format == "json") return false;
  if (g.format == "csv") return true;
  throw UsageError("report format must be json or csv, got '" + g.format + "'");
}

Session load_session(const std::string& path, Label label) { return io::ingest_file(path, std::nullopt, label); }

std::vector<Session> load_labeled(const std::vector<std::string>& specs) {
  std::vector<Session> sessions;
  for (const auto& spec : specs) {
    const LabeledPath lp = parse_labeled(spec);
    sessions.push_back(load_session(lp.path, Label::persons(lp.label)));
  }
  return sessions;
}

std::vector<DetectorId> detectors_or_all(const Globals& g, const Session& s) {
  return g.detectors.empty() ? s.detector_ids() : g.detectors;
}

// Subcommands ----------------------------------------------------------------

struct SimulateArgs {
  std::string variant = "m1";
  int people = 0;
  Real duration = 1200;
  Real moving_fraction = 1.0;
  Real walk_speed = 1.0;
  std::string out;
};

void cmd_simulate(const Globals& g, const SimulateArgs& a, std::ostream& out) {
  sim::Scene scene = sim::make_scene(sim::parse_variant(a.variant), g.seed);
  scene.rate = g.rate;
  sim::SimConfig config;
  config.people = a.people;
  config.duration = a.duration;
  config.fraction_moving = a.moving_fraction;
  config.walk_speed = a.walk_speed;
  const Session session = restrict_detectors(sim::simulate(scene, config), g.detectors);
  const io::Format format = !g.format.empty() ? io::parse_format(g.format)
                            : a.out.empty()   ? io::Format::Csv
                                              : io::format_for_path(a.out);
  emit(a.out, out, [&](std::ostream& os) { io::write_session(session, os, format); });
  if (!a.out.empty()) {
    const json summary = {{"session", a.out},
                          {"variant", a.variant},
                          {"label", session.label.count},
                          {"detectors", session.detector_ids()},
                          {"duration_s", session.duration},
                          {"seed", g.seed}};
    out << summary.dump(1) << '\n';
  }
}

struct CalibrateArgs {
  std::string method;
  std::string noise;
  std::string out;
  Real f = 2.2;
  Real factor = 3;
  int trees = 100;
  int subsample = 256;
  Real quantile = 0.98;
  int bins = 8;
};

void cmd_calibrate(const Globals& g, const CalibrateArgs& a, std::ostream& out) {
  const PresenceMethod method = parse_method(a.method);
  const Session noise = restrict_detectors(load_session(a.noise, Label::noise()), g.detectors);

  ModelFile file;
  file.created_at = utc_now();
  file.config = {g.tau, g.rate, g.seed, noise.detector_ids()};
  json summary;
  switch (method) {
    case PresenceMethod::Method1: {
      const auto m = calibrate_method1(split_windows(noise, g.tau), a.f);
      summary = {{"sigma_bar", std::vector<Real>(m.sigma_bar.data(), m.sigma_bar.data() + m.sigma_bar.size())},
                 {"f", m.f}};
      file.model = PresenceModel(m);
      break;
    }
    case PresenceMethod::Method2a: {
      const auto m = calibrate_method2a(noise, a.factor);
      summary = {{"correlated_noise_dev", m.correlated_noise_dev}, {"factor", m.factor}};
      file.model = PresenceModel(m);
      break;
    }
    case PresenceMethod::Method2b: {
      const auto m = calibrate_method2b(align_series(noise, g.rate), a.factor);
      summary = {{"sigma_product_series", m.sigma_product_series}, {"factor", m.factor}};
      file.model = PresenceModel(m);
      break;
    }
    case PresenceMethod::IsolationForest: {
      FeatureConfig fc;
      fc.spectrum_bins = a.bins;
      std::vector<FeatureVector> fvs;
      for (const auto& ws : split_windows(noise, g.tau)) fvs.push_back(feature_vector(ws, fc));
      IsolationForestConfig config;
      config.forest.trees = a.trees;
      config.forest.subsample = a.subsample;
      config.quantile = a.quantile;
      auto m = fit_isolation_forest(fvs, config, g.seed);
      summary = {{"score_threshold", m.score_threshold}, {"trees", a.trees}, {"subsample", m.forest.subsample()}};
      file.model = PresenceModel(std::move(m));
      break;
    }
  }
  save_model(file, a.out);
  summary["kind"] = file.kind();
  summary["model"] = a.out;
  out << summary.dump(1) << '\n';
}

std::vector<WindowSet> presence_windows(const ModelFile& file, const Session& session, const Globals& g) {
  const auto& model = std::get<PresenceModel>(file.model);
  if (method_of(model) == PresenceMethod::Method2b) return split_windows(align_series(session, g.rate), g.tau);
  return split_windows(session, g.tau);
}

// Models fix their own detector set; a conflicting --detectors is refused.
void require_detectors(const ModelFile& file, const Globals& g) {
  if (g.detectors.empty()) return;
  std::vector<DetectorId> wanted = g.detectors;
  std::sort(wanted.begin(), wanted.end());
  wanted.erase(std::unique(wanted.begin(), wanted.end()), wanted.end());
  if (wanted != file.config.detectors) throw Error(Errc::ModelMismatch, "--detectors disagrees with the model's detectors");
}

ModelFile load_checked(const std::string& path, const Globals& g, bool presence) {
  ModelFile file = load_model(path);
  require_compatible(file, g.tau, g.rate);
  require_detectors(file, g);
  if (file.is_presence() != presence) {
    throw Error(Errc::ModelMismatch, "'" + path + "' holds a " + file.kind() + " model, expected a " +
                                         (presence ? "presence" : "counting") + " model");
  }
  return file;
}

struct DetectArgs {
  std::string model;
  std::string session;
  int listen = -1;
  std::string out;
};

void cmd_detect(const Globals& g, const DetectArgs& a, std::ostream& out) {
  if (a.session.empty() == (a.listen < 0)) throw UsageError("detect needs exactly one of --session or --listen");
  const ModelFile file = load_checked(a.model, g, true);
  Session session;
  if (a.listen >= 0) {
    io::TcpListener listener(static_cast<std::uint16_t>(a.listen));
    session = listener.accept_session();
  } else {
    session = load_session(a.session, Label::noise());
  }
  const auto& model = std::get<PresenceModel>(file.model);
  PresenceReport report;
  report.method = file.kind();
  for (const auto& ws : presence_windows(file, session, g)) {
    const PresenceDecision d = detect(model, ws);
    report.trace.push_back({ws.start(), 0, d.label, d.score});
  }
  report.windows = report.trace.size();
  if (csv_report(g)) {
    emit(a.out, out, [&](std::ostream& os) {
      os << "start_s,label,score\n";
      for (const auto& t : report.trace) os << io::format_real(t.start) << ',' << t.predicted << ',' << io::format_real(t.score) << '\n';
    });
    return;
  }
  json decisions = json::array();
  for (const auto& t : report.trace) decisions.push_back({{"start_s", t.start}, {"label", t.predicted}, {"score", t.score}});
  const json j = {{"method", report.method}, {"windows", report.windows}, {"decisions", std::move(decisions)}};
  emit(a.out, out, [&](std::ostream& os) { os << j.dump(1) << '\n'; });
}

struct TrainArgs {
  std::string algorithm = "forest";
  std::vector<std::string> labeled;
  int folds = 3;
  int neighbors = 5;
  int trees = 100;
  int max_depth = -1;
  int min_leaf = 1;
  int bins = 8;
  bool include_noise = false;
  std::string out;
  std::string report;
};

AlgorithmSpec spec_from(const std::string& name, const TrainArgs& a) {
  AlgorithmSpec spec = parse_algorithm(name);
  const std::optional<int> depth = a.max_depth >= 0 ? std::optional<int>(a.max_depth) : std::nullopt;
  if (auto* k = std::get_if<KnnParams>(&spec)) k->neighbors = a.neighbors;
  if (auto* t = std::get_if<TreeParams>(&spec)) *t = TreeParams{depth, a.min_leaf};
  if (auto* f = std::get_if<ForestParams>(&spec)) {
    f->trees = a.trees;
    f->max_depth = depth;
    f->min_leaf = a.min_leaf;
  }
  return spec;
}

void cmd_train(const Globals& g, const TrainArgs& a, std::ostream& out) {
  const std::vector<Session> sessions = load_labeled(a.labeled);
  const auto detectors = detectors_or_all(g, sessions.front());
  DatasetOptions options{g.tau, a.bins, a.include_noise};
  const LabeledDataset data = build_dataset(sessions, detectors, options);
  const AlgorithmSpec spec = spec_from(a.algorithm, a);
  const CvReport cv = cross_validate(spec, data, a.folds, g.seed);

  ModelFile file;
  file.created_at = utc_now();
  file.config = {g.tau, g.rate, g.seed, data.layout.detectors()};
  file.model = fit_count_model(spec, data, g.seed);
  if (!a.out.empty()) save_model(file, a.out);

  json j = to_json(cv);
  j["algorithm"] = algorithm_name(spec);
  emit(a.report, out, [&](std::ostream& os) { os << j.dump(1) << '\n'; });
}

std::vector<CountPrediction> predict_windows(const ModelFile& file, const Session& session, const Globals& g) {
  const auto& model = std::get<CountModel>(file.model);
  FeatureConfig fc;
  fc.spectrum_bins = layout_of(model).bins();
  fc.detectors = layout_of(model).detectors();
  std::vector<CountPrediction> out;
  for (const auto& ws : split_windows(session, g.tau)) out.push_back({ws.start(), predict_count(model, feature_vector(ws, fc))});
  return out;
}

struct PredictArgs {
  std::string model;
  std::string session;
  std::string out;
};

void cmd_predict(const Globals& g, const PredictArgs& a, std::ostream& out) {
  const ModelFile file = load_checked(a.model, g, false);
  const auto predictions = predict_windows(file, load_session(a.session, Label::noise()), g);
  if (csv_report(g)) {
    emit(a.out, out, [&](std::ostream& os) { write_predictions_csv(predictions, os); });
  } else {
    const json j = {{"algorithm", file.kind()}, {"windows", predictions.size()}, {"predictions", to_json(predictions)}};
    emit(a.out, out, [&](std::ostream& os) { os << j.dump(1) << '\n'; });
  }
}

struct SweepArgs {
  std::vector<std::string> labeled;
  std::vector<std::string> algorithms{"knn", "tree", "forest"};
  std::vector<DetectorId> order;
  int folds = 3;
  int bins = 8;
  std::string out;
};

void cmd_sweep(const Globals& g, const SweepArgs& a, std::ostream& out) {
  const std::vector<Session> sessions = load_labeled(a.labeled);
  std::vector<DetectorId> order = !a.order.empty() ? a.order : detectors_or_all(g, sessions.front());
  std::vector<AlgorithmSpec> specs;
  for (const auto& name : a.algorithms) specs.push_back(parse_algorithm(name));
  const SweepReport report = detector_sweep(sessions, specs, order, a.folds, g.seed, DatasetOptions{g.tau, a.bins, false});
  if (csv_report(g)) {
    emit(a.out, out, [&](std::ostream& os) { write_sweep_csv(report, os); });
  } else {
    emit(a.out, out, [&](std::ostream& os) { os << to_json(report).dump(1) << '\n'; });
  }
}

struct EvaluateArgs {
  std::string model;
  std::string session;
  int label = -1;
  std::string out;
};

void cmd_evaluate(const Globals& g, const EvaluateArgs& a, std::ostream& out) {
  const ModelFile file = load_model(a.model);
  require_compatible(file, g.tau, g.rate);
  require_detectors(file, g);
  const Label truth = Label::persons(a.label);
  const Session session = load_session(a.session, truth);
  json j;
  if (file.is_presence()) {
    const auto windows = presence_windows(file, session, g);
    const PresenceReport report = evaluate_presence(std::get<PresenceModel>(file.model), windows);
    if (csv_report(g)) {
      emit(a.out, out, [&](std::ostream& os) { write_trace_csv(report, os); });
      return;
    }
    j = to_json(report);
  } else {
    CountEvaluation e;
    e.algorithm = file.kind();
    e.truth = a.label;
    e.trace = predict_windows(file, session, g);
    e.windows = e.trace.size();
    e.correct = static_cast<std::size_t>(
        std::count_if(e.trace.begin(), e.trace.end(), [&](const auto& p) { return p.label == a.label; }));
    e.accuracy = e.windows > 0 ? static_cast<Real>(e.correct) / static_cast<Real>(e.windows) : 0;
    if (csv_report(g)) {
      emit(a.out, out, [&](std::ostream& os) { write_predictions_csv(e.trace, os); });
      return;
    }
    j = to_json(e);
  }
  emit(a.out, out, [&](std::ostream& os) { os << j.dump(1) << '\n'; });
}

struct ListenArgs {
  int port = -1;
  std::string out;
  int label = 0;
};

void cmd_listen(const Globals& g, const ListenArgs& a, std::ostream& out) {
  io::TcpListener listener(static_cast<std::uint16_t>(a.port));
  const Session session = listener.accept_session(Label::persons(a.label));
  const io::Format format = !g.format.empty() ? io::parse_format(g.format)
                            : a.out.empty()   ? io::Format::Csv
                                              : io::format_for_path(a.out);
  emit(a.out, out, [&](std::ostream& os) { io::write_session(session, os, format); });
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::ModelMismatch:
    case Errc::LayoutMismatch:
      return kModelMismatch;
    case Errc::InvalidArgument:
      return kUsage;
    default:
      return kDataError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Presence detection and people counting from Wi-Fi RSSI time series", "wifisense"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--tau", g.tau, "Window length in seconds")->check(CLI::PositiveNumber);
  app.add_option("--rate", g.rate, "Sample rate in samples per second")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Seed for every randomized step");
  app.add_option("--detectors", g.detectors, "Detector subset")->delimiter(',');
  app.add_option("--format", g.format, "Session format (csv, ndjson) or report format (json, csv)");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic labeled session");
  simulate->add_option("--variant", sim_args.variant, "Scene: m1, m2 or counting");
  simulate->add_option("--people", sim_args.people, "Number of people")->check(CLI::NonNegativeNumber);
  simulate->add_option("--duration", sim_args.duration, "Session length in seconds")->check(CLI::PositiveNumber);
  simulate->add_option("--moving-fraction", sim_args.moving_fraction, "Share of people walking")->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--walk-speed", sim_args.walk_speed, "Walking speed in m/s")->check(CLI::NonNegativeNumber);
  simulate->add_option("--out", sim_args.out, "Output file (stdout when omitted)");

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Fit a presence model on a noise-only session");
  calibrate->add_option("--method", cal.method, "m1, m2a, m2b or iforest")->required();
  calibrate->add_option("--noise", cal.noise, "Noise session file")->required();
  calibrate->add_option("--out", cal.out, "Model file to write")->required();
  calibrate->add_option("--f", cal.f, "Method 1 threshold factor");
  calibrate->add_option("--factor", cal.factor, "Method 2a/2b threshold factor");
  calibrate->add_option("--trees", cal.trees, "Isolation forest size")->check(CLI::PositiveNumber);
  calibrate->add_option("--subsample", cal.subsample, "Isolation forest subsample")->check(CLI::PositiveNumber);
  calibrate->add_option("--quantile", cal.quantile, "Isolation forest score quantile");
  calibrate->add_option("--bins", cal.bins, "Spectrum bins per detector")->check(CLI::PositiveNumber);

  DetectArgs det;
  auto* detect_cmd = app.add_subcommand("detect", "Per-window presence decisions");
  detect_cmd->add_option("--model", det.model, "Presence model file")->required();
  detect_cmd->add_option("--session", det.session, "Session file");
  detect_cmd->add_option("--listen", det.listen, "Receive the session as NDJSON on this TCP port");
  detect_cmd->add_option("--out", det.out, "Report file (stdout when omitted)");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train-count", "Cross-validate and fit a people-counting model");
  train_cmd->add_option("--algorithm", train.algorithm, "knn, tree or forest");
  train_cmd->add_option("--labeled", train.labeled, "COUNT=PATH, repeatable")->required();
  train_cmd->add_option("--folds", train.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
  train_cmd->add_option("--neighbors", train.neighbors, "KNN neighbours")->check(CLI::PositiveNumber);
  train_cmd->add_option("--trees", train.trees, "Forest size")->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-depth", train.max_depth, "Tree depth limit (-1: none)");
  train_cmd->add_option("--min-leaf", train.min_leaf, "Minimum samples per leaf")->check(CLI::PositiveNumber);
  train_cmd->add_option("--bins", train.bins, "Spectrum bins per detector")->check(CLI::PositiveNumber);
  train_cmd->add_flag("--include-noise", train.include_noise, "Keep 0-person sessions as a class");
  train_cmd->add_option("--out", train.out, "Model file to write");
  train_cmd->add_option("--report", train.report, "Cross-validation report file (stdout when omitted)");

  PredictArgs pred;
  auto* predict_cmd = app.add_subcommand("predict-count", "Per-window people counts");
  predict_cmd->add_option("--model", pred.model, "Counting model file")->required();
  predict_cmd->add_option("--session", pred.session, "Session file")->required();
  predict_cmd->add_option("--out", pred.out, "Report file (stdout when omitted)");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Counting accuracy against the number of detectors");
  sweep_cmd->add_option("--labeled", sweep.labeled, "COUNT=PATH, repeatable")->required();
  sweep_cmd->add_option("--algorithms", sweep.algorithms, "Algorithms to compare")->delimiter(',');
  sweep_cmd->add_option("--order", sweep.order, "Detector order")->delimiter(',');
  sweep_cmd->add_option("--folds", sweep.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
  sweep_cmd->add_option("--bins", sweep.bins, "Spectrum bins per detector")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sweep.out, "Report file (stdout when omitted)");

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Accuracy of a model on a labeled session");
  eval_cmd->add_option("--model", eval.model, "Model file")->required();
  eval_cmd->add_option("--session", eval.session, "Session file")->required();
  eval_cmd->add_option("--label", eval.label, "True person count (0 for noise)")->required()->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--out", eval.out, "Report file (stdout when omitted)");

  ListenArgs listen;
  auto* listen_cmd = app.add_subcommand("listen", "Record one NDJSON session from a TCP stream");
  listen_cmd->add_option("--port", listen.port, "TCP port")->required()->check(CLI::Range(0, 65535));
  listen_cmd->add_option("--label", listen.label, "Person count of the session")->check(CLI::NonNegativeNumber);
  listen_cmd->add_option("--out", listen.out, "Session file (stdout when omitted)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto chosen = app.get_subcommands();
    out << (chosen.empty() ? app.help() : chosen.front()->help());
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (simulate->parsed()) cmd_simulate(g, sim_args, out);
    else if (calibrate->parsed()) cmd_calibrate(g, cal, out);
    else if (detect_cmd->parsed()) cmd_detect(g, det, out);
    else if (train_cmd->parsed()) cmd_train(g, train, out);
    else if (predict_cmd->parsed()) cmd_predict(g, pred, out);
    else if (sweep_cmd->parsed()) cmd_sweep(g, sweep, out);
    else if (eval_cmd->parsed()) cmd_evaluate(g, eval, out);
    else if (listen_cmd->parsed()) cmd_listen(g, listen, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kOk;
}

}  // namespace wifisense::cli
