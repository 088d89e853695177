/*
 * Copyright 2026 The freqsev Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "freqsev/cli.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <list>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "CLI11.hpp"
#include "freqsev/csv.hpp"
#include "freqsev/data.hpp"
#include "freqsev/error.hpp"
#include "freqsev/interpret.hpp"
#include "freqsev/lift.hpp"
#include "freqsev/model.hpp"
#include "freqsev/rng.hpp"
#include "freqsev/simd/kernels.hpp"
#include "freqsev/simulate.hpp"
#include "freqsev/tune.hpp"
#include "json.hpp"

namespace freqsev::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string out;
};

// State of one command run: the parsed config, resolved paths and the
// files read and written, which end up in the manifest.
class Run {
 public:
  Run(std::string command, const Flags& flags) : command_(std::move(command)) {
    const fs::path path(flags.config);
    std::string text;
    try {
      text = read_file(path);
    } catch (const DataError&) {
      throw UsageError("cannot read config " + path.string());
    }
    try {
      config_ = json::parse(text);
    } catch (const json::exception& e) {
      throw UsageError("config: " + std::string(e.what()));
    }
    if (!config_.is_object()) throw UsageError("config: expected a JSON object");
    base_ = path.parent_path();
    if (flags.seed) config_["seed"] = *flags.seed;
    threads_ = flags.threads.value_or(config_.value("threads", std::size_t{1}));
    if (threads_ == 0) throw UsageError("threads must be positive");
    config_.erase("threads");
    out_ = !flags.out.empty() ? fs::path(flags.out)
           : config_.contains("out") ? base_ / get<std::string>("out")
                                     : fs::path(".");
    config_.erase("out");
    fs::create_directories(out_);
  }

  const json& config() const { return config_; }
  std::size_t threads() const { return threads_; }

  bool has(const char* key) const { return config_.contains(key) && !config_.at(key).is_null(); }

  template <typename T>
  T get(const char* key) const {
    if (!config_.contains(key)) throw UsageError(std::string("config: missing key '") + key + "'");
    try {
      return config_.at(key).get<T>();
    } catch (const json::exception&) {
      throw UsageError(std::string("config: bad value for '") + key + "'");
    }
  }

  template <typename T>
  T get(const char* key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  std::uint64_t seed() const {
    if (!has("seed")) throw UsageError("a seed is required (--seed or config key 'seed')");
    return get<std::uint64_t>("seed");
  }

  // Input path from the config, relative to the config file.
  fs::path input(const std::string& relative) {
    const fs::path p = base_ / relative;
    inputs_[relative] = hex64(fnv1a(read_file(p)));
    return p;
  }
  fs::path input_key(const char* key) { return input(get<std::string>(key)); }

  // Stays open until finish().
  std::ofstream& output(const std::string& name) {
    const fs::path p = out_ / name;
    fs::create_directories(p.parent_path());
    std::ofstream& f = files_.emplace_back(p, std::ios::binary);
    if (!f) throw DataError("cannot write " + p.string());
    outputs_.push_back(name);
    return f;
  }

  void write_json(const std::string& name, const json& j) { output(name) << j.dump(2) << '\n'; }

  void finish() {
    for (std::size_t i = 0; i < outputs_.size(); ++i) {
      auto it = std::next(files_.begin(), static_cast<std::ptrdiff_t>(i));
      it->close();
      if (!*it) throw DataError("cannot write " + (out_ / outputs_[i]).string());
    }
    json manifest = {{"command", command_},
                     {"config", config_},
                     {"config_hash", hex64(fnv1a(config_.dump()))},
                     {"seed", has("seed") ? json(get<std::uint64_t>("seed")) : json(nullptr)},
                     {"inputs", inputs_},
                     {"outputs", outputs_},
                     {"versions",
                      {{"freqsev", kVersion},
                       {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                             std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                             std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                       {"cli11", CLI11_VERSION},
                       {"compiler", __VERSION__},
                       {"kernels", std::string(simd::to_string(simd::active_isa()))}}}};
    std::ofstream(out_ / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
    const json info = {{"command", command_},
                       {"started", started_},
                       {"finished", utc_now()},
                       {"threads", threads_}};
    std::ofstream(out_ / "run_info.json", std::ios::binary) << info.dump(2) << '\n';
  }

 private:
  std::string command_;
  json config_;
  fs::path base_;
  fs::path out_;
  std::size_t threads_ = 1;
  std::map<std::string, std::string> inputs_;
  std::vector<std::string> outputs_;
  std::list<std::ofstream> files_;
  std::string started_ = utc_now();
};

Schema load_schema(Run& run) {
  const json j = json::parse(read_file(run.input_key("schema")), nullptr, false);
  if (j.is_discarded()) throw DataError("schema: not valid JSON");
  try {
    return Schema::from_json(j);
  } catch (const json::exception& e) {
    throw DataError(std::string("schema: ") + e.what());
  }
}

Portfolio load_input_portfolio(Run& run, const Schema& schema) {
  return load_portfolio(run.input_key("portfolio"), schema);
}

Model load_model(Run& run, const std::string& path) { return Model::load(run.input(path)); }

// Portfolio read with the declared schema, or with the model's own.
Portfolio portfolio_for_model(Run& run, const Model& model) {
  const Schema schema = run.has("schema") ? load_schema(run) : model.schema();
  Portfolio p = load_input_portfolio(run, schema);
  if (!(p.schema() == model.schema())) {
    throw DataError("portfolio schema differs from the model schema");
  }
  return p;
}

FoldAssignment load_folds(Run& run, const Portfolio& portfolio) {
  std::ifstream in(run.input_key("folds"));
  return read_folds(in, portfolio);
}

RegressionProblem problem_for(const Run& run, const Portfolio& portfolio) {
  const auto response = run.get<std::string>("response", "frequency");
  if (response == "frequency") return frequency_view(portfolio);
  if (response == "severity") return severity_view(portfolio);
  throw UsageError("response must be 'frequency' or 'severity'");
}

Scale scale_for(const Run& run) {
  const auto s = run.get<std::string>("scale", "response");
  if (s == "response") return Scale::Response;
  if (s == "link") return Scale::Link;
  throw UsageError("scale must be 'response' or 'link'");
}

std::vector<std::size_t> feature_list(const Run& run, const char* key, const Schema& schema,
                                      bool all_by_default) {
  std::vector<std::size_t> out;
  if (!run.has(key)) {
    if (all_by_default) {
      for (std::size_t j = 0; j < schema.size(); ++j) out.push_back(j);
    }
    return out;
  }
  for (const auto& name : run.get<std::vector<std::string>>(key)) out.push_back(schema.index_of(name));
  return out;
}

void cmd_simulate(Run& run) {
  const json& j = run.config().contains("simulation") ? run.config().at("simulation") : json();
  if (!j.is_object()) throw UsageError("config: missing key 'simulation'");
  SimulationConfig cfg;
  if (j.contains("preset")) {
    if (j.at("preset") != "mtpl") throw UsageError("simulation: unknown preset");
    if (!j.contains("n") || !j.at("n").is_number_integer() || j.at("n").get<long long>() <= 0) {
      throw UsageError("simulation: n must be a positive integer");
    }
    cfg = SimulationConfig::mtpl(j.at("n").get<std::size_t>());
  } else {
    cfg = SimulationConfig::from_json(j);
  }
  const auto sim = simulate_portfolio(cfg, run.seed());
  write_portfolio(run.output("portfolio.csv"), sim.portfolio);
  run.write_json("schema.json", sim.portfolio.schema().to_json());
  run.write_json("simulation.json", cfg.to_json());
  auto& truth = run.output("truth.csv");
  truth << "id,eta_frequency,eta_severity\n";
  for (std::size_t i = 0; i < sim.portfolio.size(); ++i) {
    truth << csv::escape(sim.portfolio[i].id) << ',' << csv::format_double(sim.eta_frequency[i])
          << ',' << csv::format_double(sim.eta_severity[i]) << '\n';
  }
}

void cmd_folds(Run& run) {
  const Portfolio portfolio = load_input_portfolio(run, load_schema(run));
  const int k = run.get<int>("k", 6);
  const auto method = run.get<std::string>("method", "stratified");
  FoldAssignment folds;
  if (method == "stratified") {
    folds = stratified_folds(portfolio, k, run.seed());
  } else if (method == "random") {
    folds = random_folds(portfolio.size(), k, run.seed());
  } else {
    throw UsageError("method must be 'stratified' or 'random'");
  }
  write_folds(run.output("folds.csv"), portfolio, folds);
}

void cmd_tune(Run& run) {
  const Portfolio portfolio = load_input_portfolio(run, load_schema(run));
  const RegressionProblem problem = problem_for(run, portfolio);
  const FoldAssignment folds = load_folds(run, portfolio).restrict(problem.source_rows);
  if (!run.has("grid")) throw UsageError("config: missing key 'grid'");
  const TuningGrid grid =
      TuningGrid::from_json(run.config().at("grid"), problem.loss, problem.schema.size());
  CvOptions options;
  options.threads = run.threads();
  options.keep_models = run.get<bool>("keep_models", false);
  const CvReport report = run_cv(problem, folds, grid, run.seed(), options);
  report.write_csv(run.output("cv_records.csv"));
  json summary = report.summary();
  summary["grid"] = grid.to_json();
  run.write_json("cv_report.json", summary);
  for (std::size_t i = 0; i < report.models.size(); ++i) {
    run.write_json("models/fold_" + std::to_string(report.folds[i].fold) + ".json",
                   report.models[i].to_json());
  }
}

// A fixed point written like a grid with scalar axes, e.g.
// {"model_class": "gbm", "trees": 300, "depth": 3, "fixed": {...}}.
TuningGrid single_point_grid(const json& model, LossKind loss, std::size_t features) {
  if (!model.is_object() || !model.contains("model_class")) {
    throw UsageError("config: 'model' needs a model_class");
  }
  json g = model;
  for (const char* axis : {"cp", "trees", "mtry", "depth"}) {
    if (g.contains(axis) && !g.at(axis).is_array()) g[axis] = json::array({g.at(axis)});
  }
  if (!g.contains("shrinkage_cv") || g.at("shrinkage_cv").is_null()) {
    g["shrinkage_cv"] = json::array();
  } else if (!g.at("shrinkage_cv").is_array()) {
    g["shrinkage_cv"] = json::array({g.at("shrinkage_cv")});
  }
  TuningGrid grid = TuningGrid::from_json(g, loss, features);
  const char* axes[] = {"cp", "trees", "mtry", "depth"};
  for (const char* axis : axes) {
    const bool used = (grid.model_class == ModelClass::Tree && std::string(axis) == "cp") ||
                      (grid.model_class != ModelClass::Tree && std::string(axis) == "trees") ||
                      (grid.model_class == ModelClass::Forest && std::string(axis) == "mtry") ||
                      (grid.model_class == ModelClass::Gbm && std::string(axis) == "depth");
    if (used && !model.contains(axis)) throw UsageError(std::string("config: model needs '") + axis + "'");
  }
  return grid;
}

void cmd_fit(Run& run) {
  const Portfolio portfolio = load_input_portfolio(run, load_schema(run));
  const RegressionProblem problem = problem_for(run, portfolio);
  if (!run.has("model")) throw UsageError("config: missing key 'model'");
  const std::uint64_t seed = run.seed();
  const TuningGrid grid =
      single_point_grid(run.config().at("model"), problem.loss, problem.schema.size());
  grid.validate(problem.loss, problem.schema.size());
  const auto points = grid.points();
  if (points.size() != 1) throw UsageError("config: model must name a single point");
  const TreeGrower grower(problem.schema, problem.x);
  std::vector<std::uint32_t> all(problem.size());
  std::iota(all.begin(), all.end(), std::uint32_t{0});
  const Model model = grid.fit(grower, problem, all, points[0], seed, run.threads());
  run.write_json("model.json", model.to_json());
  std::vector<std::size_t> rows(problem.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto pred = model.predict(problem.x);
  run.write_json("fit_summary.json", {{"model_class", to_string(model.model_class())},
                                      {"loss", to_string(model.loss())},
                                      {"point", points[0].to_json(model.model_class())},
                                      {"rows", problem.size()},
                                      {"train_deviance", mean_deviance(problem, rows, pred)}});
}

void cmd_predict(Run& run) {
  const Model model = load_model(run, run.get<std::string>("model"));
  const Portfolio portfolio = portfolio_for_model(run, model);
  const FeatureMatrix x = feature_matrix(portfolio);
  auto& out = run.output("predictions.csv");
  out << "id,expo,prediction,link\n";
  for (std::size_t i = 0; i < portfolio.size(); ++i) {
    out << csv::escape(portfolio[i].id) << ',' << csv::format_double(portfolio[i].expo) << ','
        << csv::format_double(model.predict(x.row(i))) << ','
        << csv::format_double(model.predict_link(x.row(i))) << '\n';
  }
}

void cmd_interpret(Run& run) {
  const Model model = load_model(run, run.get<std::string>("model"));
  const Portfolio portfolio = portfolio_for_model(run, model);
  const Schema& schema = portfolio.schema();
  const FeatureMatrix x = feature_matrix(portfolio);
  const Scale scale = scale_for(run);
  const std::uint64_t seed = run.seed();
  const std::size_t threads = run.threads();
  std::vector<std::string> ids;
  for (const auto& r : portfolio.records()) ids.push_back(r.id);

  variable_importance(model).write_csv(run.output("importance.csv"));

  const auto pd_rows = sample_rows(x.rows(), run.get<std::size_t>("pd_rows", x.rows()),
                                   derive_seed(seed, {1}));
  const auto ice_rows = sample_rows(x.rows(), run.get<std::size_t>("ice_rows", 100),
                                    derive_seed(seed, {2}));
  const auto grid_points = run.get<std::size_t>("grid_points", 20);
  std::vector<PdCurve> curves;
  std::vector<std::string> names;
  for (std::size_t j : feature_list(run, "features", schema, true)) {
    const auto grid = default_grid(schema, x, j, pd_rows, grid_points);
    curves.push_back(partial_dependence(model, j, grid, x, pd_rows, scale, threads));
    names.push_back("pd");
    const auto bundle = ice(model, j, grid, x, ice_rows, scale, threads);
    write_ice_csv(run.output("ice/" + schema[j].name + ".csv"), schema, bundle, ids);
  }
  write_pd_csv(run.output("pd.csv"), schema, curves, names);

  if (run.has("group_feature")) {
    const std::size_t g = schema.index_of(run.get<std::string>("group_feature"));
    std::vector<PdCurve> grouped;
    std::vector<std::string> labels;
    for (std::size_t j : feature_list(run, "features", schema, true)) {
      if (j == g) continue;
      const auto grid = default_grid(schema, x, j, pd_rows, grid_points);
      for (auto& c : grouped_partial_dependence(model, j, g, grid, x, pd_rows,
                                                run.get<std::size_t>("groups", 5), scale,
                                                threads)) {
        grouped.push_back(std::move(c.curve));
        labels.push_back(c.label);
      }
    }
    write_pd_csv(run.output("grouped_pd.csv"), schema, grouped, labels);
  }

  const auto h_features = feature_list(run, "h_features", schema, false);
  if (!h_features.empty()) {
    const auto h_rows = sample_rows(x.rows(), run.get<std::size_t>("h_rows", 500),
                                    derive_seed(seed, {3}));
    const auto h = h_statistics(model, x, h_rows, h_features, scale, threads);
    write_h_csv(run.output("h.csv"), schema, h);
  }
}

std::vector<std::string> path_list(const json& j) {
  if (j.is_string()) return {j.get<std::string>()};
  if (j.is_array()) return j.get<std::vector<std::string>>();
  throw UsageError("config: a tariff model is a path or a list of paths");
}

std::string file_stem(const std::string& name) {
  std::string s;
  for (char c : name) s += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
  return s;
}

void cmd_lift(Run& run) {
  const Portfolio portfolio = load_input_portfolio(run, load_schema(run));
  std::optional<FoldAssignment> folds;
  if (run.has("folds")) folds = load_folds(run, portfolio);
  if (!run.has("tariffs") || !run.config().at("tariffs").is_array() ||
      run.config().at("tariffs").size() < 2) {
    throw UsageError("config: 'tariffs' must list at least two tariffs");
  }
  const auto bins = run.get<std::size_t>("bins", 5);
  const auto integration_name = run.get<std::string>("integration", "trapezoid");
  LorenzIntegration integration;
  if (integration_name == "trapezoid") {
    integration = LorenzIntegration::Trapezoid;
  } else if (integration_name == "step") {
    integration = LorenzIntegration::Step;
  } else {
    throw UsageError("integration must be 'trapezoid' or 'step'");
  }

  std::vector<std::string> names;
  std::vector<std::vector<double>> premiums;
  for (const auto& t : run.config().at("tariffs")) {
    if (!t.is_object() || !t.contains("name") || !t.contains("frequency") ||
        !t.contains("severity")) {
      throw UsageError("config: a tariff needs name, frequency and severity");
    }
    names.push_back(t.at("name").get<std::string>());
    std::vector<Model> f, s;
    for (const auto& p : path_list(t.at("frequency"))) f.push_back(load_model(run, p));
    for (const auto& p : path_list(t.at("severity"))) s.push_back(load_model(run, p));
    if (f.size() == 1 && s.size() == 1) {
      premiums.push_back(technical_premiums(f[0], s[0], portfolio));
    } else {
      if (!folds) throw UsageError("config: per-fold tariff models need 'folds'");
      premiums.push_back(out_of_sample_premiums(portfolio, *folds, f, s));
    }
  }
  for (std::size_t a = 0; a < names.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      if (names[a] == names[b]) throw UsageError("config: duplicate tariff name " + names[a]);
    }
  }

  std::vector<double> loss, exposure;
  for (const auto& r : portfolio.records()) {
    loss.push_back(r.amount);
    exposure.push_back(r.expo);
  }
  auto& pout = run.output("premiums.csv");
  pout << "id,expo,loss";
  for (const auto& n : names) pout << ',' << csv::escape(n);
  pout << '\n';
  for (std::size_t i = 0; i < portfolio.size(); ++i) {
    pout << csv::escape(portfolio[i].id) << ',' << csv::format_double(exposure[i]) << ','
         << csv::format_double(loss[i]);
    for (const auto& p : premiums) pout << ',' << csv::format_double(p[i]);
    pout << '\n';
  }

  if (folds) {
    auto& rout = run.output("reconciliation.csv");
    rout << "tariff,fold,premium,loss,ratio\n";
    for (std::size_t t = 0; t < names.size(); ++t) {
      for (const auto& r : reconcile(premiums[t], loss, *folds)) {
        rout << csv::escape(names[t]) << ',' << r.fold << ',' << csv::format_double(r.premium)
             << ',' << csv::format_double(r.loss) << ',' << csv::format_double(r.ratio) << '\n';
      }
    }
  }

  for (std::size_t b = 0; b < names.size(); ++b) {
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (b == c) continue;
      const TariffComparison cmp{premiums[b], premiums[c], loss, exposure};
      const std::string pair = file_stem(names[b]) + "_vs_" + file_stem(names[c]);
      const LiftTable table = lift_table(cmp, bins);
      table.write_loss_ratio_csv(run.output("tables/loss_ratio_" + pair + ".csv"));
      table.write_double_lift_csv(run.output("tables/double_lift_" + pair + ".csv"));
      ordered_lorenz(cmp, integration).write_csv(run.output("lorenz/" + pair + ".csv"));
    }
  }
  const GiniMatrix m = gini_matrix(names, premiums, loss, exposure, integration);
  m.write_csv(run.output("gini_matrix.csv"));
  run.write_json("gini_matrix.json", m.to_json());
}

void error_json(std::ostream& err, int code, const char* kind, const std::string& message) {
  err << json{{"error", {{"code", code}, {"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Frequency-severity pricing with trees, forests and boosting", "freqsev");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  using Command = void (*)(Run&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"simulate", "Simulate a portfolio", cmd_simulate},
      {"folds", "Assign cross-validation folds", cmd_folds},
      {"tune", "Cross-validate a tuning grid", cmd_tune},
      {"fit", "Fit one model", cmd_fit},
      {"predict", "Predict with a saved model", cmd_predict},
      {"interpret", "Importance, partial dependence, ICE and H statistics", cmd_interpret},
      {"lift", "Compare tariffs: lift tables, Lorenz curves, Gini matrix", cmd_lift},
  };
  Flags flags;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON config file")->required();
    sub->add_option("--seed", seed, "Seed; overrides the config");
    sub->add_option("--threads", threads, "Worker threads; overrides the config");
    sub->add_option("--out", flags.out, "Output directory; overrides the config");
    subs.emplace_back(sub, fn);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    error_json(err, kUsage, "usage", e.what());
    return kUsage;
  }

  try {
    for (const auto& [sub, fn] : subs) {
      if (!sub->parsed()) continue;
      if (sub->count("--seed")) flags.seed = seed;
      if (sub->count("--threads")) flags.threads = threads;
      Run r(sub->get_name(), flags);
      fn(r);
      r.finish();
    }
    return kOk;
  } catch (const UsageError& e) {
    error_json(err, kUsage, "usage", e.what());
    return kUsage;
  } catch (const DataError& e) {
    error_json(err, kData, "data", e.what());
    return kData;
  } catch (const std::invalid_argument& e) {
    error_json(err, kData, "validation", e.what());
    return kData;
  } catch (const std::exception& e) {
    error_json(err, kInternal, "internal", e.what());
    return kInternal;
  }
}

}  // namespace freqsev::cli
