#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "frechet/config.hpp"
#include "frechet/emit.hpp"
#include "frechet/errors.hpp"
#include "frechet/estimators.hpp"
#include "frechet/evaluate.hpp"
#include "frechet/life_table.hpp"
#include "frechet/model_io.hpp"
#include "frechet/simgen.hpp"

namespace {

using nlohmann::json;
using namespace frechet;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Flags {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<int> parallelism;
  std::optional<std::string> output;
  std::optional<std::string> format;
  std::optional<std::string> model;
  std::optional<int> n;
  std::optional<int> p;
  std::optional<std::string> methods;
  std::optional<std::string> link_moments;
  std::optional<std::string> pm_policy;
  std::optional<std::string> dataset;
  std::optional<std::string> model_path;
  std::optional<std::string> covariates;
  std::optional<std::string> model_output;
};

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json flag_overrides(const Flags& f) {
  json o = json::object();
  if (f.seed) o["seed"] = *f.seed;
  if (f.replications) o["replications"] = *f.replications;
  if (f.parallelism) o["parallelism"] = *f.parallelism;
  if (f.output) o["output.path"] = *f.output;
  if (f.format) o["output.format"] = *f.format;
  if (f.model) o["simulation.model"] = *f.model;
  if (f.n) o["simulation.n"] = *f.n;
  if (f.p) o["simulation.p"] = *f.p;
  if (f.methods) o["methods"] = split_commas(*f.methods);
  if (f.link_moments) o["experiment.link_moments"] = *f.link_moments;
  if (f.pm_policy) o[f.command == "bench" ? "bench.pm_policy" : "simulation.pm_policy"] = *f.pm_policy;
  if (f.dataset) o["dataset.path"] = *f.dataset;
  if (f.model_path) o["model_path"] = *f.model_path;
  if (f.covariates) o["covariates_path"] = *f.covariates;
  if (f.model_output) o["model_output"] = *f.model_output;
  return o;
}

RunConfig load_config(const Flags& f) {
  const json overrides = flag_overrides(f);
  if (!f.config_path.empty()) {
    RunConfig cfg = parse_config_file(f.config_path, overrides);
    if (to_string(cfg.command) != f.command) {
      throw ValidationError("command: config says '" + std::string(to_string(cfg.command)) + "' but '" + f.command +
                            "' was requested");
    }
    return cfg;
  }
  json doc = {{"command", f.command}};
  return parse_config(doc.dump(), overrides);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string render_results(const RunConfig& cfg, const std::vector<ExperimentResult>& results, double wall) {
  const RunInfo info = RunInfo::now(wall);
  return cfg.format == OutputFormat::json ? results_json(results, cfg.provenance(), info)
                                          : results_csv(results, cfg.provenance(), info);
}

int cmd_simulate(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<ExperimentResult> results{
      run_experiment(*cfg.simulation, cfg.methods, cfg.replications, cfg.parallelism, cfg.experiment)};
  write_text(cfg.output_path, render_results(cfg, results, seconds_since(start)));
  return kExitOk;
}

int cmd_bench(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<ExperimentResult> results;
  for (ModelId model : cfg.bench_models) {
    for (int n : cfg.bench_n) {
      SimulationSpec spec = SimulationSpec::defaults(model, cfg.bench_p);
      spec.n = n;
      spec.seed = cfg.seed;
      if (!spec.is_distribution()) spec.pm_policy = cfg.bench_pm_policy;
      std::cerr << "bench: model " << to_string(model) << " n=" << n << "\n";
      results.push_back(run_experiment(spec, cfg.methods, cfg.replications, cfg.parallelism, cfg.experiment));
    }
  }
  write_text(cfg.output_path, render_results(cfg, results, seconds_since(start)));
  return kExitOk;
}

int cmd_fit(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  LifeTableOptions opts;
  opts.grid_size = cfg.grid_size;
  opts.standardize = cfg.standardize;
  const LifeTable table = ingest_life_table(cfg.dataset_path, opts);
  const Dataset& data = table.data;

  FittedModel model;
  switch (cfg.methods.front()) {
    case Method::lfr: model = fit_lfr(data); break;
    case Method::nlfr: {
      const LinkSpec links = index_links(cfg.links);
      const Vector init = cfg.beta_init ? *cfg.beta_init : Vector::Zero(links.q());
      model = fit_nlfr_profile(data, links, BetaSearch::around(init, cfg.experiment.beta_half_width),
                               cfg.experiment.optimizer);
      break;
    }
    case Method::snlfr: {
      const LinkSpec links = index_links(cfg.links);
      model = fit_snlfr(data, links, cfg.h.value_or(default_h(data.space)), cfg.experiment.c_grid.values(),
                        cfg.experiment.refine);
      break;
    }
    case Method::nlfr_lfr: throw ValidationError("methods: NLFR-LFR is a simulation-only method");
  }

  json body = model_to_json(model);
  body["covariates"] = {{"names", table.covariate_names},
                        {"center", std::vector<double>(table.covariate_center.begin(), table.covariate_center.end())},
                        {"scale", std::vector<double>(table.covariate_scale.begin(), table.covariate_scale.end())}};
  body["provenance"] = cfg.provenance();
  const std::string doc = json_with_run_info(std::move(body), RunInfo::now(seconds_since(start)));
  write_text(cfg.model_output_path.empty() ? cfg.output_path : cfg.model_output_path, doc);
  if (!cfg.model_output_path.empty()) {
    std::cerr << "fit: " << to_string(cfg.methods.front()) << " n=" << data.n() << " p=" << data.p()
              << " objective=" << model.diagnostics.objective << " status=" << model.diagnostics.status << "\n";
  }
  return kExitOk;
}

int cmd_predict(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  std::ifstream in(cfg.model_path);
  if (!in) throw DataError("cannot read model '" + cfg.model_path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model document is not valid JSON: ") + e.what());
  }
  const FittedModel model = model_from_json(doc);
  CovariateTable cov = read_covariate_table(cfg.covariates_path);
  Matrix X = cov.X;
  if (doc.contains("covariates")) {
    const json& c = doc["covariates"];
    const auto center = c.at("center").get<std::vector<double>>();
    const auto scale = c.at("scale").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(center.size()) != X.cols()) {
      throw DataError("covariate file has " + std::to_string(X.cols()) + " columns, model expects " +
                      std::to_string(center.size()));
    }
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      X.col(j) = (X.col(j).array() - center[static_cast<std::size_t>(j)]) / scale[static_cast<std::size_t>(j)];
    }
  }
  if (X.cols() != model.moments.mu_hat.size()) {
    throw DataError("covariate file has " + std::to_string(X.cols()) + " columns, model expects " +
                    std::to_string(model.moments.mu_hat.size()));
  }
  const std::vector<MetricObject> preds = predict_many(model, X);
  const RunInfo info = RunInfo::now(seconds_since(start));
  const std::string text = cfg.format == OutputFormat::json
                               ? predictions_json(cov.X, preds, model.space, cfg.provenance(), info, cov.ids)
                               : predictions_csv(cov.X, preds, model.space, cfg.provenance(), info, cov.ids);
  write_text(cfg.output_path, text);
  return kExitOk;
}

int run(const Flags& flags) {
  const RunConfig cfg = load_config(flags);
  switch (cfg.command) {
    case Command::simulate: return cmd_simulate(cfg);
    case Command::bench: return cmd_bench(cfg);
    case Command::fit: return cmd_fit(cfg);
    case Command::predict: return cmd_predict(cfg);
  }
  return kExitRuntime;
}

bool is_validation(const Error& e) {
  return dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
         dynamic_cast<const DataError*>(&e) || dynamic_cast<const InfeasibleSpec*>(&e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear Frechet regression for distributions and SPD matrices"};
  app.set_version_flag("--version", std::string(frechet::kLibraryVersion));
  Flags flags;
  app.add_option("command", flags.command, "simulate | bench | fit | predict")
      ->required()
      ->check(CLI::IsMember({"simulate", "bench", "fit", "predict"}));
  app.add_option("--config", flags.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", flags.seed, "master seed");
  app.add_option("--replications", flags.replications, "Monte Carlo replications");
  app.add_option("--parallelism", flags.parallelism, "worker threads");
  app.add_option("--output", flags.output, "output path (stdout when omitted)");
  app.add_option("--format", flags.format, "csv | json");
  app.add_option("--model", flags.model, "simulation model id, e.g. 1.2");
  app.add_option("--n", flags.n, "training sample size");
  app.add_option("--p", flags.p, "covariate dimension (2 or 5)");
  app.add_option("--methods", flags.methods, "comma-separated: LFR,NLFR,SNLFR,NLFR-LFR");
  app.add_option("--link-moments", flags.link_moments, "sample | population");
  app.add_option("--pm-policy", flags.pm_policy, "shared | independent_test");
  app.add_option("--dataset", flags.dataset, "life-table file for fit");
  app.add_option("--model-path", flags.model_path, "fitted model document for predict");
  app.add_option("--covariates", flags.covariates, "covariate CSV for predict");
  app.add_option("--model-output", flags.model_output, "where fit writes the model document");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    return run(flags);
  } catch (const frechet::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation(e) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
