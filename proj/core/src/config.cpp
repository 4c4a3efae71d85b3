#include "frechet/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "frechet/errors.hpp"

namespace frechet {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) {
      throw ConfigError("unknown key '" + (where.empty() ? key : where + "." + key) + "'");
    }
  }
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

// Sets a dotted key, creating intermediate objects; returns the previous value.
json set_dotted(json& doc, const std::string& key, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("malformed override key '" + key + "'");
    if (dot == std::string::npos) {
      json previous = node->contains(part) ? (*node)[part] : json();
      (*node)[part] = value;
      return previous;
    }
    if (!node->contains(part)) (*node)[part] = json::object();
    node = &(*node)[part];
    if (!node->is_object()) throw ConfigError("override key '" + key + "' crosses a non-object value");
    start = dot + 1;
  }
}

template <typename T>
T get_as(const json& doc, const std::string& key, const std::string& where) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("key '" + (where.empty() ? key : where + "." + key) + "': " + e.what());
  }
}

template <typename T>
T value_or(const json& doc, const std::string& key, T fallback, const std::string& where) {
  if (!doc.contains(key)) return fallback;
  return get_as<T>(doc, key, where);
}

void require_file(const std::string& path, const std::string& field) {
  if (path.empty()) throw ValidationError("'" + field + "' is required");
  if (!std::filesystem::exists(path)) throw ValidationError("'" + field + "': file '" + path + "' does not exist");
}

Command command_from_string(const std::string& s) {
  if (s == "simulate") return Command::simulate;
  if (s == "fit") return Command::fit;
  if (s == "predict") return Command::predict;
  if (s == "bench") return Command::bench;
  throw ValidationError("command: unknown command '" + s + "'");
}

OutputFormat format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw ValidationError("output.format: unknown format '" + s + "' (csv or json)");
}

std::vector<LinkComponent> parse_links(const json& j) {
  if (!j.is_array()) throw ConfigError("'links' must be an array");
  std::vector<LinkComponent> out;
  for (const auto& comp : j) {
    LinkComponent c;
    if (comp.is_string()) {
      c.push_back({comp.get<std::string>(), 1.0});
    } else if (comp.is_array()) {
      for (const auto& term : comp) {
        if (term.is_string()) {
          c.push_back({term.get<std::string>(), 1.0});
        } else if (term.is_object()) {
          reject_unknown(term, {"fn", "coef"}, "links[]");
          c.push_back({get_as<std::string>(term, "fn", "links[]"), value_or<double>(term, "coef", 1.0, "links[]")});
        } else {
          throw ConfigError("link terms must be names or {fn, coef} objects");
        }
      }
    } else {
      throw ConfigError("link components must be names or arrays of terms");
    }
    for (const auto& t : c) {
      if (!registry_has(t.fn)) throw ValidationError("links: unknown link function '" + t.fn + "'");
    }
    out.push_back(std::move(c));
  }
  return out;
}

json links_to_json(const std::vector<LinkComponent>& links) {
  json out = json::array();
  for (const auto& comp : links) {
    json c = json::array();
    for (const auto& t : comp) c.push_back({{"fn", t.fn}, {"coef", t.coef}});
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<double> to_std(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

std::string_view to_string(Command c) {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::fit: return "fit";
    case Command::predict: return "predict";
    case Command::bench: return "bench";
  }
  return "unknown";
}

std::string_view to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config(const std::string& text, const json& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config at " + line_col(text, e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  RunConfig cfg;
  if (!overrides.is_object()) throw ConfigError("overrides must be an object");
  for (const auto& [key, value] : overrides.items()) {
    json previous = set_dotted(doc, key, value);
    cfg.overrides.push_back({key, previous, value});
  }

  reject_unknown(doc,
                 {"schema_version", "command", "seed", "parallelism", "output", "methods", "simulation",
                  "replications", "experiment", "c_grid", "optimizer", "bench", "dataset", "links", "h", "beta_init",
                  "model_output", "model_path", "covariates_path"},
                 "");
  const int version = value_or<int>(doc, "schema_version", kConfigSchemaVersion, "");
  if (version != kConfigSchemaVersion) {
    throw ValidationError("schema_version: expected " + std::to_string(kConfigSchemaVersion) + ", got " +
                          std::to_string(version));
  }
  if (!doc.contains("command")) throw ValidationError("command: missing");
  cfg.command = command_from_string(get_as<std::string>(doc, "command", ""));
  cfg.seed = value_or<std::uint64_t>(doc, "seed", cfg.seed, "");
  cfg.parallelism = value_or<int>(doc, "parallelism", cfg.parallelism, "");
  if (cfg.parallelism < 1) throw ValidationError("parallelism: must be at least 1");

  if (doc.contains("output")) {
    const json& out = doc["output"];
    reject_unknown(out, {"path", "format"}, "output");
    cfg.output_path = value_or<std::string>(out, "path", "", "output");
    cfg.format = format_from_string(value_or<std::string>(out, "format", "csv", "output"));
  }

  if (cfg.command == Command::fit) cfg.methods = {Method::lfr};
  if (doc.contains("methods")) {
    const json& m = doc["methods"];
    if (!m.is_array() || m.empty()) throw ValidationError("methods: must be a non-empty array");
    cfg.methods.clear();
    for (const auto& name : m) {
      if (!name.is_string()) throw ConfigError("methods: entries must be strings");
      try {
        cfg.methods.push_back(method_from_string(name.get<std::string>()));
      } catch (const ValidationError&) {
        throw ValidationError("methods: unknown method '" + name.get<std::string>() + "'");
      }
    }
  }

  cfg.replications = value_or<int>(doc, "replications", cfg.replications, "");
  if (cfg.replications < 1) throw ValidationError("replications: must be at least 1");

  if (doc.contains("experiment")) {
    const json& e = doc["experiment"];
    reject_unknown(e, {"link_moments", "beta_half_width", "mc_size", "mc_seed"}, "experiment");
    if (e.contains("link_moments")) {
      try {
        cfg.experiment.link_moments = link_moments_from_string(get_as<std::string>(e, "link_moments", "experiment"));
      } catch (const ValidationError& err) {
        throw ValidationError(std::string("experiment.link_moments: ") + err.detail());
      }
    }
    cfg.experiment.beta_half_width = value_or<double>(e, "beta_half_width", cfg.experiment.beta_half_width, "experiment");
    cfg.experiment.mc_size = value_or<int>(e, "mc_size", cfg.experiment.mc_size, "experiment");
    cfg.experiment.mc_seed = value_or<std::uint64_t>(e, "mc_seed", cfg.experiment.mc_seed, "experiment");
    if (!(cfg.experiment.beta_half_width > 0.0)) throw ValidationError("experiment.beta_half_width: must be positive");
    if (cfg.experiment.mc_size < 100000) throw ValidationError("experiment.mc_size: must be at least 100000");
  }

  if (doc.contains("c_grid")) {
    const json& g = doc["c_grid"];
    reject_unknown(g, {"lo", "hi", "size", "refine"}, "c_grid");
    cfg.experiment.c_grid.lo = value_or<double>(g, "lo", cfg.experiment.c_grid.lo, "c_grid");
    cfg.experiment.c_grid.hi = value_or<double>(g, "hi", cfg.experiment.c_grid.hi, "c_grid");
    cfg.experiment.c_grid.size = value_or<int>(g, "size", cfg.experiment.c_grid.size, "c_grid");
    cfg.experiment.refine = value_or<bool>(g, "refine", cfg.experiment.refine, "c_grid");
  }
  if (!(cfg.experiment.c_grid.lo < cfg.experiment.c_grid.hi)) throw ValidationError("c_grid: need lo < hi");
  if (cfg.experiment.c_grid.size < 1) throw ValidationError("c_grid.size: must be positive");

  if (doc.contains("optimizer")) {
    const json& o = doc["optimizer"];
    reject_unknown(o, {"tol", "max_iter", "multistarts", "restart_seed", "restart_radius", "initial_step"}, "optimizer");
    OptimizerOptions& opt = cfg.experiment.optimizer;
    opt.tol = value_or<double>(o, "tol", opt.tol, "optimizer");
    opt.max_iter = value_or<int>(o, "max_iter", opt.max_iter, "optimizer");
    opt.multistarts = value_or<int>(o, "multistarts", opt.multistarts, "optimizer");
    opt.restart_seed = value_or<std::uint64_t>(o, "restart_seed", opt.restart_seed, "optimizer");
    opt.restart_radius = value_or<double>(o, "restart_radius", opt.restart_radius, "optimizer");
    opt.initial_step = value_or<double>(o, "initial_step", opt.initial_step, "optimizer");
  }
  try {
    cfg.experiment.optimizer.validate();
  } catch (const Error& e) {
    throw ValidationError(std::string("optimizer: ") + e.detail());
  }

  if (doc.contains("simulation")) {
    json sim = doc["simulation"];
    if (sim.is_object() && sim.contains("seed")) throw ConfigError("unknown key 'simulation.seed' (use the top-level seed)");
    try {
      SimulationSpec spec = SimulationSpec::from_json(sim);
      spec.seed = cfg.seed;
      cfg.simulation = spec;
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("simulation: ") + e.detail());
    } catch (const Error& e) {
      throw ValidationError(std::string("simulation: ") + e.detail());
    }
  }

  if (doc.contains("bench")) {
    const json& b = doc["bench"];
    reject_unknown(b, {"models", "n", "p", "pm_policy"}, "bench");
    if (b.contains("pm_policy")) {
      try {
        cfg.bench_pm_policy = pm_policy_from_string(get_as<std::string>(b, "pm_policy", "bench"));
      } catch (const ValidationError& e) {
        throw ValidationError(std::string("bench.pm_policy: ") + e.detail());
      }
    }
    if (b.contains("models")) {
      for (const auto& m : get_as<std::vector<std::string>>(b, "models", "bench")) {
        try {
          cfg.bench_models.push_back(model_id_from_string(m));
        } catch (const ValidationError&) {
          throw ValidationError("bench.models: unknown model '" + m + "'");
        }
      }
    }
    if (b.contains("n")) cfg.bench_n = get_as<std::vector<int>>(b, "n", "bench");
    cfg.bench_p = value_or<int>(b, "p", cfg.bench_p, "bench");
  }
  if (cfg.command == Command::bench) {
    if (cfg.bench_models.empty()) {
      cfg.bench_models = {ModelId::m1_1, ModelId::m1_2, ModelId::m1_3, ModelId::m2_1, ModelId::m2_2, ModelId::m2_3};
    }
    if (cfg.bench_n.empty()) cfg.bench_n = {100, 200, 500};
    if (cfg.bench_p != 2 && cfg.bench_p != 5) throw ValidationError("bench.p: must be 2 or 5");
    for (int n : cfg.bench_n) {
      if (n < 2) throw ValidationError("bench.n: sizes must be at least 2");
    }
  }

  if (doc.contains("dataset")) {
    const json& d = doc["dataset"];
    reject_unknown(d, {"path", "standardize", "grid_size"}, "dataset");
    cfg.dataset_path = value_or<std::string>(d, "path", "", "dataset");
    cfg.standardize = value_or<bool>(d, "standardize", false, "dataset");
    cfg.grid_size = value_or<int>(d, "grid_size", cfg.grid_size, "dataset");
    if (cfg.grid_size < 2) throw ValidationError("dataset.grid_size: must be at least 2");
  }
  if (doc.contains("links")) cfg.links = parse_links(doc["links"]);
  if (doc.contains("h")) {
    try {
      cfg.h = h_transform_from_string(get_as<std::string>(doc, "h", ""));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("h: ") + e.detail());
    }
  }
  if (doc.contains("beta_init")) {
    const auto v = get_as<std::vector<double>>(doc, "beta_init", "");
    cfg.beta_init = Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  cfg.model_output_path = value_or<std::string>(doc, "model_output", "", "");
  cfg.model_path = value_or<std::string>(doc, "model_path", "", "");
  cfg.covariates_path = value_or<std::string>(doc, "covariates_path", "", "");

  switch (cfg.command) {
    case Command::simulate:
      if (!cfg.simulation) throw ValidationError("simulation: required for the simulate command");
      break;
    case Command::bench: break;
    case Command::fit:
      require_file(cfg.dataset_path, "dataset.path");
      if (cfg.methods.size() != 1) throw ValidationError("methods: fit takes exactly one method");
      if (cfg.methods[0] == Method::nlfr_lfr) throw ValidationError("methods: NLFR-LFR is a simulation-only method");
      if ((cfg.methods[0] == Method::nlfr || cfg.methods[0] == Method::snlfr) && cfg.links.empty()) {
        throw ValidationError("links: required for NLFR and SNLFR fits");
      }
      break;
    case Command::predict:
      require_file(cfg.model_path, "model_path");
      require_file(cfg.covariates_path, "covariates_path");
      break;
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path, const json& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

json RunConfig::to_json() const {
  json doc = {{"schema_version", kConfigSchemaVersion},
              {"command", std::string(to_string(command))},
              {"seed", seed},
              {"parallelism", parallelism},
              {"output", {{"path", output_path}, {"format", std::string(to_string(format))}}}};
  json methods_json = json::array();
  for (Method m : methods) methods_json.push_back(std::string(to_string(m)));
  doc["methods"] = methods_json;
  const OptimizerOptions& o = experiment.optimizer;
  doc["optimizer"] = {{"tol", o.tol},
                      {"max_iter", o.max_iter},
                      {"multistarts", o.multistarts},
                      {"restart_seed", o.restart_seed},
                      {"restart_radius", o.restart_radius},
                      {"initial_step", o.initial_step}};
  doc["c_grid"] = {{"lo", experiment.c_grid.lo},
                   {"hi", experiment.c_grid.hi},
                   {"size", experiment.c_grid.size},
                   {"refine", experiment.refine}};
  if (command == Command::simulate || command == Command::bench) {
    doc["replications"] = replications;
    doc["experiment"] = {{"link_moments", std::string(to_string(experiment.link_moments))},
                         {"beta_half_width", experiment.beta_half_width},
                         {"mc_size", experiment.mc_size},
                         {"mc_seed", experiment.mc_seed}};
  }
  if (simulation) {
    json sim = simulation->to_json();
    sim.erase("seed");
    doc["simulation"] = sim;
  }
  if (command == Command::bench) {
    json models = json::array();
    for (ModelId m : bench_models) models.push_back(std::string(to_string(m)));
    doc["bench"] = {{"models", models},
                    {"n", bench_n},
                    {"p", bench_p},
                    {"pm_policy", std::string(to_string(bench_pm_policy))}};
  }
  if (command == Command::fit) {
    doc["dataset"] = {{"path", dataset_path}, {"standardize", standardize}, {"grid_size", grid_size}};
    doc["links"] = links_to_json(links);
    if (h) doc["h"] = std::string(to_string(*h));
    if (beta_init) doc["beta_init"] = to_std(*beta_init);
    doc["model_output"] = model_output_path;
    doc["experiment"] = {{"beta_half_width", experiment.beta_half_width}};
  }
  if (command == Command::predict) {
    doc["model_path"] = model_path;
    doc["covariates_path"] = covariates_path;
  }
  return doc;
}

std::string RunConfig::hash() const { return fnv1a64_hex(to_json().dump()); }

json RunConfig::provenance() const {
  json ov = json::array();
  for (const auto& o : overrides) ov.push_back({{"key", o.key}, {"file_value", o.file_value}, {"flag_value", o.flag_value}});
  return {{"config", to_json()}, {"config_hash", hash()}, {"seed", seed}, {"overrides", ov}};
}

}  // namespace frechet
