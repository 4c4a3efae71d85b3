#include <string>

#include <gtest/gtest.h>

#include "frechet/config.hpp"
#include "frechet/errors.hpp"

using namespace frechet;
using nlohmann::json;

namespace {

const char* kMinimal = R"({
  "command": "simulate",
  "seed": 7,
  "methods": ["LFR", "NLFR"],
  "replications": 5,
  "simulation": {"model": "1.1", "n": 100}
})";

std::string data_path(const std::string& name) { return std::string(FRECHET_SOURCE_DIR) + "/data/" + name; }

template <class E>
std::string message_of(const std::string& text, const json& overrides = json::object()) {
  try {
    parse_config(text, overrides);
  } catch (const E& e) {
    return e.what();
  }
  return "<no exception>";
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST(Config, MinimalSimulate) {
  const RunConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.command, Command::simulate);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.replications, 5);
  ASSERT_TRUE(c.simulation.has_value());
  EXPECT_EQ(c.simulation->model, ModelId::m1_1);
  EXPECT_EQ(c.simulation->n, 100);
  EXPECT_EQ(c.simulation->seed, 7u);
  EXPECT_EQ(c.methods, (std::vector<Method>{Method::lfr, Method::nlfr}));
  EXPECT_EQ(c.format, OutputFormat::csv);
  EXPECT_TRUE(c.output_path.empty());
  EXPECT_TRUE(c.overrides.empty());
}

TEST(Config, NormalizedRoundTrip) {
  const RunConfig a = parse_config(kMinimal);
  const RunConfig b = parse_config(a.to_json().dump());
  EXPECT_EQ(a.to_json(), b.to_json());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  EXPECT_EQ(a.hash(), parse_config(kMinimal).hash());
  const RunConfig other = parse_config(kMinimal, {{"seed", 8}});
  EXPECT_NE(a.hash(), other.hash());
}

TEST(Config, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a64_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a64_hex("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(fnv1a64_hex("foobar"), "85944171f73967e8");
}

TEST(Config, UnknownMethodNamesField) {
  const std::string text = R"({"command": "simulate", "methods": ["LOESS"], "simulation": {"model": "1.1"}})";
  EXPECT_THROW(parse_config(text), ValidationError);
  const std::string msg = message_of<ValidationError>(text);
  EXPECT_TRUE(contains(msg, "methods")) << msg;
  EXPECT_TRUE(contains(msg, "LOESS")) << msg;
}

TEST(Config, UnknownKeyNamed) {
  const std::string top = R"({"command": "simulate", "sed": 3, "simulation": {"model": "1.1"}})";
  EXPECT_TRUE(contains(message_of<ConfigError>(top), "'sed'"));
  const std::string nested = R"({"command": "simulate", "output": {"path": "x", "colour": 1}, "simulation": {}})";
  EXPECT_TRUE(contains(message_of<ConfigError>(nested), "output.colour"));
  const std::string sim = R"({"command": "simulate", "simulation": {"model": "1.1", "nn": 3}})";
  EXPECT_TRUE(contains(message_of<ConfigError>(sim), "nn"));
}

TEST(Config, MalformedReportsLineAndColumn) {
  const std::string text = "{\n  \"command\": \"simulate\",\n  \"seed\": ,\n}";
  const std::string msg = message_of<ConfigError>(text);
  EXPECT_TRUE(contains(msg, "line 3")) << msg;
  EXPECT_TRUE(contains(msg, "column")) << msg;
  EXPECT_THROW(parse_config("[1, 2]"), ConfigError);
}

TEST(Config, FlagOverrideWinsAndIsRecorded) {
  const RunConfig c = parse_config(kMinimal, {{"seed", 99}, {"simulation.n", 250}});
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.simulation->seed, 99u);
  EXPECT_EQ(c.simulation->n, 250);
  ASSERT_EQ(c.overrides.size(), 2u);
  const json prov = c.provenance();
  EXPECT_EQ(prov["seed"], 99);
  bool seen_seed = false;
  for (const auto& o : prov["overrides"]) {
    if (o["key"] == "seed") {
      seen_seed = true;
      EXPECT_EQ(o["file_value"], 7);
      EXPECT_EQ(o["flag_value"], 99);
    }
  }
  EXPECT_TRUE(seen_seed);
  EXPECT_EQ(prov["config_hash"], c.hash());
  // Override of a key absent from the file records null.
  const RunConfig d = parse_config(kMinimal, {{"parallelism", 2}});
  EXPECT_TRUE(d.overrides[0].file_value.is_null());
  EXPECT_EQ(d.parallelism, 2);
}

TEST(Config, SimulationSeedRejected) {
  const std::string text = R"({"command": "simulate", "simulation": {"model": "1.1", "seed": 3}})";
  EXPECT_THROW(parse_config(text), ConfigError);
}

TEST(Config, SemanticViolations) {
  EXPECT_THROW(parse_config(R"({"seed": 1})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"command": "train"})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"command": "simulate"})"), ValidationError);
  EXPECT_THROW(parse_config(kMinimal, {{"replications", 0}}), ValidationError);
  EXPECT_THROW(parse_config(kMinimal, {{"parallelism", 0}}), ValidationError);
  EXPECT_THROW(parse_config(kMinimal, {{"output.format", "xml"}}), ValidationError);
  EXPECT_THROW(parse_config(kMinimal, {{"schema_version", 2}}), ValidationError);
  EXPECT_THROW(parse_config(kMinimal, {{"simulation.model", "3.1"}}), ValidationError);
  EXPECT_THROW(parse_config(kMinimal, {{"seed", "seven"}}), ConfigError);
}

TEST(Config, BenchDefaults) {
  const RunConfig c = parse_config(R"({"command": "bench"})");
  EXPECT_EQ(c.bench_models.size(), 6u);
  EXPECT_EQ(c.bench_n, (std::vector<int>{100, 200, 500}));
  EXPECT_EQ(c.bench_pm_policy, PmPolicy::independent_test);
  EXPECT_EQ(parse_config(R"({"command": "bench", "bench": {"pm_policy": "shared"}})").bench_pm_policy,
            PmPolicy::shared);
  EXPECT_THROW(parse_config(R"({"command": "bench", "bench": {"p": 3}})"), ValidationError);
  EXPECT_THROW(parse_config(R"({"command": "bench", "bench": {"models": ["9.9"]}})"), ValidationError);
}

TEST(Config, FitValidation) {
  const std::string base = R"({"command": "fit", "dataset": {"path": ")" + data_path("life_table_example.csv") + R"("}})";
  const RunConfig lfr = parse_config(base);
  EXPECT_EQ(lfr.methods, std::vector<Method>{Method::lfr});
  EXPECT_EQ(lfr.grid_size, 20);
  EXPECT_THROW(parse_config(base, {{"methods", json::array({"NLFR"})}}), ValidationError);
  const RunConfig nlfr =
      parse_config(base, {{"methods", json::array({"NLFR"})}, {"links", json::array({"identity", "exponential"})}});
  ASSERT_EQ(nlfr.links.size(), 2u);
  EXPECT_THROW(parse_config(base, {{"methods", json::array({"LFR", "NLFR"})}}), ValidationError);
  EXPECT_THROW(parse_config(base, {{"links", json::array({"tanh"})}}), ValidationError);
  EXPECT_THROW(parse_config(base, {{"dataset.path", "/nonexistent/table.csv"}}), ValidationError);
  EXPECT_THROW(parse_config(base, {{"h", "cdf"}}), ValidationError);
  EXPECT_THROW(parse_config(R"({"command": "fit"})"), ValidationError);
}

TEST(Config, PredictValidation) {
  EXPECT_THROW(parse_config(R"({"command": "predict"})"), ValidationError);
  const std::string text = R"({"command": "predict", "model_path": ")" + data_path("life_table_example.csv") +
                           R"(", "covariates_path": ")" + data_path("covariates_example.csv") + R"("})";
  const RunConfig c = parse_config(text);
  EXPECT_EQ(c.command, Command::predict);
  EXPECT_EQ(parse_config(c.to_json().dump()).hash(), c.hash());
}
