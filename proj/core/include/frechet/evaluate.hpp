#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frechet/estimators.hpp"
#include "frechet/simgen.hpp"

namespace frechet {

/// NLFR_LFR is NLFR with lfr-reducing links at beta = Sigma^{-1} sigma_h;
/// it reproduces LFR and exists to check that identity end to end.
enum class Method { lfr, nlfr, snlfr, nlfr_lfr };
std::string_view to_string(Method m);
Method method_from_string(std::string_view name);

double mse_y(const FittedModel& model, const Dataset& test);
double mse_m(const FittedModel& model, const TrueRegression& truth, const Matrix& test_X);
/// Mean squared distance between objects under `metric` (same length lists).
double mean_squared_distance(const SpaceSpec& metric, const std::vector<MetricObject>& a,
                             const std::vector<MetricObject>& b);
double ase_beta(const std::vector<Vector>& estimates, const Vector& beta_true);

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;  // sd / sqrt(count)
  int count = 0;

  static MetricSummary of(const std::vector<double>& values);
};

struct ReplicationScore {
  bool ok = false;
  std::string error;
  double mse_y = 0.0;
  double mse_m = 0.0;
  // Same predictions scored under the other SPD metric (SPD designs only).
  std::optional<double> mse_y_alt;
  std::optional<double> mse_m_alt;
  Vector beta_hat;  // NLFR and SNLFR link parameter
  double c_hat = 0.0;
};

struct MethodResult {
  Method method = Method::lfr;
  bool present = true;  // false: not applicable to the design (SNLFR on Models x.3)
  MetricSummary mse_y;
  MetricSummary mse_m;
  std::optional<MetricSummary> mse_y_alt;
  std::optional<MetricSummary> mse_m_alt;
  std::optional<double> ase_beta;  // NLFR on designs where beta is identified
  int failures = 0;
  std::vector<ReplicationScore> replications;  // in replication order
};

struct ExperimentOptions {
  OptimizerOptions optimizer;
  CGrid c_grid;
  bool refine = true;
  double beta_half_width = 3.0;
  // sample: links use the replication's training covariates;
  // population: one Monte Carlo moment table per experiment.
  LinkMoments link_moments = LinkMoments::sample;
  int mc_size = kDefaultMcSize;
  std::uint64_t mc_seed = kDefaultMcSeed;
};

struct ExperimentResult {
  SimulationSpec spec;
  int replications = 0;
  double wall_seconds = 0.0;
  std::string metric;      // metric of MSE_Y / MSE_m
  std::string alt_metric;  // empty unless SPD
  std::vector<MethodResult> methods;

  const MethodResult* find(Method m) const;
};

/// Seed of replication r: derive_seed(spec.seed, tag, r).
std::uint64_t replication_seed(const SimulationSpec& spec, int r);

ExperimentResult run_experiment(const SimulationSpec& spec, const std::vector<Method>& methods, int replications,
                                int parallelism = 1, const ExperimentOptions& options = {});

}  // namespace frechet
