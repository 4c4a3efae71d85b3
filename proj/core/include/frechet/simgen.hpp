#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "frechet/estimators.hpp"
#include "frechet/links.hpp"
#include "frechet/space.hpp"

namespace frechet {

using Rng = std::mt19937_64;

enum class ModelId { m1_1, m1_2, m1_3, m2_1, m2_2, m2_3 };
std::string_view to_string(ModelId id);
ModelId model_id_from_string(std::string_view name);

enum class CovariateDesign { copula, gaussian };
/// First component of g: linear index, squared shifted index, or the
/// split squared/exponential sum of Models x.3.
enum class GKind { linear, squared, mixed };

/// shared: one P_m per replication for training, test and truth.
/// independent_test: the test sample and its truth use a second, independently
/// drawn P_m.
enum class PmPolicy { shared, independent_test };
std::string_view to_string(PmPolicy policy);
PmPolicy pm_policy_from_string(std::string_view name);

struct SimulationSpec {
  ModelId model = ModelId::m1_1;
  int p = 2;
  int n = 100;
  int n_test = 500;
  Vector beta_true;
  Vector alpha;
  double U0 = 0.0;
  double V0 = 2.0;
  double v1 = 1.0;
  double v2 = 0.5;
  int p1 = 1;
  int m_obj = 20;
  std::uint64_t seed = 1;
  PmPolicy pm_policy = PmPolicy::shared;
  // Metric the SPD responses are fitted in; ignored for distribution models.
  SpaceKind spd_metric = SpaceKind::spd_cholesky;

  /// Constants of the named design for p in {2, 5}.
  static SimulationSpec defaults(ModelId model, int p);

  bool is_distribution() const;
  CovariateDesign design() const;
  GKind g_kind() const;
  /// Space the responses live in (wasserstein, or spd_metric of dimension m_obj).
  SpaceSpec response_space() const;
  /// Structural checks (dimensions, positivity); throws ValidationError.
  void validate() const;

  nlohmann::json to_json() const;
  static SimulationSpec from_json(const nlohmann::json& j);
};

/// Monte Carlo feasibility probe over `draws` covariate draws:
/// V0 + a > 0 and, for SPD models, U0 + a >= v1. Throws InfeasibleSpec.
void check_feasibility(const SimulationSpec& spec, int draws = 10000);

/// Deterministic stream derivation (splitmix64 of base, tag and index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index);

Matrix gen_covariates(const SimulationSpec& spec, int count, Rng& rng);

/// g(x) with the true beta; only the first component is nonzero.
Vector g_eval(const SimulationSpec& spec, const Vector& x);
/// First component of g at a given beta, centered at the population mean 0.
double g1_eval(GKind kind, int p1, const Vector& z, const Vector& beta);

/// alpha^T g(x).
double regression_index(const SimulationSpec& spec, const Vector& x);

struct TrueRegression {
  std::function<MetricObject(const Vector&)> fn;
  MetricObject operator()(const Vector& x) const { return fn(x); }
};

/// SPD models need the replication's P_m.
TrueRegression true_regression(const SimulationSpec& spec, const std::optional<Matrix>& Pm = std::nullopt);

MetricObject sample_response(const SimulationSpec& spec, const Vector& x, Rng& rng,
                             const std::optional<Matrix>& Pm = std::nullopt);

Matrix gen_Pm(int m, Rng& rng);

/// One replication: training sample, test sample and truth at the test points.
struct ReplicationData {
  Dataset train;
  Dataset test;
  std::vector<MetricObject> test_truth;
  std::optional<Matrix> pm_train;
  std::optional<Matrix> pm_test;
};
ReplicationData generate_replication(const SimulationSpec& spec, std::uint64_t seed);

/// Moments of g_1(X; beta) needed by the derived links, for any beta.
/// g_1 is evaluated at x - center().
class GMoments {
 public:
  virtual ~GMoments() = default;
  virtual int p() const = 0;
  virtual GKind kind() const = 0;
  virtual int p1() const = 0;
  virtual const Vector& center() const = 0;
  /// E[g_1(X; beta)] and Cov(g_1(X; beta), X) (a p-vector). NaN when the
  /// moments are unavailable at beta.
  virtual double mean_g1(const Vector& beta) const = 0;
  virtual Vector cov_g1_x(const Vector& beta) const = 0;
};

/// Population moments from Monte Carlo sufficient statistics of the
/// covariate design, centered at the population mean 0.
class MomentTable final : public GMoments {
 public:
  static MomentTable build(const SimulationSpec& spec, int mc_size, std::uint64_t mc_seed);

  int p() const override { return p_; }
  GKind kind() const override { return kind_; }
  int p1() const override { return p1_; }
  const Vector& center() const override { return center_; }
  /// NaN when an exponential coefficient leaves the tabulated range.
  double mean_g1(const Vector& beta) const override;
  Vector cov_g1_x(const Vector& beta) const override;

  const Vector& m1() const { return m1_; }
  const Matrix& m2() const { return m2_; }

  static constexpr double kExpLo = -6.0;
  static constexpr double kExpStep = 0.05;
  static constexpr int kExpCount = 241;

 private:
  double exp_mean(int j, double b) const;
  Vector exp_cross(int j, double b) const;

  GKind kind_ = GKind::linear;
  int p_ = 0;
  int p1_ = 0;
  int exp_from_ = 0;        // first exponential coordinate
  Vector center_;
  Vector m1_;               // E[X]
  Matrix m2_;               // E[X X^T]
  std::vector<Matrix> m3_;  // m3_[k](a, b) = E[X_a X_b X_k]
  // For exponential coordinates j: t0_[j](g) = E[e^{b_g X_j}],
  // t1_[j](g, k) = E[X_k e^{b_g X_j}], t2_[j](g, k) = E[X_j X_k e^{b_g X_j}].
  std::vector<Vector> t0_;
  std::vector<Matrix> t1_;
  std::vector<Matrix> t2_;
};

/// Plug-in moments over a covariate sample (1/n normalization), centered at
/// the sample mean.
class SampleMoments final : public GMoments {
 public:
  SampleMoments(GKind kind, int p1, Matrix X);

  int p() const override { return static_cast<int>(X_.cols()); }
  GKind kind() const override { return kind_; }
  int p1() const override { return p1_; }
  const Vector& center() const override { return center_; }
  double mean_g1(const Vector& beta) const override;
  Vector cov_g1_x(const Vector& beta) const override;
  const Matrix& covariates() const { return X_; }

 private:
  Vector g1_values(const Vector& beta) const;

  GKind kind_;
  int p1_;
  Matrix X_;
  Matrix centered_;
  Vector center_;
};

/// Where the derived links take E[g(X)] and Cov(g(X), X) from.
enum class LinkMoments { sample, population };
std::string_view to_string(LinkMoments m);
LinkMoments link_moments_from_string(std::string_view name);

struct DerivedLinkDiagnostics {
  double cov_norm = 0.0;  // |Cov(g_1(X; beta_true), X)|
  bool singular = false;  // covariance effectively zero at beta_true
  std::string message;
};

struct DerivedLinks {
  /// f(x, beta) = (C^T C + lambda I)^{-1} C^T (g(x; beta) - E g(beta)), C = Cov(g(X; beta), X).
  LinkSpec general;
  /// Same links through the index u = beta^T (x - mu) for designs where g
  /// depends on x only through it (Models x.1, x.2).
  std::optional<LinkSpec> generalized_linear;
  std::shared_ptr<const GMoments> moments;
  DerivedLinkDiagnostics diagnostics;
};

inline constexpr int kDefaultMcSize = 1000000;
inline constexpr std::uint64_t kDefaultMcSeed = 977;

DerivedLinks derive_links(const SimulationSpec& spec, int mc_size = kDefaultMcSize,
                          std::uint64_t mc_seed = kDefaultMcSeed);

/// Derived links with moments computed on the covariate sample X.
DerivedLinks derive_sample_links(const SimulationSpec& spec, const Matrix& X);

/// Rebuilds a LinkSpec from a "derived" or "derived_sample" descriptor.
LinkSpec derived_link_from_descriptor(const nlohmann::json& descriptor);

}  // namespace frechet
