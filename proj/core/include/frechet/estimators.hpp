#pragma once

#include <optional>
#include <string>
#include <vector>

#include "frechet/links.hpp"
#include "frechet/optimize.hpp"
#include "frechet/space.hpp"
#include "frechet/weights.hpp"

namespace frechet {

/// Paired sample (X_i, Y_i), i = 1..n: covariates as rows of X.
struct Dataset {
  Matrix X;
  std::vector<MetricObject> Y;
  SpaceSpec space;

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }
  /// n >= 2, finite covariates, responses homogeneous with `space`.
  void validate() const;
  /// Responses as columns of Hilbert coordinates (D x n).
  Matrix response_coords() const;
};

struct CovariateMoments {
  Vector mu_hat;
  Matrix sigma_mat_hat;  // 1/n normalization
  Matrix sigma_mat_inv;  // spd_inverse_ridge(sigma_mat_hat)
};

struct MomentEstimates {
  Vector mu_hat;
  Matrix sigma_mat_hat;
  Matrix sigma_mat_inv;
  // beta0 = mean response, kept unprojected in Hilbert coordinates; the
  // projected object is available through beta0_hat().
  Vector beta0_coords;
  // Column j holds sigma^(j) = n^{-1} sum_i Y_i (X_i^(j) - mu^(j)).
  Matrix sigma_obj_coords;
  std::optional<Vector> sigma_h_hat;

  MetricObject beta0_hat(const SpaceSpec& space) const;
  RawObject sigma_obj_hat(const SpaceSpec& space, int j) const;
  std::optional<SeparableMoments> separable() const;
};

struct FitDiagnostics {
  double objective = 0.0;  // training mean squared distance
  std::string status = "ok";
  bool converged = true;
  bool flat = false;
  int evaluations = 0;
};

struct FittedModel {
  SpaceSpec space;
  std::optional<LinkSpec> links;  // absent for LFR
  MomentEstimates moments;
  WeightFlavor flavor = LinearFlavor{};
  FitDiagnostics diagnostics;

  /// beta for NLFR, c_h Sigma^{-1} sigma_h for SNLFR; empty for LFR.
  Vector link_parameter() const;
};

/// Box and starting point for the profile search over beta.
struct BetaSearch {
  Vector init;   // defaults to zero
  Vector lower;  // defaults to init - 3
  Vector upper;  // defaults to init + 3

  static BetaSearch around(const Vector& init, double half_width = 3.0);
};

/// Grid of candidate c_h values for the separable fit.
struct CGrid {
  double lo = -5.0;
  double hi = 5.0;
  int size = 201;
  std::vector<double> values() const;
};

CovariateMoments estimate_moments(const Matrix& X);

struct ObjectMoments {
  MetricObject beta0_hat;
  std::vector<RawObject> sigma_obj_hat;
};
ObjectMoments estimate_object_moments(const Dataset& data, const Vector& mu_hat);

/// h(Y_i) for every response, centered at the sample mean.
Vector h_values(const Dataset& data, HTransform h);
Vector estimate_sigma_h(const Dataset& data, const Vector& mu_hat, HTransform h);

MetricObject frechet_mean(const Dataset& data);

FittedModel fit_lfr(const Dataset& data);

/// Profile estimator: outer Nelder-Mead over beta, inner closed-form
/// prediction beta0 + sum_j sigma^(j) f_j followed by projection.
FittedModel fit_nlfr_profile(const Dataset& data, const LinkSpec& links, const BetaSearch& search = {},
                             const OptimizerOptions& opts = {});

/// NLFR at a given beta (no search).
FittedModel fit_nlfr_fixed(const Dataset& data, const LinkSpec& links, const Vector& beta);

/// Separable fit: c_h chosen on `grid` by training mean squared distance
/// (ties to the smallest c), optionally refined by Brent between the
/// neighbours of the best grid point.
FittedModel fit_snlfr(const Dataset& data, const LinkSpec& links, HTransform h, const std::vector<double>& grid,
                      bool refine = true);

MetricObject predict(const FittedModel& model, const Vector& x);
/// Pre-projection prediction beta0 + sum_j sigma^(j) v_j(x).
RawObject predict_raw(const FittedModel& model, const Vector& x);
std::vector<MetricObject> predict_many(const FittedModel& model, const Matrix& X);

/// In-sample weights s(X_i, x) of the fitted flavor.
Vector model_weights(const FittedModel& model, const Matrix& X, const Vector& x);

/// Weighted-sum route n^{-1} sum_i s(X_i, x) Y_i, unprojected.
RawObject predict_weighted_sum_raw(const FittedModel& model, const Dataset& data, const Vector& x);

/// Default h for a space: dist_mean_centered for wasserstein, spd_trace_centered otherwise.
HTransform default_h(const SpaceSpec& space);

}  // namespace frechet
