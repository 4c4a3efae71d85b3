#include "frechet/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "frechet/errors.hpp"

namespace frechet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double h_of(const MetricObject& y, HTransform h) {
  if (h == HTransform::dist_mean_centered) return std::get<QuantileFunction>(y).values().mean();
  return std::get<SpdMatrix>(y).entries().trace();
}

void check_h_space(const SpaceSpec& space, HTransform h) {
  const bool ok = (h == HTransform::dist_mean_centered) == (space.kind == SpaceKind::wasserstein);
  if (!ok) throw SpecMismatch("h transform '" + std::string(to_string(h)) + "' is not defined for space '" +
                              std::string(to_string(space.kind)) + "'");
}

MomentEstimates build_moments(const Dataset& data, const Matrix& Yc) {
  const CovariateMoments cm = estimate_moments(data.X);
  MomentEstimates m;
  m.mu_hat = cm.mu_hat;
  m.sigma_mat_hat = cm.sigma_mat_hat;
  m.sigma_mat_inv = cm.sigma_mat_inv;
  const double n = data.n();
  m.beta0_coords = Yc.rowwise().mean();
  const Matrix centered = data.X.rowwise() - cm.mu_hat.transpose();
  m.sigma_obj_coords = Yc * centered / n;
  return m;
}

// Mean squared distance between the training responses and the projected
// moment-form predictions beta0 + S v(X_i). Non-finite inputs give +inf.
template <typename VFn>
double training_objective(const SpaceSpec& space, const MomentEstimates& m, const Matrix& X, const Matrix& Yc,
                          VFn&& v_of) {
  const Eigen::Index n = X.rows();
  Vector pred(m.beta0_coords.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector v = v_of(Vector(X.row(i).transpose()));
    if (!v.allFinite()) return kInf;
    pred.noalias() = m.beta0_coords + m.sigma_obj_coords * v;
    if (!pred.allFinite()) return kInf;
    coords::project(space, pred);
    total += coords::squared_distance(space, pred, Yc.col(i));
  }
  const double value = total / static_cast<double>(n);
  return std::isfinite(value) ? value : kInf;
}

double objective_at_beta(const Dataset& data, const MomentEstimates& m, const Matrix& Yc, const LinkSpec& links,
                         const Vector& beta) {
  if (!beta.allFinite()) return kInf;
  try {
    const LinkSpec::Bound bound = links.bind(beta);
    return training_objective(data.space, m, data.X, Yc,
                              [&](const Vector& x) { return bound.values(x, m.mu_hat); });
  } catch (const DimensionError&) {
    throw;
  } catch (const Error&) {
    return kInf;
  }
}

void check_links(const Dataset& data, const LinkSpec& links) {
  if (links.p() != data.p()) throw DimensionError("link count differs from covariate dimension");
}

// Evaluates the coefficient vector v(x) of the moment form for a fitted model.
class MomentEvaluator {
 public:
  explicit MomentEvaluator(const FittedModel& model) : model_(model) {
    if (!std::holds_alternative<LinearFlavor>(model.flavor)) {
      if (!model.links) throw SpecMismatch("nonlinear model without links");
      bound_ = model.links->bind(effective_beta(*model.links, model.flavor, model.moments.separable()));
    }
  }

  Vector v(const Vector& x) const {
    const MomentEstimates& m = model_.moments;
    if (x.size() != m.mu_hat.size()) throw DimensionError("covariate dimension differs from the fitted model");
    if (!bound_) return m.sigma_mat_inv * (x - m.mu_hat);
    return bound_->values(x, m.mu_hat);
  }

  Vector raw_coords(const Vector& x) const {
    const MomentEstimates& m = model_.moments;
    return m.beta0_coords + m.sigma_obj_coords * v(x);
  }

 private:
  const FittedModel& model_;
  std::optional<LinkSpec::Bound> bound_;
};

}  // namespace

void Dataset::validate() const {
  space.validate();
  if (X.rows() < 2) throw EmptyInput("dataset needs at least 2 observations");
  if (X.cols() < 1) throw DimensionError("dataset has no covariates");
  if (static_cast<Eigen::Index>(Y.size()) != X.rows()) throw DimensionError("covariate and response counts differ");
  if (!X.allFinite()) throw BadData("non-finite covariate entries");
  for (const auto& y : Y) check_member(space, y);
}

Matrix Dataset::response_coords() const {
  Matrix out(coords::size(space), static_cast<Eigen::Index>(Y.size()));
  for (std::size_t i = 0; i < Y.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = coords::from_object(space, Y[i]);
  return out;
}

MetricObject MomentEstimates::beta0_hat(const SpaceSpec& space) const {
  Vector c = beta0_coords;
  coords::project(space, c);
  return coords::to_object(space, c);
}

RawObject MomentEstimates::sigma_obj_hat(const SpaceSpec& space, int j) const {
  if (j < 0 || j >= sigma_obj_coords.cols()) throw DimensionError("sigma index out of range");
  return coords::to_raw(space, sigma_obj_coords.col(j));
}

std::optional<SeparableMoments> MomentEstimates::separable() const {
  if (!sigma_h_hat) return std::nullopt;
  return SeparableMoments{*sigma_h_hat, sigma_mat_inv};
}

Vector FittedModel::link_parameter() const {
  if (std::holds_alternative<LinearFlavor>(flavor) || !links) return {};
  return effective_beta(*links, flavor, moments.separable());
}

BetaSearch BetaSearch::around(const Vector& init, double half_width) {
  BetaSearch s;
  s.init = init;
  s.lower = init.array() - half_width;
  s.upper = init.array() + half_width;
  return s;
}

std::vector<double> CGrid::values() const {
  if (size < 1) throw EmptyInput("c grid is empty");
  if (size == 1) return {lo};
  if (!(lo < hi)) throw ValidationError("c grid bounds need lo < hi");
  std::vector<double> out(static_cast<std::size_t>(size));
  for (int k = 0; k < size; ++k) out[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (size - 1);
  return out;
}

CovariateMoments estimate_moments(const Matrix& X) {
  if (X.rows() < 2) throw EmptyInput("estimate_moments needs at least 2 rows");
  if (!X.allFinite()) throw BadData("non-finite covariate entries");
  const double n = static_cast<double>(X.rows());
  CovariateMoments out;
  out.mu_hat = X.colwise().mean().transpose();
  const Matrix centered = X.rowwise() - out.mu_hat.transpose();
  Matrix sigma = centered.transpose() * centered / n;
  out.sigma_mat_hat = 0.5 * (sigma + sigma.transpose());
  out.sigma_mat_inv = spd_inverse_ridge(out.sigma_mat_hat);
  return out;
}

ObjectMoments estimate_object_moments(const Dataset& data, const Vector& mu_hat) {
  data.validate();
  if (mu_hat.size() != data.p()) throw DimensionError("mu_hat dimension differs from covariates");
  const Matrix Yc = data.response_coords();
  const Matrix centered = data.X.rowwise() - mu_hat.transpose();
  Vector b0 = Yc.rowwise().mean();
  const Matrix S = Yc * centered / static_cast<double>(data.n());
  ObjectMoments out{MetricObject(QuantileFunction(Vector::Zero(2))), {}};
  coords::project(data.space, b0);
  out.beta0_hat = coords::to_object(data.space, b0);
  for (Eigen::Index j = 0; j < S.cols(); ++j) out.sigma_obj_hat.push_back(coords::to_raw(data.space, S.col(j)));
  return out;
}

Vector h_values(const Dataset& data, HTransform h) {
  check_h_space(data.space, h);
  Vector out(static_cast<Eigen::Index>(data.Y.size()));
  for (std::size_t i = 0; i < data.Y.size(); ++i) out[static_cast<Eigen::Index>(i)] = h_of(data.Y[i], h);
  if (out.size() > 0) out.array() -= out.mean();
  return out;
}

Vector estimate_sigma_h(const Dataset& data, const Vector& mu_hat, HTransform h) {
  data.validate();
  if (mu_hat.size() != data.p()) throw DimensionError("mu_hat dimension differs from covariates");
  const Vector hv = h_values(data, h);
  const Matrix centered = data.X.rowwise() - mu_hat.transpose();
  return centered.transpose() * hv / static_cast<double>(data.n());
}

MetricObject frechet_mean(const Dataset& data) {
  if (data.Y.empty()) throw EmptyInput("frechet_mean: no responses");
  return weighted_frechet_mean(data.space, data.Y, Vector::Ones(static_cast<Eigen::Index>(data.Y.size())));
}

FittedModel fit_lfr(const Dataset& data) {
  data.validate();
  const Matrix Yc = data.response_coords();
  FittedModel model;
  model.space = data.space;
  model.moments = build_moments(data, Yc);
  model.flavor = LinearFlavor{};
  const MomentEstimates& m = model.moments;
  model.diagnostics.objective = training_objective(
      data.space, m, data.X, Yc, [&](const Vector& x) { return Vector(m.sigma_mat_inv * (x - m.mu_hat)); });
  return model;
}

FittedModel fit_nlfr_fixed(const Dataset& data, const LinkSpec& links, const Vector& beta) {
  data.validate();
  check_links(data, links);
  if (beta.size() != links.q()) throw DimensionError("beta dimension differs from link q");
  const Matrix Yc = data.response_coords();
  FittedModel model;
  model.space = data.space;
  model.links = links;
  model.moments = build_moments(data, Yc);
  model.flavor = NonlinearFlavor{beta};
  model.diagnostics.objective = objective_at_beta(data, model.moments, Yc, links, beta);
  model.diagnostics.status = "fixed";
  return model;
}

FittedModel fit_nlfr_profile(const Dataset& data, const LinkSpec& links, const BetaSearch& search,
                             const OptimizerOptions& opts) {
  data.validate();
  check_links(data, links);
  opts.validate();
  const int q = links.q();
  const Vector init = search.init.size() == 0 ? Vector::Zero(q) : search.init;
  if (init.size() != q) throw DimensionError("beta init dimension differs from link q");
  if (!init.allFinite()) throw ValidationError("beta init must be finite");
  const Vector lower = search.lower.size() == 0 ? Vector(init.array() - 3.0) : search.lower;
  const Vector upper = search.upper.size() == 0 ? Vector(init.array() + 3.0) : search.upper;
  if (lower.size() != q || upper.size() != q) throw DimensionError("beta box dimension differs from link q");
  if ((lower.array() > upper.array()).any()) throw ValidationError("beta box has lower > upper");

  const Matrix Yc = data.response_coords();
  FittedModel model;
  model.space = data.space;
  model.links = links;
  model.moments = build_moments(data, Yc);

  // Outside the box the objective is evaluated at the clamped point plus a
  // quadratic penalty, so the minimizer always lies in the box.
  auto clamp = [&](const Vector& b) { return Vector(b.cwiseMax(lower).cwiseMin(upper)); };
  // Range of the unpenalized objective, to detect a flat profile.
  double seen_lo = kInf, seen_hi = -kInf;
  const ObjectiveFn objective = [&](const Vector& b) {
    const Vector c = clamp(b);
    const double v = objective_at_beta(data, model.moments, Yc, links, c);
    seen_lo = std::min(seen_lo, v);
    seen_hi = std::max(seen_hi, v);
    return v + (b - c).squaredNorm();
  };

  OptimizeResult res;
  try {
    res = nelder_mead(objective, clamp(init), opts);
  } catch (const BadObjective& e) {
    throw FitFailed(std::string("objective not finite at the initial beta (") + e.what() + ")");
  }
  if (!std::isfinite(res.value)) throw FitFailed("no finite objective value across all multistarts");

  const bool flat = res.flat || seen_lo == seen_hi;
  const Vector beta_hat = flat ? clamp(init) : clamp(res.argmin);
  model.flavor = NonlinearFlavor{beta_hat};
  model.diagnostics.objective = objective_at_beta(data, model.moments, Yc, links, beta_hat);
  model.diagnostics.status = flat ? "flat objective" : res.status;
  model.diagnostics.converged = res.converged;
  model.diagnostics.flat = flat;
  model.diagnostics.evaluations = res.evaluations;
  return model;
}

FittedModel fit_snlfr(const Dataset& data, const LinkSpec& links, HTransform h, const std::vector<double>& grid,
                      bool refine) {
  if (grid.empty()) throw EmptyInput("c grid is empty");
  data.validate();
  check_links(data, links);
  if (links.form() != LinkForm::generalized_linear) {
    throw SpecMismatch("separable fit requires generalized-linear links");
  }
  check_h_space(data.space, h);
  for (double c : grid) {
    if (!std::isfinite(c)) throw ValidationError("c grid contains a non-finite value");
  }
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());

  const Matrix Yc = data.response_coords();
  FittedModel model;
  model.space = data.space;
  model.links = links;
  model.moments = build_moments(data, Yc);
  model.moments.sigma_h_hat = estimate_sigma_h(data, model.moments.mu_hat, h);
  const Vector direction = model.moments.sigma_mat_inv * *model.moments.sigma_h_hat;

  auto objective = [&](double c) { return objective_at_beta(data, model.moments, Yc, links, c * direction); };

  std::size_t best = 0;
  double best_value = kInf;
  int evaluations = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double v = objective(sorted[k]);
    ++evaluations;
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }
  if (!std::isfinite(best_value)) throw FitFailed("separable objective not finite on any grid point");

  double c_hat = sorted[best];
  std::string status = "grid";
  if (refine && sorted.size() > 1) {
    const double lo = sorted[best == 0 ? 0 : best - 1];
    const double hi = sorted[std::min(best + 1, sorted.size() - 1)];
    if (lo < hi) {
      const double c_ref = brent_min(objective, lo, hi, 1e-8);
      const double v_ref = objective(c_ref);
      evaluations += 1;
      if (v_ref < best_value) {
        c_hat = c_ref;
        best_value = v_ref;
        status = "grid+brent";
      }
    }
  }
  model.flavor = SeparableFlavor{c_hat, h};
  model.diagnostics.objective = best_value;
  model.diagnostics.status = status;
  model.diagnostics.evaluations = evaluations;
  return model;
}

RawObject predict_raw(const FittedModel& model, const Vector& x) {
  return coords::to_raw(model.space, MomentEvaluator(model).raw_coords(x));
}

MetricObject predict(const FittedModel& model, const Vector& x) {
  Vector c = MomentEvaluator(model).raw_coords(x);
  coords::project(model.space, c);
  return coords::to_object(model.space, c);
}

std::vector<MetricObject> predict_many(const FittedModel& model, const Matrix& X) {
  const MomentEvaluator eval(model);
  std::vector<MetricObject> out;
  out.reserve(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Vector c = eval.raw_coords(X.row(i).transpose());
    coords::project(model.space, c);
    out.push_back(coords::to_object(model.space, c));
  }
  return out;
}

Vector model_weights(const FittedModel& model, const Matrix& X, const Vector& x) {
  const Vector v = MomentEvaluator(model).v(x);
  if (X.cols() != v.size()) throw DimensionError("covariate dimension differs from the fitted model");
  const Matrix centered = X.rowwise() - model.moments.mu_hat.transpose();
  return (centered * v).array() + 1.0;
}

RawObject predict_weighted_sum_raw(const FittedModel& model, const Dataset& data, const Vector& x) {
  if (!(data.space == model.space)) throw SpecMismatch("dataset space differs from the fitted model");
  const Vector w = model_weights(model, data.X, x);
  return combine(model.space, w / static_cast<double>(data.n()), data.Y);
}

HTransform default_h(const SpaceSpec& space) {
  return space.kind == SpaceKind::wasserstein ? HTransform::dist_mean_centered : HTransform::spd_trace_centered;
}

}  // namespace frechet
