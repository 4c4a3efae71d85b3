#include "frechet/weights.hpp"

#include <string>

#include "frechet/errors.hpp"

namespace frechet {

std::string_view to_string(HTransform h) {
  switch (h) {
    case HTransform::dist_mean_centered: return "dist_mean_centered";
    case HTransform::spd_trace_centered: return "spd_trace_centered";
  }
  return "unknown";
}

HTransform h_transform_from_string(std::string_view name) {
  if (name == "dist_mean_centered") return HTransform::dist_mean_centered;
  if (name == "spd_trace_centered") return HTransform::spd_trace_centered;
  throw ValidationError("unknown h transform '" + std::string(name) + "'");
}

std::string_view flavor_name(const WeightFlavor& flavor) {
  if (std::holds_alternative<LinearFlavor>(flavor)) return "linear";
  if (std::holds_alternative<NonlinearFlavor>(flavor)) return "nonlinear";
  return "separable";
}

double linear_weight(const Vector& X_i, const Vector& x, const Vector& mu, const Matrix& sigma_inv) {
  const Eigen::Index p = mu.size();
  if (X_i.size() != p || x.size() != p || sigma_inv.rows() != p || sigma_inv.cols() != p) {
    throw DimensionError("linear_weight: dimension mismatch");
  }
  return 1.0 + (X_i - mu).dot(sigma_inv * (x - mu));
}

Vector effective_beta(const LinkSpec& links, const WeightFlavor& flavor,
                      const std::optional<SeparableMoments>& separable) {
  if (const auto* nl = std::get_if<NonlinearFlavor>(&flavor)) {
    if (nl->beta.size() != links.q()) throw DimensionError("beta dimension differs from link q");
    return nl->beta;
  }
  if (const auto* sep = std::get_if<SeparableFlavor>(&flavor)) {
    if (links.form() != LinkForm::generalized_linear) {
      throw SpecMismatch("separable flavor requires generalized-linear links");
    }
    if (!separable) throw SpecMismatch("separable flavor requires sigma_h and Sigma^{-1}");
    if (separable->sigma_h.size() != links.p()) throw DimensionError("sigma_h dimension differs from link p");
    return sep->c_h * (separable->sigma_inv * separable->sigma_h);
  }
  throw SpecMismatch("linear flavor has no link parameter");
}

double nonlinear_weight(const Vector& X_i, const Vector& x, const Vector& mu, const LinkSpec& links,
                        const WeightFlavor& flavor, const std::optional<SeparableMoments>& separable) {
  const Eigen::Index p = mu.size();
  if (X_i.size() != p || x.size() != p || links.p() != p) throw DimensionError("nonlinear_weight: dimension mismatch");
  const Vector beta = effective_beta(links, flavor, separable);
  const Vector f = links.bind(beta).values(x, mu);
  return 1.0 + (X_i - mu).dot(f);
}

}  // namespace frechet
