#pragma once

#include <optional>
#include <string_view>
#include <variant>

#include "frechet/links.hpp"
#include "frechet/numeric.hpp"

namespace frechet {

/// Built-in real-valued summaries h(Y) for the separable flavor.
///   dist_mean_centered:  grid mean of the quantile values, minus its sample mean.
///   spd_trace_centered:  trace(Y), minus its sample mean.
enum class HTransform { dist_mean_centered, spd_trace_centered };

std::string_view to_string(HTransform h);
HTransform h_transform_from_string(std::string_view name);

struct LinearFlavor {};
struct NonlinearFlavor {
  Vector beta;
};
struct SeparableFlavor {
  double c_h = 1.0;
  HTransform h = HTransform::dist_mean_centered;
};
using WeightFlavor = std::variant<LinearFlavor, NonlinearFlavor, SeparableFlavor>;

std::string_view flavor_name(const WeightFlavor& flavor);

/// Fitted quantities the separable index c_h sigma_h^T Sigma^{-1} (x - mu) needs.
struct SeparableMoments {
  Vector sigma_h;
  Matrix sigma_inv;
};

/// s(X, x) = 1 + (X - mu)^T Sigma^{-1} (x - mu).
double linear_weight(const Vector& X_i, const Vector& x, const Vector& mu, const Matrix& sigma_inv);

/// s^N = 1 + sum_j (X_i^(j) - mu^(j)) f_j(arg), with the argument chosen by
/// the flavor and link form. The separable flavor needs `separable`.
double nonlinear_weight(const Vector& X_i, const Vector& x, const Vector& mu, const LinkSpec& links,
                        const WeightFlavor& flavor, const std::optional<SeparableMoments>& separable = std::nullopt);

/// Parameter vector the links are bound at: beta (nonlinear) or
/// c_h Sigma^{-1} sigma_h (separable).
Vector effective_beta(const LinkSpec& links, const WeightFlavor& flavor,
                      const std::optional<SeparableMoments>& separable);

}  // namespace frechet
