#pragma once

namespace frechet {

/// Standard normal distribution function.
double normal_cdf(double z);
/// Standard normal quantile; throws ValidationError outside (0, 1).
double normal_quantile(double p);

}  // namespace frechet
