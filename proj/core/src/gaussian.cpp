#include "frechet/gaussian.hpp"

#include <boost/math/distributions/normal.hpp>

#include "frechet/errors.hpp"

namespace frechet {

double normal_cdf(double z) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::cdf(standard, z);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("normal_quantile needs p in (0, 1)");
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

}  // namespace frechet
