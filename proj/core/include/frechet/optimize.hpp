#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "frechet/numeric.hpp"

namespace frechet {

using ObjectiveFn = std::function<double(const Vector&)>;
using ScalarObjectiveFn = std::function<double(double)>;

struct OptimizerOptions {
  double tol = 1e-8;
  // Iteration cap per start; 0 means 500 * dimension.
  int max_iter = 0;
  int multistarts = 8;
  std::uint64_t restart_seed = 20240521;
  // Restarts are drawn uniformly from init +/- restart_radius, in mirrored pairs.
  double restart_radius = 3.0;
  // Edge length of the initial simplex along each axis.
  double initial_step = 0.5;

  void validate() const;
};

struct OptimizeResult {
  Vector argmin;
  double value = 0.0;
  bool converged = false;  // false: some start hit max_iter
  bool flat = false;       // every evaluation returned the same value
  int evaluations = 0;
  int iterations = 0;
  std::string status;
};

/// Multistart Nelder-Mead. The first start is `init`; the remaining
/// `multistarts - 1` are uniform in the restart box, drawn in mirrored
/// pairs init +/- d. Non-finite objective
/// values away from `init` are treated as +infinity.
OptimizeResult nelder_mead(const ObjectiveFn& f, const Vector& init,
                           const OptimizerOptions& opts = {});

/// Bracketed scalar minimizer (golden section with parabolic steps).
double brent_min(const ScalarObjectiveFn& f, double lo, double hi, double tol);

}  // namespace frechet
