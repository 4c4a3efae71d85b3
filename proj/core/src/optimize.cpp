#include "frechet/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "frechet/errors.hpp"

namespace frechet {

void OptimizerOptions::validate() const {
  if (!(tol > 0.0)) throw ValidationError("optimizer tol must be > 0");
  if (max_iter < 0) throw ValidationError("optimizer max_iter must be >= 1 (or 0 for the default)");
  if (multistarts < 1) throw ValidationError("optimizer multistarts must be >= 1");
  if (!(restart_radius >= 0.0)) throw ValidationError("optimizer restart_radius must be >= 0");
  if (!(initial_step > 0.0)) throw ValidationError("optimizer initial_step must be > 0");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Tracker {
  const ObjectiveFn& f;
  int evaluations = 0;
  double lowest = kInf;
  double highest = -kInf;

  double operator()(const Vector& x) {
    double v = f(x);
    ++evaluations;
    if (!std::isfinite(v)) v = kInf;
    lowest = std::min(lowest, v);
    highest = std::max(highest, v);
    return v;
  }
};

struct SingleRun {
  Vector x;
  double value;
  int iterations;
  bool converged;
};

SingleRun simplex_search(Tracker& eval, const Vector& start, double step, double tol, int max_iter) {
  const Eigen::Index q = start.size();
  std::vector<Vector> pts(static_cast<std::size_t>(q + 1), start);
  std::vector<double> vals(static_cast<std::size_t>(q + 1));
  vals[0] = eval(start);
  for (Eigen::Index j = 0; j < q; ++j) {
    pts[static_cast<std::size_t>(j + 1)][j] += step;
    vals[static_cast<std::size_t>(j + 1)] = eval(pts[static_cast<std::size_t>(j + 1)]);
  }

  std::vector<std::size_t> order(pts.size());
  int iter = 0;
  bool converged = false;
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];

    double diameter = 0.0;
    for (const Vector& p : pts) diameter = std::max(diameter, (p - pts[best]).cwiseAbs().maxCoeff());
    const double spread = vals[worst] - vals[best];
    if (diameter <= tol && (spread <= tol || !std::isfinite(spread))) {
      converged = true;
      break;
    }
    if (iter >= max_iter) break;
    ++iter;

    Vector centroid = Vector::Zero(q);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i != worst) centroid += pts[i];
    }
    centroid /= static_cast<double>(q);

    const Vector reflected = centroid + (centroid - pts[worst]);
    const double f_reflected = eval(reflected);
    if (f_reflected < vals[best]) {
      const Vector expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        pts[worst] = expanded;
        vals[worst] = f_expanded;
      } else {
        pts[worst] = reflected;
        vals[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < vals[second]) {
      pts[worst] = reflected;
      vals[worst] = f_reflected;
      continue;
    }
    // Contraction: outside when the reflection improved on the worst point.
    const bool outside = f_reflected < vals[worst];
    const Vector contracted = outside ? Vector(centroid + 0.5 * (reflected - centroid))
                                      : Vector(centroid + 0.5 * (pts[worst] - centroid));
    const double f_contracted = eval(contracted);
    if (f_contracted < (outside ? f_reflected : vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = f_contracted;
      continue;
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = eval(pts[i]);
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (vals[i] < vals[best]) best = i;
  }
  return {pts[best], vals[best], iter, converged};
}

}  // namespace

OptimizeResult nelder_mead(const ObjectiveFn& f, const Vector& init, const OptimizerOptions& opts) {
  opts.validate();
  if (init.size() == 0) throw EmptyInput("nelder_mead: zero-dimensional start");
  const double f_init = f(init);
  if (!std::isfinite(f_init)) throw BadObjective("nelder_mead: objective not finite at the initial point");

  const Eigen::Index q = init.size();
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : 500 * static_cast<int>(q);
  Tracker eval{f};
  eval.evaluations = 1;
  eval.lowest = eval.highest = f_init;

  std::mt19937_64 rng(opts.restart_seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  OptimizeResult result;
  result.argmin = init;
  result.value = f_init;
  result.converged = true;

  // Restarts come in mirrored pairs init +/- d.
  Vector offset = Vector::Zero(q);
  for (int s = 0; s < opts.multistarts; ++s) {
    if (s % 2 == 1) {
      for (Eigen::Index j = 0; j < q; ++j) offset[j] = opts.restart_radius * unit(rng);
    } else {
      offset = -offset;
    }
    const Vector start = init + offset;
    SingleRun run = simplex_search(eval, start, opts.initial_step, opts.tol, max_iter);
    result.iterations += run.iterations;
    // Polish from the converged vertex; a collapsed simplex can stall early.
    for (int polish = 0; polish < 3 && run.converged; ++polish) {
      SingleRun again = simplex_search(eval, run.x, 10.0 * opts.tol + 1e-3 * opts.initial_step, opts.tol, max_iter);
      result.iterations += again.iterations;
      const bool improved = again.value < run.value - opts.tol;
      if (again.value < run.value) run = again;
      if (!improved) break;
    }
    if (!run.converged) result.converged = false;
    if (run.value < result.value) {
      result.value = run.value;
      result.argmin = run.x;
    }
  }

  result.evaluations = eval.evaluations;
  result.flat = eval.lowest == eval.highest;
  if (result.flat) {
    result.argmin = init;
    result.value = f_init;
    result.status = "flat objective";
  } else {
    result.status = result.converged ? "converged" : "max_iter reached";
  }
  return result;
}

double brent_min(const ScalarObjectiveFn& f, double lo, double hi, double tol) {
  if (!(lo < hi)) throw ValidationError("brent_min: requires lo < hi");
  if (!(tol > 0.0)) throw ValidationError("brent_min: tol must be > 0");
  const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  const int wanted = static_cast<int>(std::ceil(-std::log2(tol / scale))) + 2;
  const int bits = std::clamp(wanted, 8, std::numeric_limits<double>::digits / 2);
  const auto [x, fx] = boost::math::tools::brent_find_minima(f, lo, hi, bits);
  (void)fx;
  return x;
}

}  // namespace frechet
