#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "frechet/estimators.hpp"
#include "frechet/numeric.hpp"
#include "frechet/simgen.hpp"

namespace property {

using namespace frechet;

namespace {

Vector raw_coords(const FittedModel& m, const Vector& x) { return coords::from_raw(m.space, predict_raw(m, x)); }

}  // namespace

double center_rule(const SpaceSpec& space, int datasets, std::uint64_t seed) {
  oracle::Gen g(seed);
  double worst = 0.0;
  for (int t = 0; t < datasets; ++t) {
    const int p = 1 + t % 3;
    const Dataset d = oracle::random_dataset(g, space, 20 + 5 * t, p);
    const FittedModel m = fit_lfr(d);
    const Vector mu = d.X.colwise().mean().transpose();
    worst = std::max(worst, distance(space, predict(m, mu), frechet_mean(d)));
  }
  return worst;
}

double reduction_identity(const SpaceSpec& space, int datasets, int points, std::uint64_t seed) {
  oracle::Gen g(seed);
  double worst = 0.0;
  for (int t = 0; t < datasets; ++t) {
    const Dataset d = oracle::random_dataset(g, space, 60, 2);
    const CovariateMoments cm = estimate_moments(d.X);
    const Vector sigma_h = estimate_sigma_h(d, cm.mu_hat, default_h(space));
    const LinkSpec reducing = lfr_reducing_links(cm.mu_hat, cm.sigma_mat_inv, sigma_h);
    const FittedModel lfr = fit_lfr(d);
    const FittedModel red = fit_nlfr_fixed(d, reducing, cm.sigma_mat_inv * sigma_h);
    for (int k = 0; k < points; ++k) {
      const Vector x = oracle::random_vector(g, 2, -2.0, 2.0);
      worst = std::max(worst, distance(space, predict(lfr, x), predict(red, x)));
    }
  }
  return worst;
}

double weight_mean(int pairs, std::uint64_t seed) {
  oracle::Gen g(seed);
  const SpaceSpec spaces[] = {{SpaceKind::wasserstein, 10, kDefaultSpdEps},
                              {SpaceKind::spd_frobenius, 3, kDefaultSpdEps},
                              {SpaceKind::spd_cholesky, 3, kDefaultSpdEps}};
  const LinkSpec index = index_links(std::vector<std::string>{"exponential", "square_shifted"});
  const SimulationSpec mixed = SimulationSpec::defaults(ModelId::m1_3, 2);
  double worst = 0.0;
  for (int t = 0; t < pairs; ++t) {
    const SpaceSpec& space = spaces[t % 3];
    const Dataset d = oracle::random_dataset(g, space, 30 + t, 2);
    const Vector x = oracle::random_vector(g, 2, -2.0, 2.0);
    const LinkSpec general = derive_sample_links(mixed, d.X).general;
    const FittedModel models[] = {
        fit_lfr(d),
        fit_nlfr_fixed(d, index, oracle::random_vector(g, 2)),
        fit_nlfr_fixed(d, general, oracle::random_vector(g, 2, 0.2, 0.8)),
        fit_snlfr(d, index, default_h(space), CGrid{-1.0, 1.0, 11}.values()),
    };
    for (const FittedModel& m : models) {
      worst = std::max(worst, std::abs(model_weights(m, d.X, x).mean() - 1.0));
    }
  }
  return worst;
}

double pre_projection_linearity(const SpaceSpec& space, int datasets, std::uint64_t seed) {
  oracle::Gen g(seed);
  const LinkSpec links = index_links(std::vector<std::string>{"identity", "exponential"});
  double worst = 0.0;
  for (int t = 0; t < datasets; ++t) {
    Dataset a = oracle::random_dataset(g, space, 25, 2);
    Dataset b = a;
    b.Y.clear();
    for (std::size_t i = 0; i < a.Y.size(); ++i) b.Y.push_back(oracle::random_object(g, space));
    const double ca = oracle::uniform(g, 0.1, 2.0), cb = oracle::uniform(g, 0.1, 2.0);
    Dataset mix = a;
    for (std::size_t i = 0; i < a.Y.size(); ++i) {
      const Vector c = ca * coords::from_object(space, a.Y[i]) + cb * coords::from_object(space, b.Y[i]);
      mix.Y[i] = coords::to_object(space, c);
    }
    const Vector beta = oracle::random_vector(g, 2);
    const std::function<FittedModel(const Dataset&)> fits[] = {
        [](const Dataset& d) { return fit_lfr(d); },
        [&](const Dataset& d) { return fit_nlfr_fixed(d, links, beta); },
    };
    for (const auto& fit : fits) {
      const FittedModel fa = fit(a), fb = fit(b), fm = fit(mix);
      for (int k = 0; k < 10; ++k) {
        const Vector x = oracle::random_vector(g, 2, -2.0, 2.0);
        const Vector gap = raw_coords(fm, x) - (ca * raw_coords(fa, x) + cb * raw_coords(fb, x));
        worst = std::max(worst, gap.cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

double metric_axioms(const SpaceSpec& space, int triples, std::uint64_t seed) {
  oracle::Gen g(seed);
  double worst = 0.0;
  for (int t = 0; t < triples; ++t) {
    const MetricObject a = oracle::random_object(g, space), b = oracle::random_object(g, space),
                       c = oracle::random_object(g, space);
    const double ab = distance(space, a, b), ba = distance(space, b, a);
    const double bc = distance(space, b, c), ac = distance(space, a, c);
    worst = std::max(worst, distance(space, a, a));
    worst = std::max(worst, std::abs(ab - ba));
    worst = std::max(worst, ac - (ab + bc));
    if (!(ab > 0.0)) worst = std::max(worst, 1.0);
  }
  return worst;
}

int isotonic_mismatches(int max_len, int lo, int hi) {
  int bad = 0;
  const int base = hi - lo + 1;
  for (int len = 1; len <= max_len; ++len) {
    int total = 1;
    for (int k = 0; k < len; ++k) total *= base;
    const Vector w = Vector::Ones(len);
    for (int code = 0; code < total; ++code) {
      Vector y(len);
      int c = code;
      for (int k = 0; k < len; ++k) {
        y[k] = lo + c % base;
        c /= base;
      }
      const Vector got = isotonic_regression(y);
      const Vector want = oracle::isotonic_exhaustive(y, w);
      if ((got - want).cwiseAbs().maxCoeff() > 1e-12) ++bad;
    }
  }
  return bad;
}

double clip_optimality(int dim, int matrices, int probes, std::uint64_t seed) {
  oracle::Gen g(seed);
  const double eps = 1e-3;
  double worst = -1.0;
  for (int t = 0; t < matrices; ++t) {
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = oracle::uniform(g, -2.0, 2.0);
    const Matrix p = sym_eig_clip(a, eps);
    const double dp = (a - p).norm();
    const Eigen::SelfAdjointEigenSolver<Matrix> es(p);
    if (es.eigenvalues().minCoeff() < eps - 1e-12) return 1.0;
    for (int k = 0; k < probes; ++k) {
      Matrix b;
      if (k % 2 == 0) {
        b = oracle::random_spd(g, dim, eps);
      } else {
        // Feasible points near P.
        Matrix e(dim, dim);
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j <= i; ++j) e(i, j) = e(j, i) = oracle::uniform(g, -1.0, 1.0);
        b = p + 1e-3 * e;
        if (Eigen::SelfAdjointEigenSolver<Matrix>(b).eigenvalues().minCoeff() < eps) continue;
      }
      worst = std::max(worst, dp - (a - b).norm());
    }
  }
  return worst;
}

VMoments v_moments(ModelId model, const Vector& x, int draws, std::uint64_t seed) {
  const SimulationSpec s = SimulationSpec::defaults(model, static_cast<int>(x.size()));
  Rng rng(seed);
  std::optional<Matrix> pm;
  if (!s.is_distribution()) pm = gen_Pm(s.m_obj, rng);
  const Vector t = quantile_grid(s.m_obj);
  const double z1 = oracle::normal_quantile(t[0]), zm = oracle::normal_quantile(t[s.m_obj - 1]);
  double sv = 0.0, svv = 0.0;
  for (int k = 0; k < draws; ++k) {
    const MetricObject y = sample_response(s, x, rng, pm);
    double v = 0.0;
    if (s.is_distribution()) {
      const Vector& q = std::get<QuantileFunction>(y).values();
      v = (q[s.m_obj - 1] - q[0]) / (zm - z1);
    } else {
      const Vector e = Eigen::SelfAdjointEigenSolver<Matrix>(std::get<SpdMatrix>(y).entries()).eigenvalues();
      v = (e[s.m_obj - 1] - e[0]) / (s.m_obj - 1.0);
    }
    sv += v;
    svv += v * v;
  }
  const double mean = sv / draws, var = svv / draws - mean * mean;
  const double want = s.V0 + regression_index(s, x);
  return {std::abs(mean - want) / want, std::abs(var - s.v2) / s.v2};
}

double pm_spectrum_error(int trials, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const int m = 2 + t % 5;
    const Vector e = Eigen::SelfAdjointEigenSolver<Matrix>(gen_Pm(m, rng)).eigenvalues();
    for (int i = 0; i < m; ++i) worst = std::max(worst, std::abs(e[i] - (i + 1.0)));
  }
  return worst;
}

double derive_links_residual(ModelId model, int points, std::uint64_t seed) {
  const SimulationSpec s = SimulationSpec::defaults(model, 2);
  Rng rng(seed);
  const Matrix X = gen_covariates(s, 500, rng);
  const DerivedLinks links = derive_sample_links(s, X);
  const Vector mu = X.colwise().mean().transpose();
  Vector g(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) g[i] = g1_eval(s.g_kind(), s.p1, X.row(i).transpose() - mu, s.beta_true);
  const double eg = g.mean();
  Vector c = Vector::Zero(X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) c += (g[i] - eg) * (X.row(i).transpose() - mu);
  c /= static_cast<double>(X.rows());
  const auto bound = links.general.bind(s.beta_true);
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const Vector x = oracle::random_vector(rng, 2, -1.5, 1.5);
    const double target = g1_eval(s.g_kind(), s.p1, x - mu, s.beta_true) - eg;
    worst = std::max(worst, std::abs(c.dot(bound.values(x, mu)) - target) / std::max(1.0, std::abs(target)));
  }
  return worst;
}

}  // namespace property
