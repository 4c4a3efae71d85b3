#include "frechet/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "frechet/errors.hpp"

namespace frechet {

namespace {

constexpr std::uint64_t kReplicationTag = 0x5eed;

SpaceSpec alternate_metric(const SpaceSpec& space) {
  SpaceSpec alt = space;
  alt.kind = space.kind == SpaceKind::spd_cholesky ? SpaceKind::spd_frobenius : SpaceKind::spd_cholesky;
  return alt;
}

bool beta_identified(const SimulationSpec& spec) { return spec.g_kind() != GKind::linear; }

struct SharedFitInputs {
  const SimulationSpec& spec;
  const ExperimentOptions& options;
  const std::optional<DerivedLinks>& links;
};

FittedModel fit_method(Method method, const Dataset& train, const SharedFitInputs& in) {
  std::optional<DerivedLinks> local;
  if ((method == Method::nlfr || method == Method::snlfr) && in.options.link_moments == LinkMoments::sample) {
    local = derive_sample_links(in.spec, train.X);
  }
  const DerivedLinks* links = local ? &*local : (in.links ? &*in.links : nullptr);
  if ((method == Method::nlfr || method == Method::snlfr) && !links) throw SpecMismatch("derived links missing");
  switch (method) {
    case Method::lfr: return fit_lfr(train);
    case Method::nlfr: {
      const BetaSearch search = BetaSearch::around(Vector::Zero(train.p()), in.options.beta_half_width);
      return fit_nlfr_profile(train, links->general, search, in.options.optimizer);
    }
    case Method::snlfr:
      return fit_snlfr(train, *links->generalized_linear, default_h(train.space), in.options.c_grid.values(),
                       in.options.refine);
    case Method::nlfr_lfr: {
      const CovariateMoments cm = estimate_moments(train.X);
      const Vector sigma_h = estimate_sigma_h(train, cm.mu_hat, default_h(train.space));
      const LinkSpec reducing = lfr_reducing_links(cm.mu_hat, cm.sigma_mat_inv, sigma_h);
      return fit_nlfr_fixed(train, reducing, cm.sigma_mat_inv * sigma_h);
    }
  }
  throw SpecMismatch("unknown method");
}

bool applicable(Method m, const SimulationSpec& spec) {
  return !(m == Method::snlfr && spec.g_kind() == GKind::mixed);
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::lfr: return "LFR";
    case Method::nlfr: return "NLFR";
    case Method::snlfr: return "SNLFR";
    case Method::nlfr_lfr: return "NLFR-LFR";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  for (Method m : {Method::lfr, Method::nlfr, Method::snlfr, Method::nlfr_lfr}) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

double mean_squared_distance(const SpaceSpec& metric, const std::vector<MetricObject>& a,
                             const std::vector<MetricObject>& b) {
  if (a.size() != b.size()) throw DimensionError("object lists differ in length");
  if (a.empty()) throw EmptyInput("no objects to score");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = distance(metric, a[i], b[i]);
    total += d * d;
  }
  return total / static_cast<double>(a.size());
}

double mse_y(const FittedModel& model, const Dataset& test) {
  if (test.X.cols() != model.moments.mu_hat.size()) throw DimensionError("test covariate dimension differs");
  if (!(test.space == model.space)) throw SpecMismatch("test space differs from the fitted model");
  return mean_squared_distance(model.space, predict_many(model, test.X), test.Y);
}

double mse_m(const FittedModel& model, const TrueRegression& truth, const Matrix& test_X) {
  if (test_X.cols() != model.moments.mu_hat.size()) throw DimensionError("test covariate dimension differs");
  std::vector<MetricObject> target;
  target.reserve(static_cast<std::size_t>(test_X.rows()));
  for (Eigen::Index i = 0; i < test_X.rows(); ++i) target.push_back(truth(test_X.row(i).transpose()));
  return mean_squared_distance(model.space, predict_many(model, test_X), target);
}

double ase_beta(const std::vector<Vector>& estimates, const Vector& beta_true) {
  if (estimates.empty()) throw EmptyInput("ase_beta: no estimates");
  double total = 0.0;
  for (const auto& b : estimates) {
    if (b.size() != beta_true.size()) throw DimensionError("ase_beta: estimate dimension differs");
    total += (b - beta_true).squaredNorm();
  }
  return total / static_cast<double>(estimates.size());
}

MetricSummary MetricSummary::of(const std::vector<double>& values) {
  MetricSummary s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.count;
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (s.count - 1));
    s.se = s.sd / std::sqrt(static_cast<double>(s.count));
  }
  return s;
}

const MethodResult* ExperimentResult::find(Method m) const {
  for (const auto& r : methods) {
    if (r.method == m) return &r;
  }
  return nullptr;
}

std::uint64_t replication_seed(const SimulationSpec& spec, int r) {
  return derive_seed(spec.seed, kReplicationTag, static_cast<std::uint64_t>(r));
}

ExperimentResult run_experiment(const SimulationSpec& spec, const std::vector<Method>& methods, int replications,
                                int parallelism, const ExperimentOptions& options) {
  if (replications < 1) throw ValidationError("replications must be at least 1");
  if (methods.empty()) throw ValidationError("no methods requested");
  if (parallelism < 1) throw ValidationError("parallelism must be at least 1");
  spec.validate();
  options.optimizer.validate();
  check_feasibility(spec);
  const auto start = std::chrono::steady_clock::now();

  const bool needs_links = std::any_of(methods.begin(), methods.end(), [&](Method m) {
    return (m == Method::nlfr || m == Method::snlfr) && applicable(m, spec);
  });
  std::optional<DerivedLinks> links;
  if (needs_links && options.link_moments == LinkMoments::population) links = derive_links(spec, options.mc_size, options.mc_seed);
  const SharedFitInputs inputs{spec, options, links};

  const SpaceSpec space = spec.response_space();
  const bool spd = space.is_spd();
  const SpaceSpec alt = spd ? alternate_metric(space) : space;

  // scores[r][k] for replication r and method k.
  std::vector<std::vector<ReplicationScore>> scores(static_cast<std::size_t>(replications),
                                                    std::vector<ReplicationScore>(methods.size()));
  auto run_one = [&](int r) {
    auto& row = scores[static_cast<std::size_t>(r)];
    ReplicationData data;
    try {
      data = generate_replication(spec, replication_seed(spec, r));
    } catch (const std::exception& e) {
      for (auto& s : row) s.error = std::string("generation: ") + e.what();
      return;
    }
    for (std::size_t k = 0; k < methods.size(); ++k) {
      if (!applicable(methods[k], spec)) continue;
      ReplicationScore& s = row[k];
      try {
        const FittedModel model = fit_method(methods[k], data.train, inputs);
        const std::vector<MetricObject> pred = predict_many(model, data.test.X);
        s.mse_y = mean_squared_distance(space, pred, data.test.Y);
        s.mse_m = mean_squared_distance(space, pred, data.test_truth);
        if (spd) {
          s.mse_y_alt = mean_squared_distance(alt, pred, data.test.Y);
          s.mse_m_alt = mean_squared_distance(alt, pred, data.test_truth);
        }
        s.beta_hat = model.link_parameter();
        if (const auto* sep = std::get_if<SeparableFlavor>(&model.flavor)) s.c_hat = sep->c_h;
        s.ok = true;
      } catch (const std::exception& e) {
        s.error = e.what();
      }
    }
  };

  const int workers = std::min(parallelism, replications);
  if (workers == 1) {
    for (int r = 0; r < replications; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int r = next++; r < replications; r = next++) run_one(r);
      });
    }
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  result.spec = spec;
  result.replications = replications;
  result.metric = std::string(to_string(space.kind));
  result.alt_metric = spd ? std::string(to_string(alt.kind)) : std::string();
  for (std::size_t k = 0; k < methods.size(); ++k) {
    MethodResult mr;
    mr.method = methods[k];
    mr.present = applicable(methods[k], spec);
    std::vector<double> y, m, y_alt, m_alt;
    std::vector<Vector> betas;
    for (int r = 0; r < replications; ++r) {
      const ReplicationScore& s = scores[static_cast<std::size_t>(r)][k];
      mr.replications.push_back(s);
      if (!mr.present) continue;
      if (!s.ok) {
        ++mr.failures;
        continue;
      }
      y.push_back(s.mse_y);
      m.push_back(s.mse_m);
      if (s.mse_y_alt) y_alt.push_back(*s.mse_y_alt);
      if (s.mse_m_alt) m_alt.push_back(*s.mse_m_alt);
      if (s.beta_hat.size() == spec.p) betas.push_back(s.beta_hat);
    }
    if (mr.present) {
      mr.mse_y = MetricSummary::of(y);
      mr.mse_m = MetricSummary::of(m);
      if (spd) {
        mr.mse_y_alt = MetricSummary::of(y_alt);
        mr.mse_m_alt = MetricSummary::of(m_alt);
      }
      if (methods[k] == Method::nlfr && beta_identified(spec) && !betas.empty()) {
        mr.ase_beta = ase_beta(betas, spec.beta_true);
      }
    }
    result.methods.push_back(std::move(mr));
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace frechet
