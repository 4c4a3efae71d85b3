#include "frechet/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "frechet/errors.hpp"
#include "frechet/gaussian.hpp"
#include "frechet/numeric.hpp"

namespace frechet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kCovariateRho = 0.5;
constexpr int kMcChunk = 50000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Matrix covariate_cov_factor(int p) {
  Matrix sigma(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) sigma(i, j) = std::pow(kCovariateRho, std::abs(i - j));
  }
  return Eigen::LLT<Matrix>(sigma).matrixL();
}

Vector quantile_offsets(int m) {
  const Vector t = quantile_grid(m);
  Vector out(m);
  for (int i = 0; i < m; ++i) out[i] = normal_quantile(t[i]) + 1.0;
  return out;
}

double draw_normal(Rng& rng, double mean, double variance) {
  if (variance <= 0.0) return mean;
  std::normal_distribution<double> d(mean, std::sqrt(variance));
  return d(rng);
}

double draw_gamma(Rng& rng, double mean, double variance) {
  std::gamma_distribution<double> d(mean * mean / variance, variance / mean);
  return d(rng);
}

MetricObject sample_with_offsets(const SimulationSpec& spec, double a, Rng& rng, const Vector& offsets,
                                 const std::optional<Matrix>& Pm) {
  const double v_mean = spec.V0 + a;
  if (!(v_mean > 0.0)) throw InfeasibleSpec("V0 + alpha^T g(x) must be positive (got " + std::to_string(v_mean) + ")");
  if (spec.is_distribution()) {
    const double u = draw_normal(rng, spec.U0 + a, spec.v1);
    const double v = draw_gamma(rng, v_mean, spec.v2);
    return QuantileFunction(Vector(u + v * offsets.array()));
  }
  if (!Pm) throw SpecMismatch("SPD responses need P_m");
  const double u_sq_mean = spec.U0 + a - spec.v1;
  if (u_sq_mean < 0.0) {
    throw InfeasibleSpec("U0 + alpha^T g(x) - v1 must be nonnegative (got " + std::to_string(u_sq_mean) + ")");
  }
  const double u = draw_normal(rng, std::sqrt(u_sq_mean), spec.v1);
  const double v = draw_gamma(rng, v_mean, spec.v2);
  Matrix y = v * *Pm;
  y.diagonal().array() += u * u;
  return SpdMatrix(0.5 * (y + y.transpose()));
}

MetricObject truth_with_offsets(const SimulationSpec& spec, double a, const Vector& offsets,
                                const std::optional<Matrix>& Pm) {
  if (spec.is_distribution()) return QuantileFunction(Vector((spec.U0 + a) + (spec.V0 + a) * offsets.array()));
  if (!Pm) throw SpecMismatch("SPD truth needs P_m");
  Matrix y = (spec.V0 + a) * *Pm;
  y.diagonal().array() += spec.U0 + a;
  return SpdMatrix(0.5 * (y + y.transpose()));
}

std::string_view g_kind_name(GKind kind) {
  switch (kind) {
    case GKind::linear: return "linear";
    case GKind::squared: return "squared";
    case GKind::mixed: return "mixed";
  }
  return "unknown";
}

}  // namespace

std::string_view to_string(ModelId id) {
  switch (id) {
    case ModelId::m1_1: return "1.1";
    case ModelId::m1_2: return "1.2";
    case ModelId::m1_3: return "1.3";
    case ModelId::m2_1: return "2.1";
    case ModelId::m2_2: return "2.2";
    case ModelId::m2_3: return "2.3";
  }
  return "unknown";
}

ModelId model_id_from_string(std::string_view name) {
  for (ModelId id : {ModelId::m1_1, ModelId::m1_2, ModelId::m1_3, ModelId::m2_1, ModelId::m2_2, ModelId::m2_3}) {
    if (to_string(id) == name) return id;
  }
  throw ValidationError("unknown model '" + std::string(name) + "'");
}

std::string_view to_string(PmPolicy policy) {
  return policy == PmPolicy::shared ? "shared" : "independent_test";
}

PmPolicy pm_policy_from_string(std::string_view name) {
  if (name == "shared") return PmPolicy::shared;
  if (name == "independent_test") return PmPolicy::independent_test;
  throw ValidationError("unknown pm_policy '" + std::string(name) + "'");
}

SimulationSpec SimulationSpec::defaults(ModelId model, int p) {
  if (p != 2 && p != 5) throw ValidationError("default designs exist for p = 2 and p = 5 only");
  SimulationSpec s;
  s.model = model;
  s.p = p;
  s.beta_true = p == 2 ? Vector{{1.0, -0.5}} : Vector{{1.0, -0.5, 2.0, 1.5, -1.0}};
  s.alpha = Vector::Zero(p);
  s.alpha[0] = 1.0;
  s.p1 = p == 2 ? 1 : 3;
  s.m_obj = s.is_distribution() ? 20 : 3;
  switch (model) {
    case ModelId::m1_1:
      s.U0 = 0.0;
      s.V0 = p == 2 ? 2.0 : 6.5;
      break;
    case ModelId::m1_2:
    case ModelId::m1_3:
      s.U0 = 0.0;
      s.V0 = 0.5;
      break;
    case ModelId::m2_1:
      s.U0 = p == 2 ? 3.0 : 8.0;
      s.V0 = p == 2 ? 2.0 : 6.5;
      break;
    case ModelId::m2_2:
    case ModelId::m2_3:
      s.U0 = 1.5;
      s.V0 = 0.5;
      break;
  }
  return s;
}

bool SimulationSpec::is_distribution() const {
  return model == ModelId::m1_1 || model == ModelId::m1_2 || model == ModelId::m1_3;
}

CovariateDesign SimulationSpec::design() const {
  return (model == ModelId::m1_1 || model == ModelId::m2_1) ? CovariateDesign::copula : CovariateDesign::gaussian;
}

GKind SimulationSpec::g_kind() const {
  switch (model) {
    case ModelId::m1_1:
    case ModelId::m2_1: return GKind::linear;
    case ModelId::m1_2:
    case ModelId::m2_2: return GKind::squared;
    default: return GKind::mixed;
  }
}

SpaceSpec SimulationSpec::response_space() const {
  SpaceSpec s;
  s.kind = is_distribution() ? SpaceKind::wasserstein : spd_metric;
  s.dims = m_obj;
  return s;
}

void SimulationSpec::validate() const {
  if (p < 1) throw ValidationError("p must be positive");
  if (beta_true.size() != p) throw ValidationError("beta_true must have p entries");
  if (alpha.size() != p) throw ValidationError("alpha must have p entries");
  if (!beta_true.allFinite() || !alpha.allFinite()) throw ValidationError("beta_true and alpha must be finite");
  if (n < 2) throw ValidationError("n must be at least 2");
  if (n_test < 1) throw ValidationError("n_test must be positive");
  if (!(v1 >= 0.0) || !(v2 > 0.0)) throw ValidationError("need v1 >= 0 and v2 > 0");
  if (!std::isfinite(U0) || !std::isfinite(V0)) throw ValidationError("U0 and V0 must be finite");
  if (g_kind() == GKind::mixed && (p1 < 0 || p1 > p)) throw ValidationError("p1 must lie in [0, p]");
  if (m_obj < 2) throw ValidationError("m_obj must be at least 2");
  if (!is_distribution() && spd_metric == SpaceKind::wasserstein) {
    throw ValidationError("spd_metric must be an SPD space");
  }
}

nlohmann::json SimulationSpec::to_json() const {
  return {{"model", std::string(to_string(model))},
          {"p", p},
          {"n", n},
          {"n_test", n_test},
          {"beta_true", std::vector<double>(beta_true.data(), beta_true.data() + beta_true.size())},
          {"alpha", std::vector<double>(alpha.data(), alpha.data() + alpha.size())},
          {"U0", U0},
          {"V0", V0},
          {"v1", v1},
          {"v2", v2},
          {"p1", p1},
          {"m_obj", m_obj},
          {"seed", seed},
          {"pm_policy", std::string(to_string(pm_policy))},
          {"spd_metric", std::string(to_string(spd_metric))}};
}

SimulationSpec SimulationSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("simulation spec must be an object");
  static const std::vector<std::string> known = {"model", "p",  "n",  "n_test", "beta_true", "alpha",     "U0",
                                                 "V0",    "v1", "v2", "p1",     "m_obj",     "seed", "pm_policy",
                                                 "spd_metric"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown key '" + key + "' in simulation spec");
    }
  }
  try {
    const ModelId model = model_id_from_string(j.value("model", std::string("1.1")));
    const int p = j.value("p", 2);
    SimulationSpec s;
    if (p == 2 || p == 5) {
      s = defaults(model, p);
    } else {
      s.model = model;
      s.p = p;
      s.m_obj = s.is_distribution() ? 20 : 3;
    }
    auto vec = [](const nlohmann::json& a) {
      const auto v = a.get<std::vector<double>>();
      return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    if (j.contains("beta_true")) s.beta_true = vec(j["beta_true"]);
    if (j.contains("alpha")) s.alpha = vec(j["alpha"]);
    s.n = j.value("n", s.n);
    s.n_test = j.value("n_test", s.n_test);
    s.U0 = j.value("U0", s.U0);
    s.V0 = j.value("V0", s.V0);
    s.v1 = j.value("v1", s.v1);
    s.v2 = j.value("v2", s.v2);
    s.p1 = j.value("p1", s.p1);
    s.m_obj = j.value("m_obj", s.m_obj);
    s.seed = j.value("seed", s.seed);
    if (j.contains("pm_policy")) s.pm_policy = pm_policy_from_string(j["pm_policy"].get<std::string>());
    if (j.contains("spd_metric")) {
      try {
        s.spd_metric = space_kind_from_string(j["spd_metric"].get<std::string>());
      } catch (const Error& e) {
        throw ValidationError(e.detail());
      }
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("simulation spec: ") + e.what());
  }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t index) {
  return splitmix64(base ^ splitmix64(tag + 0x51ed2701ULL * splitmix64(index)));
}

Matrix gen_covariates(const SimulationSpec& spec, int count, Rng& rng) {
  if (count < 1) throw ValidationError("covariate count must be positive");
  const int p = spec.p;
  const Matrix L = covariate_cov_factor(p);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix X(count, p);
  Vector e(p);
  const bool copula = spec.design() == CovariateDesign::copula;
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < p; ++j) e[j] = normal(rng);
    const Vector z = L * e;
    for (int j = 0; j < p; ++j) X(i, j) = copula ? 2.0 * normal_cdf(z[j]) - 1.0 : z[j];
  }
  return X;
}

double g1_eval(GKind kind, int p1, const Vector& z, const Vector& beta) {
  switch (kind) {
    case GKind::linear: return beta.dot(z);
    case GKind::squared: {
      const double u = beta.dot(z) + 1.0;
      return u * u;
    }
    case GKind::mixed: {
      double total = 0.0;
      for (Eigen::Index j = 0; j < z.size(); ++j) {
        const double u = beta[j] * z[j];
        total += j < p1 ? (u + 1.0) * (u + 1.0) : std::exp(u);
      }
      return total;
    }
  }
  return kNaN;
}

Vector g_eval(const SimulationSpec& spec, const Vector& x) {
  if (x.size() != spec.p) throw DimensionError("covariate dimension differs from spec p");
  if (!x.allFinite()) throw BadData("non-finite covariate");
  Vector g = Vector::Zero(spec.p);
  // Population covariate mean is zero for every design.
  g[0] = g1_eval(spec.g_kind(), spec.p1, x, spec.beta_true);
  return g;
}

double regression_index(const SimulationSpec& spec, const Vector& x) {
  return spec.alpha.dot(g_eval(spec, x));
}

void check_feasibility(const SimulationSpec& spec, int draws) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, 0xfea5, 0));
  const Matrix X = gen_covariates(spec, draws, rng);
  double min_a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < X.rows(); ++i) min_a = std::min(min_a, regression_index(spec, X.row(i).transpose()));
  if (!(spec.V0 + min_a > 0.0)) {
    throw InfeasibleSpec("V0 + alpha^T g(x) reaches " + std::to_string(spec.V0 + min_a) + " on the probe");
  }
  if (!spec.is_distribution() && spec.U0 + min_a < spec.v1) {
    throw InfeasibleSpec("U0 + alpha^T g(x) drops below v1 (min " + std::to_string(spec.U0 + min_a) + ")");
  }
}

TrueRegression true_regression(const SimulationSpec& spec, const std::optional<Matrix>& Pm) {
  check_feasibility(spec);
  if (!spec.is_distribution()) {
    if (!Pm) throw SpecMismatch("SPD truth needs P_m");
    if (Pm->rows() != spec.m_obj || Pm->cols() != spec.m_obj) throw DimensionError("P_m has wrong dimension");
  }
  const Vector offsets = spec.is_distribution() ? quantile_offsets(spec.m_obj) : Vector();
  return TrueRegression{[spec, offsets, Pm](const Vector& x) {
    return truth_with_offsets(spec, regression_index(spec, x), offsets, Pm);
  }};
}

MetricObject sample_response(const SimulationSpec& spec, const Vector& x, Rng& rng, const std::optional<Matrix>& Pm) {
  const Vector offsets = spec.is_distribution() ? quantile_offsets(spec.m_obj) : Vector();
  return sample_with_offsets(spec, regression_index(spec, x), rng, offsets, Pm);
}

Matrix gen_Pm(int m, Rng& rng) {
  if (m < 2) throw ValidationError("gen_Pm needs m >= 2");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix Z(m, m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) Z(i, j) = normal(rng);
  }
  // Gram-Schmidt over the columns of Z; dependent columns are dropped and the
  // remaining columns of Q stay zero.
  Matrix Q = Matrix::Zero(m, m);
  int rank = 0;
  const double scale = std::max(1.0, Z.cwiseAbs().maxCoeff());
  for (int j = 0; j < m; ++j) {
    Vector v = Z.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < rank; ++k) v -= Q.col(k).dot(v) * Q.col(k);
    }
    const double norm = v.norm();
    if (norm > 1e-10 * scale) Q.col(rank++) = v / norm;
  }
  Vector d(m);
  for (int i = 0; i < m; ++i) d[i] = i + 1.0;
  Matrix P = Q.transpose() * d.asDiagonal() * Q;
  return 0.5 * (P + P.transpose());
}

ReplicationData generate_replication(const SimulationSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  ReplicationData out;
  if (!spec.is_distribution()) {
    out.pm_train = gen_Pm(spec.m_obj, rng);
    if (spec.pm_policy == PmPolicy::shared) {
      out.pm_test = out.pm_train;
    } else {
      Rng pm_rng(derive_seed(seed, 0x9e57, 0));
      out.pm_test = gen_Pm(spec.m_obj, pm_rng);
    }
  }
  const Vector offsets = spec.is_distribution() ? quantile_offsets(spec.m_obj) : Vector();
  const SpaceSpec space = spec.response_space();

  auto fill = [&](Dataset& ds, int count, const std::optional<Matrix>& Pm) {
    ds.space = space;
    ds.X = gen_covariates(spec, count, rng);
    ds.Y.clear();
    ds.Y.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      ds.Y.push_back(sample_with_offsets(spec, regression_index(spec, ds.X.row(i).transpose()), rng, offsets, Pm));
    }
  };
  fill(out.train, spec.n, out.pm_train);
  fill(out.test, spec.n_test, out.pm_test);
  out.test_truth.reserve(static_cast<std::size_t>(spec.n_test));
  for (int i = 0; i < spec.n_test; ++i) {
    out.test_truth.push_back(
        truth_with_offsets(spec, regression_index(spec, out.test.X.row(i).transpose()), offsets, out.pm_test));
  }
  return out;
}

MomentTable MomentTable::build(const SimulationSpec& spec, int mc_size, std::uint64_t mc_seed) {
  spec.validate();
  if (mc_size < 100000) throw ValidationError("Monte Carlo size must be at least 1e5");
  MomentTable t;
  t.kind_ = spec.g_kind();
  t.p_ = spec.p;
  t.p1_ = spec.p1;
  t.exp_from_ = t.kind_ == GKind::mixed ? spec.p1 : spec.p;
  const int p = t.p_;
  t.center_ = Vector::Zero(p);
  const bool need_m3 = t.kind_ != GKind::linear;
  t.m1_ = Vector::Zero(p);
  t.m2_ = Matrix::Zero(p, p);
  t.m3_.assign(need_m3 ? static_cast<std::size_t>(p) : 0, Matrix::Zero(p, p));
  t.t0_.assign(static_cast<std::size_t>(p), Vector());
  t.t1_.assign(static_cast<std::size_t>(p), Matrix());
  t.t2_.assign(static_cast<std::size_t>(p), Matrix());
  for (int j = t.exp_from_; j < p; ++j) {
    t.t0_[static_cast<std::size_t>(j)] = Vector::Zero(kExpCount);
    t.t1_[static_cast<std::size_t>(j)] = Matrix::Zero(kExpCount, p);
    t.t2_[static_cast<std::size_t>(j)] = Matrix::Zero(kExpCount, p);
  }

  Rng rng(mc_seed);
  int done = 0;
  while (done < mc_size) {
    const int count = std::min(kMcChunk, mc_size - done);
    const Matrix X = gen_covariates(spec, count, rng);
    t.m1_ += X.colwise().sum().transpose();
    t.m2_ += X.transpose() * X;
    if (need_m3) {
      for (int k = 0; k < p; ++k) {
        t.m3_[static_cast<std::size_t>(k)] += X.transpose() * X.col(k).asDiagonal() * X;
      }
    }
    for (int j = t.exp_from_; j < p; ++j) {
      // Columns of E are e^{b_g X_j} over the b grid, built by repeated multiplication.
      Matrix E(count, kExpCount);
      const Vector xj = X.col(j);
      E.col(0) = (kExpLo * xj.array()).exp();
      const Vector step = (kExpStep * xj.array()).exp();
      for (int g = 1; g < kExpCount; ++g) E.col(g) = E.col(g - 1).cwiseProduct(step);
      const auto js = static_cast<std::size_t>(j);
      t.t0_[js] += E.colwise().sum().transpose();
      t.t1_[js] += E.transpose() * X;
      t.t2_[js] += E.transpose() * (xj.asDiagonal() * X);
    }
    done += count;
  }
  const double n = mc_size;
  t.m1_ /= n;
  t.m2_ /= n;
  for (auto& m : t.m3_) m /= n;
  for (int j = t.exp_from_; j < p; ++j) {
    const auto js = static_cast<std::size_t>(j);
    t.t0_[js] /= n;
    t.t1_[js] /= n;
    t.t2_[js] /= n;
  }
  return t;
}

namespace {

struct HermiteCell {
  int i = -1;
  double t = 0.0;
};

HermiteCell locate(double b) {
  const double hi = MomentTable::kExpLo + MomentTable::kExpStep * (MomentTable::kExpCount - 1);
  if (!(b >= MomentTable::kExpLo - 1e-12 && b <= hi + 1e-12)) return {};
  const double pos = std::clamp((b - MomentTable::kExpLo) / MomentTable::kExpStep, 0.0,
                                static_cast<double>(MomentTable::kExpCount - 1));
  const int i = std::min(static_cast<int>(std::floor(pos)), MomentTable::kExpCount - 2);
  return {i, pos - i};
}

double hermite(double y0, double d0, double y1, double d1, double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * d1;
}

}  // namespace

double MomentTable::exp_mean(int j, double b) const {
  const HermiteCell c = locate(b);
  if (c.i < 0) return kNaN;
  const auto js = static_cast<std::size_t>(j);
  const double h = kExpStep;
  return hermite(t0_[js][c.i], h * t1_[js](c.i, j), t0_[js][c.i + 1], h * t1_[js](c.i + 1, j), c.t);
}

Vector MomentTable::exp_cross(int j, double b) const {
  const HermiteCell c = locate(b);
  if (c.i < 0) return Vector::Constant(p_, kNaN);
  const auto js = static_cast<std::size_t>(j);
  const double h = kExpStep;
  Vector out(p_);
  for (int k = 0; k < p_; ++k) {
    out[k] = hermite(t1_[js](c.i, k), h * t2_[js](c.i, k), t1_[js](c.i + 1, k), h * t2_[js](c.i + 1, k), c.t);
  }
  return out;
}

double MomentTable::mean_g1(const Vector& beta) const {
  if (beta.size() != p_) throw DimensionError("beta dimension differs from the moment table");
  switch (kind_) {
    case GKind::linear: return beta.dot(m1_);
    case GKind::squared: return beta.dot(m2_ * beta) + 2.0 * beta.dot(m1_) + 1.0;
    case GKind::mixed: {
      double total = 0.0;
      for (int j = 0; j < p_; ++j) {
        if (j < p1_) {
          total += beta[j] * beta[j] * m2_(j, j) + 2.0 * beta[j] * m1_[j] + 1.0;
        } else {
          total += exp_mean(j, beta[j]);
        }
      }
      return total;
    }
  }
  return kNaN;
}

Vector MomentTable::cov_g1_x(const Vector& beta) const {
  if (beta.size() != p_) throw DimensionError("beta dimension differs from the moment table");
  Vector cross(p_);  // E[g_1 X_k]
  switch (kind_) {
    case GKind::linear: cross = m2_ * beta; break;
    case GKind::squared:
      for (int k = 0; k < p_; ++k) cross[k] = beta.dot(m3_[static_cast<std::size_t>(k)] * beta);
      cross += 2.0 * m2_ * beta + m1_;
      break;
    case GKind::mixed:
      cross.setZero();
      for (int j = 0; j < p_; ++j) {
        if (j < p1_) {
          for (int k = 0; k < p_; ++k) {
            cross[k] += beta[j] * beta[j] * m3_[static_cast<std::size_t>(k)](j, j) + 2.0 * beta[j] * m2_(j, k) + m1_[k];
          }
        } else {
          cross += exp_cross(j, beta[j]);
        }
      }
      break;
  }
  return cross - mean_g1(beta) * m1_;
}

SampleMoments::SampleMoments(GKind kind, int p1, Matrix X) : kind_(kind), p1_(p1), X_(std::move(X)) {
  if (X_.rows() < 2) throw EmptyInput("sample moments need at least 2 rows");
  if (!X_.allFinite()) throw BadData("non-finite covariate entries");
  center_ = X_.colwise().mean().transpose();
  centered_ = X_.rowwise() - center_.transpose();
}

Vector SampleMoments::g1_values(const Vector& beta) const {
  if (beta.size() != X_.cols()) throw DimensionError("beta dimension differs from the covariates");
  Vector g(X_.rows());
  for (Eigen::Index i = 0; i < X_.rows(); ++i) g[i] = g1_eval(kind_, p1_, centered_.row(i).transpose(), beta);
  return g;
}

double SampleMoments::mean_g1(const Vector& beta) const { return g1_values(beta).mean(); }

Vector SampleMoments::cov_g1_x(const Vector& beta) const {
  Vector g = g1_values(beta);
  g.array() -= g.mean();
  return centered_.transpose() * g / static_cast<double>(X_.rows());
}

std::string_view to_string(LinkMoments m) { return m == LinkMoments::sample ? "sample" : "population"; }

LinkMoments link_moments_from_string(std::string_view name) {
  if (name == "sample") return LinkMoments::sample;
  if (name == "population") return LinkMoments::population;
  throw ValidationError("unknown link moments '" + std::string(name) + "'");
}

namespace {

struct LinkCoefficients {
  Vector K;  // f = K (g_1 - E g_1)
  double mean = 0.0;
};

LinkCoefficients link_coefficients(const GMoments& moments, const Vector& beta) {
  if (!beta.allFinite()) return {Vector::Constant(moments.p(), kNaN), kNaN};
  const Vector c = moments.cov_g1_x(beta);
  const double mean = moments.mean_g1(beta);
  if (!c.allFinite() || !std::isfinite(mean)) return {Vector::Constant(moments.p(), kNaN), kNaN};
  // C = e_1 c^T, so C^T C = c c^T and C^T (g - E g) = c (g_1 - E g_1).
  const Matrix normal = c * c.transpose();
  return {spd_inverse_ridge(normal) * c, mean};
}

DerivedLinks links_from_moments(const SimulationSpec& spec, std::shared_ptr<const GMoments> moments,
                                const nlohmann::json& descriptor) {
  const GKind kind = moments->kind();
  const int p1 = moments->p1();
  const int p = moments->p();
  LinkSpec::PointBinder point_binder = [moments, kind, p1](const Vector& beta) -> LinkSpec::PointEval {
    const LinkCoefficients lc = link_coefficients(*moments, beta);
    const Vector center = moments->center();
    return [lc, kind, p1, beta, center](const Vector& x) -> Vector {
      return lc.K * (g1_eval(kind, p1, x - center, beta) - lc.mean);
    };
  };
  nlohmann::json general_desc = descriptor;
  general_desc["form"] = "general";
  DerivedLinks out{LinkSpec::general(p, p, point_binder, general_desc), std::nullopt, moments, {}};
  if (kind == GKind::linear || kind == GKind::squared) {
    LinkSpec::IndexBinder index_binder = [moments, kind](const Vector& beta) -> LinkSpec::IndexEval {
      const LinkCoefficients lc = link_coefficients(*moments, beta);
      return [lc, kind](double u) -> Vector {
        const double g = kind == GKind::linear ? u : (u + 1.0) * (u + 1.0);
        return lc.K * (g - lc.mean);
      };
    };
    nlohmann::json index_desc = descriptor;
    index_desc["form"] = "generalized_linear";
    out.generalized_linear = LinkSpec::generalized_linear(p, index_binder, index_desc);
  }
  if (spec.beta_true.size() == p) {
    const Vector c = moments->cov_g1_x(spec.beta_true);
    out.diagnostics.cov_norm = c.norm();
    out.diagnostics.singular = !(c.norm() > 1e-8);
  }
  out.diagnostics.message =
      out.diagnostics.singular ? "Cov(g(X), X) effectively zero at beta_true; links vanish" : "ok";
  return out;
}

nlohmann::json base_descriptor(const SimulationSpec& spec, std::string_view kind) {
  return {{"kind", std::string(kind)},
          {"model", std::string(to_string(spec.model))},
          {"g", std::string(g_kind_name(spec.g_kind()))},
          {"p", spec.p},
          {"p1", spec.p1}};
}

SimulationSpec spec_from_descriptor(const nlohmann::json& d) {
  const int p = d.at("p").get<int>();
  SimulationSpec spec = SimulationSpec::defaults(model_id_from_string(d.at("model").get<std::string>()), p == 5 ? 5 : 2);
  if (p != spec.p) {
    spec.p = p;
    spec.beta_true = Vector::Ones(p);
    spec.alpha = Vector::Unit(p, 0);
  }
  spec.p1 = d.at("p1").get<int>();
  return spec;
}

}  // namespace

DerivedLinks derive_links(const SimulationSpec& spec, int mc_size, std::uint64_t mc_seed) {
  auto table = std::make_shared<const MomentTable>(MomentTable::build(spec, mc_size, mc_seed));
  nlohmann::json desc = base_descriptor(spec, "derived");
  desc["mc_size"] = mc_size;
  desc["mc_seed"] = mc_seed;
  return links_from_moments(spec, table, desc);
}

DerivedLinks derive_sample_links(const SimulationSpec& spec, const Matrix& X) {
  spec.validate();
  if (X.cols() != spec.p) throw DimensionError("covariate dimension differs from spec p");
  auto moments = std::make_shared<const SampleMoments>(spec.g_kind(), spec.p1, X);
  nlohmann::json desc = base_descriptor(spec, "derived_sample");
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < X.cols(); ++j) row.push_back(X(i, j));
    rows.push_back(std::move(row));
  }
  desc["X"] = std::move(rows);
  return links_from_moments(spec, moments, desc);
}

LinkSpec derived_link_from_descriptor(const nlohmann::json& descriptor) {
  try {
    const std::string kind = descriptor.at("kind").get<std::string>();
    const SimulationSpec spec = spec_from_descriptor(descriptor);
    DerivedLinks links = [&] {
      if (kind == "derived") {
        return derive_links(spec, descriptor.at("mc_size").get<int>(), descriptor.at("mc_seed").get<std::uint64_t>());
      }
      if (kind == "derived_sample") {
        const auto& rows = descriptor.at("X");
        Matrix X(static_cast<Eigen::Index>(rows.size()), spec.p);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const auto row = rows[i].get<std::vector<double>>();
          if (static_cast<int>(row.size()) != spec.p) throw SpecMismatch("derived link covariate row has wrong length");
          for (int j = 0; j < spec.p; ++j) X(static_cast<Eigen::Index>(i), j) = row[static_cast<std::size_t>(j)];
        }
        return derive_sample_links(spec, X);
      }
      throw SpecMismatch("not a derived link descriptor");
    }();
    const std::string form = descriptor.at("form").get<std::string>();
    if (form == "general") return links.general;
    if (form == "generalized_linear" && links.generalized_linear) return *links.generalized_linear;
    throw SpecMismatch("derived link form '" + form + "' unavailable");
  } catch (const nlohmann::json::exception& e) {
    throw SpecMismatch(std::string("malformed derived link descriptor: ") + e.what());
  }
}

}  // namespace frechet
