#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "frechet/errors.hpp"
#include "frechet/evaluate.hpp"
#include "oracles.hpp"

using namespace frechet;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

SpaceSpec wass(int m) { return {SpaceKind::wasserstein, m, kDefaultSpdEps}; }

Dataset level_data(const Vector& xs, const std::vector<double>& levels) {
  Dataset d;
  d.space = wass(4);
  d.X = xs;
  for (double l : levels) d.Y.push_back(QuantileFunction(Vector::Constant(4, l)));
  return d;
}

void expect_same(const ExperimentResult& a, const ExperimentResult& b) {
  ASSERT_EQ(a.methods.size(), b.methods.size());
  for (std::size_t k = 0; k < a.methods.size(); ++k) {
    EXPECT_EQ(a.methods[k].mse_y.mean, b.methods[k].mse_y.mean);
    EXPECT_EQ(a.methods[k].mse_m.mean, b.methods[k].mse_m.mean);
    EXPECT_EQ(a.methods[k].mse_m.se, b.methods[k].mse_m.se);
    for (std::size_t r = 0; r < a.methods[k].replications.size(); ++r) {
      EXPECT_EQ(a.methods[k].replications[r].beta_hat, b.methods[k].replications[r].beta_hat);
    }
  }
}

}  // namespace

TEST(MseY, Examples) {
  const Dataset d = level_data(vec({0, 2}), {0, 2});
  const FittedModel m = fit_lfr(d);
  EXPECT_NEAR(mse_y(m, d), 0.0, 1e-18);  // ridge on the inverse
  // Single test pair at distance 2 from its prediction.
  Dataset t = level_data(vec({1}), {3});
  t.X = Matrix::Constant(1, 1, 1.0);
  EXPECT_NEAR(mse_y(m, t), 4.0, 1e-12);
  oracle::Gen g(1);
  const Dataset r = oracle::random_dataset(g, wass(4), 30, 1);
  const FittedModel mr = fit_lfr(r);
  double manual = 0.0;
  for (int i = 0; i < 30; ++i) {
    const Vector diff = std::get<QuantileFunction>(predict(mr, r.X.row(i).transpose())).values() -
                        std::get<QuantileFunction>(r.Y[static_cast<std::size_t>(i)]).values();
    manual += diff.squaredNorm() / 4.0;
  }
  EXPECT_NEAR(mse_y(mr, r), manual / 30.0, 1e-12);
  Dataset wrong = r;
  wrong.space = wass(5);
  EXPECT_THROW(mse_y(mr, wrong), Error);
}

TEST(MseM, Examples) {
  const Dataset d = level_data(vec({0, 2}), {1, 1});
  const FittedModel m = fit_lfr(d);
  const Matrix X = vec({0.5, 1.5, 3.0});
  const TrueRegression same{[](const Vector&) { return MetricObject(QuantileFunction(Vector::Constant(4, 1.0))); }};
  const TrueRegression shifted{[](const Vector&) { return MetricObject(QuantileFunction(Vector::Constant(4, 2.0))); }};
  EXPECT_NEAR(mse_m(m, same, X), 0.0, 1e-28);
  EXPECT_NEAR(mse_m(m, shifted, X), 1.0, 1e-12);
}

TEST(MseM, TriangleBound) {
  SimulationSpec s = SimulationSpec::defaults(ModelId::m1_1, 2);
  s.n = 100;
  for (int r = 0; r < 5; ++r) {
    const ReplicationData rep = generate_replication(s, 1000 + r);
    const FittedModel m = fit_lfr(rep.train);
    const double my = mse_y(m, rep.test);
    const double mm = mse_m(m, true_regression(s), rep.test.X);
    const double noise = mean_squared_distance(rep.test.space, rep.test.Y, rep.test_truth);
    EXPECT_GE(mm, 0.0);
    EXPECT_LE(mm, 2.0 * (my + noise));
  }
}

TEST(AseBeta, Examples) {
  EXPECT_DOUBLE_EQ(ase_beta({vec({1, 2}), vec({1, 2})}, vec({1, 2})), 0.0);
  EXPECT_DOUBLE_EQ(ase_beta({vec({1, 3})}, vec({1, 2})), 1.0);
  EXPECT_DOUBLE_EQ(ase_beta({vec({1, 3}), vec({2, 2 + std::sqrt(2.0)})}, vec({1, 2})), 2.0);
  EXPECT_THROW(ase_beta({}, vec({1})), EmptyInput);
  EXPECT_THROW(ase_beta({vec({1})}, vec({1, 2})), DimensionError);
}

TEST(MetricSummary, StandardErrorConvention) {
  const MetricSummary one = MetricSummary::of({3.5});
  EXPECT_DOUBLE_EQ(one.mean, 3.5);
  EXPECT_DOUBLE_EQ(one.se, 0.0);
  const MetricSummary s = MetricSummary::of({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.sd, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_NEAR(s.se, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
}

TEST(MetricSummary, PermutationInvariant) {
  oracle::Gen g(2);
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back(oracle::uniform(g, 0, 3));
  const MetricSummary a = MetricSummary::of(v);
  std::shuffle(v.begin(), v.end(), g);
  const MetricSummary b = MetricSummary::of(v);
  EXPECT_NEAR(a.mean, b.mean, 1e-14);
  EXPECT_NEAR(a.se, b.se, 1e-14);
}

TEST(Methods, Names) {
  EXPECT_EQ(to_string(Method::nlfr_lfr), "NLFR-LFR");
  EXPECT_EQ(method_from_string("SNLFR"), Method::snlfr);
  EXPECT_THROW(method_from_string("LOESS"), ValidationError);
}

TEST(RunExperiment, SingleReplication) {
  SimulationSpec s = SimulationSpec::defaults(ModelId::m1_1, 2);
  s.n = 60;
  s.n_test = 50;
  const ExperimentResult r = run_experiment(s, {Method::lfr, Method::nlfr}, 1);
  for (const auto& m : r.methods) {
    EXPECT_EQ(m.mse_m.count, 1);
    EXPECT_DOUBLE_EQ(m.mse_m.mean, m.replications[0].mse_m);
    EXPECT_DOUBLE_EQ(m.mse_m.se, 0.0);
    EXPECT_DOUBLE_EQ(m.mse_y.se, 0.0);
  }
  EXPECT_THROW(run_experiment(s, {Method::lfr}, 0), ValidationError);
}

TEST(RunExperiment, DeterministicAndSchedulingIndependent) {
  SimulationSpec s = SimulationSpec::defaults(ModelId::m1_2, 2);
  s.n = 60;
  s.n_test = 40;
  s.seed = 17;
  const std::vector<Method> methods{Method::lfr, Method::nlfr, Method::snlfr};
  const ExperimentResult a = run_experiment(s, methods, 6, 1);
  const ExperimentResult b = run_experiment(s, methods, 6, 1);
  const ExperimentResult c = run_experiment(s, methods, 6, 3);
  expect_same(a, b);
  expect_same(a, c);
}

TEST(RunExperiment, SnlfrAbsentForMixedDesigns) {
  SimulationSpec s = SimulationSpec::defaults(ModelId::m1_3, 2);
  s.n = 50;
  s.n_test = 30;
  const ExperimentResult r = run_experiment(s, {Method::lfr, Method::snlfr}, 2);
  EXPECT_TRUE(r.find(Method::lfr)->present);
  EXPECT_FALSE(r.find(Method::snlfr)->present);
  EXPECT_EQ(r.find(Method::snlfr)->failures, 0);
}

TEST(RunExperiment, ReductionIdentityEndToEnd) {
  for (ModelId model : {ModelId::m1_2, ModelId::m2_1}) {
    SimulationSpec s = SimulationSpec::defaults(model, 2);
    s.n = 80;
    s.n_test = 60;
    const ExperimentResult r = run_experiment(s, {Method::lfr, Method::nlfr_lfr}, 4);
    const MethodResult* lfr = r.find(Method::lfr);
    const MethodResult* red = r.find(Method::nlfr_lfr);
    ASSERT_EQ(red->failures, 0) << red->replications[0].error;
    for (int k = 0; k < 4; ++k) {
      EXPECT_NEAR(lfr->replications[k].mse_y, red->replications[k].mse_y, 1e-8);
      EXPECT_NEAR(lfr->replications[k].mse_m, red->replications[k].mse_m, 1e-8);
    }
  }
}

TEST(RunExperiment, SpdScoredUnderBothMetrics) {
  SimulationSpec s = SimulationSpec::defaults(ModelId::m2_1, 2);
  s.n = 60;
  s.n_test = 30;
  const ExperimentResult r = run_experiment(s, {Method::lfr}, 2);
  EXPECT_EQ(r.metric, "spd_cholesky");
  EXPECT_EQ(r.alt_metric, "spd_frobenius");
  ASSERT_TRUE(r.methods[0].mse_m_alt.has_value());
  EXPECT_GT(r.methods[0].mse_m_alt->mean, 0.0);
}

TEST(RunExperiment, AseOnlyWhereBetaIdentified) {
  SimulationSpec s = SimulationSpec::defaults(ModelId::m1_1, 2);
  s.n = 60;
  s.n_test = 30;
  EXPECT_FALSE(run_experiment(s, {Method::nlfr}, 2).methods[0].ase_beta.has_value());
  s.model = ModelId::m1_2;
  s.V0 = 0.5;
  EXPECT_TRUE(run_experiment(s, {Method::nlfr}, 2).methods[0].ase_beta.has_value());
}
