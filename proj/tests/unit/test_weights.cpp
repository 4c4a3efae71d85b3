#include <cmath>

#include <gtest/gtest.h>

#include "frechet/errors.hpp"
#include "frechet/links.hpp"
#include "frechet/weights.hpp"
#include "oracles.hpp"

using namespace frechet;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

// Hand-written linear weight, independent of the library.
double linear_oracle(const Vector& Xi, const Vector& x, const Vector& mu, const Matrix& sinv) {
  double s = 1.0;
  for (int a = 0; a < Xi.size(); ++a)
    for (int b = 0; b < x.size(); ++b) s += (Xi[a] - mu[a]) * sinv(a, b) * (x[b] - mu[b]);
  return s;
}

}  // namespace

TEST(LinearWeight, Examples) {
  oracle::Gen g(1);
  const Vector mu = oracle::random_vector(g, 3);
  const Matrix sinv = oracle::random_spd(g, 3);
  for (int t = 0; t < 5; ++t) EXPECT_DOUBLE_EQ(linear_weight(oracle::random_vector(g, 3), mu, mu, sinv), 1.0);
  EXPECT_DOUBLE_EQ(linear_weight(vec({2}), vec({3}), vec({0}), Matrix::Identity(1, 1)), 7.0);
  EXPECT_DOUBLE_EQ(linear_weight(vec({1, 1}), vec({1, -1}), vec({0, 0}), Matrix::Identity(2, 2)), 1.0);
  EXPECT_THROW(linear_weight(vec({1, 1}), vec({1}), vec({0, 0}), Matrix::Identity(2, 2)), DimensionError);
}

TEST(NonlinearWeight, Examples) {
  oracle::Gen g(2);
  const LinkSpec zero = index_links(std::vector<std::string>{"zero", "zero"});
  const NonlinearFlavor fl{vec({0.3, -0.7})};
  for (int t = 0; t < 10; ++t) {
    const Vector X = oracle::random_vector(g, 2), x = oracle::random_vector(g, 2), mu = oracle::random_vector(g, 2);
    EXPECT_DOUBLE_EQ(nonlinear_weight(X, x, mu, zero, fl), 1.0);
    const LinkSpec e = index_links(std::vector<std::string>{"exponential", "square_shifted"});
    EXPECT_DOUBLE_EQ(nonlinear_weight(mu, x, mu, e, fl), 1.0);
  }
  // Composed registry link f(u) = (u + 1)^2 - 2u.
  const LinkSpec sq = index_links(std::vector<LinkComponent>{{{"square_shifted", 1.0}, {"identity", -2.0}}});
  const double w = nonlinear_weight(vec({2}), vec({1.5}), vec({0}), sq, NonlinearFlavor{vec({1})});
  const double u = 1.5;
  EXPECT_NEAR(w, 1.0 + 2.0 * ((u + 1) * (u + 1) - 2 * u), 1e-14);
}

TEST(NonlinearWeight, SquareOfIndexExample) {
  const LinkSpec sq = LinkSpec::from_index_components({[](double u) { return u * u; }});
  EXPECT_DOUBLE_EQ(nonlinear_weight(vec({2}), vec({1.5}), vec({0}), sq, NonlinearFlavor{vec({1})}), 5.5);
}

TEST(NonlinearWeight, SeparableUsesScaledIndex) {
  const LinkSpec id = index_links(std::vector<std::string>{"identity", "exponential"});
  const SeparableMoments sm{vec({0.4, -0.2}), (Matrix(2, 2) << 2, 0.5, 0.5, 1).finished()};
  const Vector X = vec({0.3, 1.1}), x = vec({-0.4, 0.8}), mu = vec({0.1, 0.2});
  const double c = 1.7;
  const double u = c * sm.sigma_h.dot(sm.sigma_inv * (x - mu));
  const double expected = 1.0 + (X[0] - mu[0]) * u + (X[1] - mu[1]) * std::exp(u);
  EXPECT_NEAR(nonlinear_weight(X, x, mu, id, SeparableFlavor{c, HTransform::dist_mean_centered}, sm), expected, 1e-14);
  EXPECT_THROW(nonlinear_weight(X, x, mu, id, SeparableFlavor{c, HTransform::dist_mean_centered}), SpecMismatch);
}

TEST(NonlinearWeight, FlavorLinkMismatch) {
  const LinkSpec general = LinkSpec::from_point_components(
      {[](const Vector& x, const Vector& b) { return x.dot(b); }, [](const Vector&, const Vector&) { return 0.0; }}, 2);
  const SeparableMoments sm{vec({1, 1}), Matrix::Identity(2, 2)};
  EXPECT_THROW(nonlinear_weight(vec({0, 0}), vec({1, 1}), vec({0, 0}), general, SeparableFlavor{}, sm), SpecMismatch);
}

TEST(LfrReducingLinks, OneDimensionalCollapse) {
  const Vector mu = vec({0.5});
  const Matrix sinv = Matrix::Constant(1, 1, 2.0);
  const Vector sigma = vec({3.0});
  const LinkSpec l = lfr_reducing_links(mu, sinv, sigma);
  const Vector beta = sinv * sigma;
  for (double x : {-1.0, 0.0, 0.5, 2.0}) {
    EXPECT_NEAR(l.component(0, vec({x}), beta, mu), 2.0 * (x - 0.5), 1e-14);
  }
}

TEST(LfrReducingLinks, MatchesLinearWeightPointwise) {
  oracle::Gen g(3);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Vector mu = oracle::random_vector(g, 2);
    const Matrix sinv = oracle::random_spd(g, 2, 0.2);
    Vector sigma = oracle::random_vector(g, 2, 0.2, 2.0);
    if (t % 2) sigma[1] = -sigma[1];
    const LinkSpec l = lfr_reducing_links(mu, sinv, sigma);
    const Vector beta = sinv * sigma;
    const Vector X = oracle::random_vector(g, 2, -2, 2), x = oracle::random_vector(g, 2, -2, 2);
    EXPECT_NEAR(nonlinear_weight(mu, mu, mu, l, NonlinearFlavor{beta}), 1.0, 1e-14);
    worst = std::max(worst, std::abs(nonlinear_weight(X, x, mu, l, NonlinearFlavor{beta}) -
                                     linear_oracle(X, x, mu, sinv)));
  }
  EXPECT_LE(worst, 1e-10);
}

TEST(LfrReducingLinks, DegenerateSigma) {
  EXPECT_THROW(lfr_reducing_links(vec({0, 0}), Matrix::Identity(2, 2), vec({1, 0})), DegenerateSigma);
}

TEST(WeightProperties, AffineInCovariate) {
  oracle::Gen g(4);
  const LinkSpec l = index_links(std::vector<std::string>{"exponential", "square_shifted"});
  for (int t = 0; t < 50; ++t) {
    const Vector mu = oracle::random_vector(g, 2);
    const Vector x = oracle::random_vector(g, 2);
    const Vector X1 = oracle::random_vector(g, 2), X2 = oracle::random_vector(g, 2);
    const double lam = oracle::uniform(g, -1, 2);
    const NonlinearFlavor fl{oracle::random_vector(g, 2)};
    const double lhs = nonlinear_weight(lam * X1 + (1 - lam) * X2, x, mu, l, fl);
    const double rhs = lam * nonlinear_weight(X1, x, mu, l, fl) + (1 - lam) * nonlinear_weight(X2, x, mu, l, fl);
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(HTransform, Names) {
  EXPECT_EQ(h_transform_from_string("spd_trace_centered"), HTransform::spd_trace_centered);
  EXPECT_EQ(to_string(HTransform::dist_mean_centered), "dist_mean_centered");
  EXPECT_THROW(h_transform_from_string("cdf"), ValidationError);
}

TEST(Registry, Functions) {
  EXPECT_DOUBLE_EQ(registry_eval("square_shifted", 2.0), 9.0);
  EXPECT_DOUBLE_EQ(registry_eval("exponential", 0.0), 1.0);
  EXPECT_TRUE(registry_has("identity"));
  EXPECT_FALSE(registry_has("tanh"));
  EXPECT_THROW(index_links(std::vector<std::string>{"tanh"}), ValidationError);
}
