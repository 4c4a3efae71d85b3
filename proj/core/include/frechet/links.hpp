#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "frechet/numeric.hpp"

namespace frechet {

enum class LinkForm { general, generalized_linear };

/// The p link functions f_1..f_p of a nonlinear weight.
///
/// Both forms are evaluated through a binder: `bind(beta)` does the per-beta
/// work once (normalizing constants, matrix solves) and returns an evaluator
/// for many covariate points.
///   general:            f_j(x, beta), x the full covariate vector.
///   generalized_linear: f_j(u; beta) at u = beta^T (x - mu). The evaluator
///                       still sees beta so derived links can carry
///                       beta-dependent centering; registry links ignore it.
///
/// A non-null descriptor makes the spec serializable (see model_io).
class LinkSpec {
 public:
  using PointEval = std::function<Vector(const Vector& x)>;
  using IndexEval = std::function<Vector(double u)>;
  using PointBinder = std::function<PointEval(const Vector& beta)>;
  using IndexBinder = std::function<IndexEval(const Vector& beta)>;

  using PointComponent = std::function<double(const Vector& x, const Vector& beta)>;
  using IndexComponent = std::function<double(double u)>;

  static LinkSpec general(int p, int q, PointBinder binder, nlohmann::json descriptor = nullptr);
  static LinkSpec generalized_linear(int p, IndexBinder binder, nlohmann::json descriptor = nullptr);
  static LinkSpec from_point_components(std::vector<PointComponent> components, int q);
  static LinkSpec from_index_components(std::vector<IndexComponent> components);

  class Bound {
   public:
    /// (f_1, ..., f_p) at covariate x; mu is the centering used by the
    /// generalized-linear index and ignored by the general form.
    Vector values(const Vector& x, const Vector& mu) const;
    Vector values_at_index(double u) const;
    const Vector& beta() const { return beta_; }

   private:
    friend class LinkSpec;
    LinkForm form_ = LinkForm::general;
    Vector beta_;
    PointEval point_;
    IndexEval index_;
  };

  Bound bind(const Vector& beta) const;
  double component(int j, const Vector& x, const Vector& beta, const Vector& mu) const;

  LinkForm form() const { return form_; }
  int p() const { return p_; }
  /// Parameter dimension; equals p for the generalized-linear form.
  int q() const { return q_; }
  const nlohmann::json& descriptor() const { return descriptor_; }
  bool serializable() const { return !descriptor_.is_null(); }

 private:
  LinkForm form_ = LinkForm::general;
  int p_ = 0;
  int q_ = 0;
  PointBinder point_binder_;
  IndexBinder index_binder_;
  nlohmann::json descriptor_;
};

// Registry of scalar basis functions for generalized-linear links:
//   zero: 0, identity: u, square_shifted: (u + 1)^2, exponential: e^u.
struct LinkTerm {
  std::string fn;
  double coef = 1.0;
};
using LinkComponent = std::vector<LinkTerm>;  // sum of coef * fn(u); empty means 0

double registry_eval(const std::string& fn, double u);
bool registry_has(const std::string& fn);

/// Generalized-linear links composed from registry terms.
LinkSpec index_links(const std::vector<LinkComponent>& components);
/// Shorthand: one registry function per component with unit coefficient.
LinkSpec index_links(const std::vector<std::string>& names);

/// General-form links that reduce the generalized-linear weight to the linear
/// weight at beta = Sigma^{-1} sigma:
///   f_j(x, beta) = (beta^T (x - mu) - sum_{i != j} sigma_i [Sigma^{-1}(x - mu)]_i) / sigma_j.
/// Throws DegenerateSigma when some sigma_j is zero.
LinkSpec lfr_reducing_links(const Vector& mu, const Matrix& sigma_inv, const Vector& sigma);

/// Rebuilds "index" and "lfr_reducing" descriptors. Other kinds throw
/// SpecMismatch; model_io resolves the simulation-derived kind.
LinkSpec builtin_link_from_descriptor(const nlohmann::json& descriptor);

}  // namespace frechet
