#include "frechet/links.hpp"

#include <cmath>
#include <memory>

#include "frechet/errors.hpp"

namespace frechet {

LinkSpec LinkSpec::general(int p, int q, PointBinder binder, nlohmann::json descriptor) {
  if (p < 1 || q < 1) throw DimensionError("LinkSpec: p and q must be positive");
  if (!binder) throw SpecMismatch("LinkSpec: empty binder");
  LinkSpec spec;
  spec.form_ = LinkForm::general;
  spec.p_ = p;
  spec.q_ = q;
  spec.point_binder_ = std::move(binder);
  spec.descriptor_ = std::move(descriptor);
  return spec;
}

LinkSpec LinkSpec::generalized_linear(int p, IndexBinder binder, nlohmann::json descriptor) {
  if (p < 1) throw DimensionError("LinkSpec: p must be positive");
  if (!binder) throw SpecMismatch("LinkSpec: empty binder");
  LinkSpec spec;
  spec.form_ = LinkForm::generalized_linear;
  spec.p_ = p;
  spec.q_ = p;
  spec.index_binder_ = std::move(binder);
  spec.descriptor_ = std::move(descriptor);
  return spec;
}

LinkSpec LinkSpec::from_point_components(std::vector<PointComponent> components, int q) {
  const int p = static_cast<int>(components.size());
  auto shared = std::make_shared<const std::vector<PointComponent>>(std::move(components));
  return general(p, q, [shared](const Vector& beta) -> PointEval {
    return [shared, beta](const Vector& x) {
      const auto& components = *shared;
      Vector out(static_cast<Eigen::Index>(components.size()));
      for (std::size_t j = 0; j < components.size(); ++j) out[static_cast<Eigen::Index>(j)] = components[j](x, beta);
      return out;
    };
  });
}

LinkSpec LinkSpec::from_index_components(std::vector<IndexComponent> components) {
  const int p = static_cast<int>(components.size());
  auto shared = std::make_shared<const std::vector<IndexComponent>>(std::move(components));
  return generalized_linear(p, [shared](const Vector&) -> IndexEval {
    return [shared](double u) {
      const auto& components = *shared;
      Vector out(static_cast<Eigen::Index>(components.size()));
      for (std::size_t j = 0; j < components.size(); ++j) out[static_cast<Eigen::Index>(j)] = components[j](u);
      return out;
    };
  });
}

LinkSpec::Bound LinkSpec::bind(const Vector& beta) const {
  if (beta.size() != q_) throw DimensionError("LinkSpec::bind: beta has wrong dimension");
  Bound b;
  b.form_ = form_;
  b.beta_ = beta;
  if (form_ == LinkForm::general) {
    b.point_ = point_binder_(beta);
  } else {
    b.index_ = index_binder_(beta);
  }
  return b;
}

Vector LinkSpec::Bound::values(const Vector& x, const Vector& mu) const {
  if (form_ == LinkForm::general) return point_(x);
  if (x.size() != beta_.size() || mu.size() != beta_.size()) throw DimensionError("link index: dimension mismatch");
  return index_(beta_.dot(x - mu));
}

Vector LinkSpec::Bound::values_at_index(double u) const {
  if (form_ != LinkForm::generalized_linear) throw SpecMismatch("values_at_index on a general-form link");
  return index_(u);
}

double LinkSpec::component(int j, const Vector& x, const Vector& beta, const Vector& mu) const {
  if (j < 0 || j >= p_) throw DimensionError("LinkSpec::component: index out of range");
  return bind(beta).values(x, mu)[j];
}

bool registry_has(const std::string& fn) {
  return fn == "zero" || fn == "identity" || fn == "square_shifted" || fn == "exponential";
}

double registry_eval(const std::string& fn, double u) {
  if (fn == "zero") return 0.0;
  if (fn == "identity") return u;
  if (fn == "square_shifted") return (u + 1.0) * (u + 1.0);
  if (fn == "exponential") return std::exp(u);
  throw ValidationError("unknown link function '" + fn + "'");
}

LinkSpec index_links(const std::vector<LinkComponent>& components) {
  if (components.empty()) throw EmptyInput("index_links: no components");
  nlohmann::json desc;
  desc["kind"] = "index";
  desc["components"] = nlohmann::json::array();
  for (const LinkComponent& comp : components) {
    nlohmann::json terms = nlohmann::json::array();
    for (const LinkTerm& t : comp) {
      if (!registry_has(t.fn)) throw ValidationError("unknown link function '" + t.fn + "'");
      if (!std::isfinite(t.coef)) throw ValidationError("link coefficient must be finite");
      terms.push_back({{"fn", t.fn}, {"coef", t.coef}});
    }
    desc["components"].push_back(terms);
  }
  const int p = static_cast<int>(components.size());
  return LinkSpec::generalized_linear(
      p,
      [components](const Vector&) -> LinkSpec::IndexEval {
        return [components](double u) {
          Vector out = Vector::Zero(static_cast<Eigen::Index>(components.size()));
          for (std::size_t j = 0; j < components.size(); ++j) {
            for (const LinkTerm& t : components[j]) out[static_cast<Eigen::Index>(j)] += t.coef * registry_eval(t.fn, u);
          }
          return out;
        };
      },
      desc);
}

LinkSpec index_links(const std::vector<std::string>& names) {
  std::vector<LinkComponent> components;
  components.reserve(names.size());
  for (const std::string& n : names) components.push_back({LinkTerm{n, 1.0}});
  return index_links(components);
}

LinkSpec lfr_reducing_links(const Vector& mu, const Matrix& sigma_inv, const Vector& sigma) {
  const Eigen::Index p = mu.size();
  if (sigma_inv.rows() != p || sigma_inv.cols() != p || sigma.size() != p) {
    throw DimensionError("lfr_reducing_links: dimension mismatch");
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    if (sigma[j] == 0.0) throw DegenerateSigma("lfr_reducing_links: sigma component " + std::to_string(j) + " is zero");
  }
  nlohmann::json desc;
  desc["kind"] = "lfr_reducing";
  desc["mu"] = std::vector<double>(mu.begin(), mu.end());
  desc["sigma"] = std::vector<double>(sigma.begin(), sigma.end());
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i) rows[static_cast<std::size_t>(i)] = std::vector<double>(sigma_inv.row(i).begin(), sigma_inv.row(i).end());
  desc["sigma_inv"] = rows;

  return LinkSpec::general(
      static_cast<int>(p), static_cast<int>(p),
      [mu, sigma_inv, sigma](const Vector& beta) -> LinkSpec::PointEval {
        return [mu, sigma_inv, sigma, beta](const Vector& x) {
          if (x.size() != mu.size()) throw DimensionError("lfr_reducing_links: covariate dimension mismatch");
          const Vector centered = x - mu;
          const double u = beta.dot(centered);
          // v = Sigma^{-1}(x - mu); sum_{i != j} sigma_i v_i = sigma^T v - sigma_j v_j.
          const Vector v = sigma_inv * centered;
          const double total = sigma.dot(v);
          Vector out(mu.size());
          for (Eigen::Index j = 0; j < mu.size(); ++j) out[j] = (u - (total - sigma[j] * v[j])) / sigma[j];
          return out;
        };
      },
      desc);
}

namespace {

Vector json_vector(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

LinkSpec builtin_link_from_descriptor(const nlohmann::json& descriptor) {
  const std::string kind = descriptor.at("kind").get<std::string>();
  if (kind == "index") {
    std::vector<LinkComponent> comps;
    for (const auto& c : descriptor.at("components")) {
      LinkComponent comp;
      for (const auto& t : c) comp.push_back({t.at("fn").get<std::string>(), t.at("coef").get<double>()});
      comps.push_back(std::move(comp));
    }
    return index_links(comps);
  }
  if (kind == "lfr_reducing") {
    const Vector mu = json_vector(descriptor.at("mu"));
    const Vector sigma = json_vector(descriptor.at("sigma"));
    const auto rows = descriptor.at("sigma_inv").get<std::vector<std::vector<double>>>();
    Matrix sigma_inv(mu.size(), mu.size());
    if (static_cast<Eigen::Index>(rows.size()) != mu.size()) throw DimensionError("lfr_reducing descriptor: bad sigma_inv");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != mu.size()) throw DimensionError("lfr_reducing descriptor: bad sigma_inv row");
      for (std::size_t k = 0; k < rows[i].size(); ++k) sigma_inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    return lfr_reducing_links(mu, sigma_inv, sigma);
  }
  throw SpecMismatch("link descriptor kind '" + kind + "' is not a builtin");
}

}  // namespace frechet
