#include "frechet/model_io.hpp"

#include <cmath>
#include <limits>

#include "frechet/errors.hpp"
#include "frechet/simgen.hpp"

namespace frechet {

namespace {

using nlohmann::json;

json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix json_mat(const json& j, Eigen::Index cols_if_empty) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) return Matrix(0, cols_if_empty);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw SpecMismatch("ragged matrix in model document");
    for (std::size_t k = 0; k < rows[i].size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return m;
}

}  // namespace

LinkSpec link_from_descriptor(const json& descriptor) {
  const std::string kind = descriptor.value("kind", std::string());
  if (kind == "derived" || kind == "derived_sample") return derived_link_from_descriptor(descriptor);
  return builtin_link_from_descriptor(descriptor);
}

json model_to_json(const FittedModel& model) {
  json doc;
  doc["format"] = "frechet-model";
  doc["version"] = kModelFormatVersion;
  doc["space"] = {{"kind", std::string(to_string(model.space.kind))}, {"dims", model.space.dims}, {"eps", model.space.eps}};
  json flavor = {{"name", std::string(flavor_name(model.flavor))}};
  if (const auto* nl = std::get_if<NonlinearFlavor>(&model.flavor)) flavor["beta"] = vec_json(nl->beta);
  if (const auto* sep = std::get_if<SeparableFlavor>(&model.flavor)) {
    flavor["c_h"] = sep->c_h;
    flavor["h"] = std::string(to_string(sep->h));
  }
  doc["flavor"] = flavor;
  if (model.links) {
    if (!model.links->serializable()) throw SpecMismatch("model links carry no descriptor and cannot be saved");
    doc["links"] = model.links->descriptor();
  } else {
    doc["links"] = nullptr;
  }
  const MomentEstimates& m = model.moments;
  json moments = {{"mu_hat", vec_json(m.mu_hat)},
                  {"sigma_mat_hat", mat_json(m.sigma_mat_hat)},
                  {"sigma_mat_inv", mat_json(m.sigma_mat_inv)},
                  {"beta0_coords", vec_json(m.beta0_coords)},
                  {"sigma_obj_coords", mat_json(m.sigma_obj_coords)}};
  moments["sigma_h_hat"] = m.sigma_h_hat ? vec_json(*m.sigma_h_hat) : json(nullptr);
  doc["moments"] = moments;
  const double obj = model.diagnostics.objective;
  doc["diagnostics"] = {{"objective", std::isfinite(obj) ? json(obj) : json(nullptr)},
                        {"status", model.diagnostics.status},
                        {"converged", model.diagnostics.converged},
                        {"flat", model.diagnostics.flat},
                        {"evaluations", model.diagnostics.evaluations}};
  return doc;
}

FittedModel model_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "frechet-model") throw SpecMismatch("not a model document");
    if (doc.at("version").get<int>() != kModelFormatVersion) throw SpecMismatch("unsupported model document version");
    FittedModel model;
    const json& sp = doc.at("space");
    model.space.kind = space_kind_from_string(sp.at("kind").get<std::string>());
    model.space.dims = sp.at("dims").get<int>();
    model.space.eps = sp.at("eps").get<double>();
    model.space.validate();

    const json& mj = doc.at("moments");
    MomentEstimates& m = model.moments;
    m.mu_hat = json_vec(mj.at("mu_hat"));
    const Eigen::Index p = m.mu_hat.size();
    m.sigma_mat_hat = json_mat(mj.at("sigma_mat_hat"), p);
    m.sigma_mat_inv = json_mat(mj.at("sigma_mat_inv"), p);
    m.beta0_coords = json_vec(mj.at("beta0_coords"));
    m.sigma_obj_coords = json_mat(mj.at("sigma_obj_coords"), p);
    if (!mj.at("sigma_h_hat").is_null()) m.sigma_h_hat = json_vec(mj.at("sigma_h_hat"));
    const Eigen::Index D = coords::size(model.space);
    if (m.sigma_mat_hat.rows() != p || m.sigma_mat_hat.cols() != p || m.sigma_mat_inv.rows() != p ||
        m.sigma_mat_inv.cols() != p || m.beta0_coords.size() != D || m.sigma_obj_coords.rows() != D ||
        m.sigma_obj_coords.cols() != p || (m.sigma_h_hat && m.sigma_h_hat->size() != p)) {
      throw DimensionError("model document moments have inconsistent shapes");
    }

    const json& fl = doc.at("flavor");
    const std::string name = fl.at("name").get<std::string>();
    if (name == "linear") {
      model.flavor = LinearFlavor{};
    } else if (name == "nonlinear") {
      model.flavor = NonlinearFlavor{json_vec(fl.at("beta"))};
    } else if (name == "separable") {
      model.flavor = SeparableFlavor{fl.at("c_h").get<double>(), h_transform_from_string(fl.at("h").get<std::string>())};
    } else {
      throw SpecMismatch("unknown flavor '" + name + "'");
    }
    if (!doc.at("links").is_null()) model.links = link_from_descriptor(doc.at("links"));
    if (!std::holds_alternative<LinearFlavor>(model.flavor) && !model.links) {
      throw SpecMismatch("nonlinear model document without links");
    }
    if (model.links && model.links->p() != p) throw DimensionError("link count differs from covariate dimension");
    if (model.links) (void)effective_beta(*model.links, model.flavor, model.moments.separable());

    if (doc.contains("diagnostics")) {
      const json& d = doc["diagnostics"];
      const json& obj = d.contains("objective") ? d["objective"] : json(nullptr);
      model.diagnostics.objective = obj.is_number() ? obj.get<double>() : std::numeric_limits<double>::quiet_NaN();
      model.diagnostics.status = d.value("status", std::string("ok"));
      model.diagnostics.converged = d.value("converged", true);
      model.diagnostics.flat = d.value("flat", false);
      model.diagnostics.evaluations = d.value("evaluations", 0);
    }
    return model;
  } catch (const json::exception& e) {
    throw SpecMismatch(std::string("malformed model document: ") + e.what());
  }
}

}  // namespace frechet
