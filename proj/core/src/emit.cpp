#include "frechet/emit.hpp"

#include <cerrno>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "frechet/errors.hpp"
#include "frechet/model_io.hpp"

namespace frechet {

namespace {

using nlohmann::json;

std::string num(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.8g", v);
  return buf;
}

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_header(const json& provenance, const RunInfo& info) {
  std::ostringstream out;
  out << "# frechet " << kLibraryVersion << " seed=" << provenance.value("seed", json(nullptr)).dump()
      << " config_hash=" << provenance.value("config_hash", std::string()) << "\n";
  out << "# config=" << provenance.value("config", json(nullptr)).dump() << "\n";
  const json overrides = provenance.value("overrides", json::array());
  if (!overrides.empty()) out << "# overrides=" << overrides.dump() << "\n";
  out << "# run_info timestamp=" << info.timestamp << " wall_seconds=" << num(info.wall_seconds) << "\n";
  return out.str();
}

json summary_json(const MetricSummary& s) {
  return {{"mean", s.mean}, {"sd", s.sd}, {"se", s.se}, {"count", s.count}};
}

std::vector<std::string> object_columns(const SpaceSpec& space) {
  std::vector<std::string> cols;
  if (space.kind == SpaceKind::wasserstein) {
    for (int i = 1; i <= space.dims; ++i) cols.push_back("q" + std::to_string(i));
  } else {
    for (int i = 1; i <= space.dims; ++i) {
      for (int j = 1; j <= space.dims; ++j) cols.push_back("y_" + std::to_string(i) + "_" + std::to_string(j));
    }
  }
  return cols;
}

std::vector<double> object_values(const MetricObject& obj) {
  if (const auto* q = std::get_if<QuantileFunction>(&obj)) {
    return std::vector<double>(q->values().data(), q->values().data() + q->values().size());
  }
  const Matrix& a = std::get<SpdMatrix>(obj).entries();
  std::vector<double> out;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.push_back(a(i, j));
  }
  return out;
}

}  // namespace

RunInfo RunInfo::now(double wall_seconds) {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return {buf, wall_seconds};
}

std::string json_with_run_info(json body, const RunInfo& info) {
  body.erase("run_info");
  const json run_info = {{"timestamp", info.timestamp}, {"wall_seconds", info.wall_seconds}};
  std::string text = body.dump(2);
  // body.dump(2) starts with "{\n"; the run_info member goes right after it.
  const std::string member = "  \"run_info\": " + run_info.dump() + (body.empty() ? "\n" : ",\n");
  if (body.empty()) return "{\n" + member + "}\n";
  return text.substr(0, 2) + member + text.substr(2) + "\n";
}

std::string results_csv(const std::vector<ExperimentResult>& results, const json& provenance, const RunInfo& info) {
  std::ostringstream out;
  out << csv_header(provenance, info);
  out << "model,method,n,p,metric,MSE_Y,se_Y,MSE_m,se_m,sd_Y,sd_m,ASE_beta,replications,failures,status\n";
  for (const auto& r : results) {
    for (const auto& m : r.methods) {
      auto row = [&](const std::string& metric, const MetricSummary* y, const MetricSummary* mm, bool with_ase) {
        out << to_string(r.spec.model) << ',' << to_string(m.method) << ',' << r.spec.n << ',' << r.spec.p << ','
            << metric << ',';
        if (!m.present) {
          out << ",,,,,,," << r.replications << ",0,absent\n";
          return;
        }
        out << num(y->mean) << ',' << num(y->se) << ',' << num(mm->mean) << ',' << num(mm->se) << ',' << num(y->sd)
            << ',' << num(mm->sd) << ',' << (with_ase && m.ase_beta ? num(*m.ase_beta) : std::string()) << ','
            << r.replications << ',' << m.failures << ',' << (m.failures ? "partial" : "ok") << '\n';
      };
      row(r.metric, &m.mse_y, &m.mse_m, true);
      if (!r.alt_metric.empty()) {
        row(r.alt_metric, m.mse_y_alt ? &*m.mse_y_alt : nullptr, m.mse_m_alt ? &*m.mse_m_alt : nullptr, false);
      }
    }
  }
  return out.str();
}

std::string results_json(const std::vector<ExperimentResult>& results, const json& provenance, const RunInfo& info) {
  json list = json::array();
  for (const auto& r : results) {
    json methods = json::array();
    for (const auto& m : r.methods) {
      json mj = {{"method", std::string(to_string(m.method))}, {"present", m.present}};
      if (m.present) {
        mj["MSE_Y"] = summary_json(m.mse_y);
        mj["MSE_m"] = summary_json(m.mse_m);
        if (m.mse_y_alt) mj["MSE_Y_alt"] = summary_json(*m.mse_y_alt);
        if (m.mse_m_alt) mj["MSE_m_alt"] = summary_json(*m.mse_m_alt);
        mj["ASE_beta"] = m.ase_beta ? json(*m.ase_beta) : json(nullptr);
        mj["failures"] = m.failures;
        json errors = json::array();
        for (std::size_t i = 0; i < m.replications.size(); ++i) {
          if (!m.replications[i].ok) errors.push_back({{"replication", i}, {"error", m.replications[i].error}});
        }
        mj["failed_replications"] = errors;
      }
      methods.push_back(std::move(mj));
    }
    json spec = r.spec.to_json();
    list.push_back({{"spec", spec},
                    {"replications", r.replications},
                    {"metric", r.metric},
                    {"alt_metric", r.alt_metric},
                    {"methods", methods}});
  }
  json body = {{"provenance", provenance}, {"version", kLibraryVersion}, {"results", list}};
  return json_with_run_info(std::move(body), info);
}

std::string predictions_csv(const Matrix& X, const std::vector<MetricObject>& predictions, const SpaceSpec& space,
                            const json& provenance, const RunInfo& info, const std::vector<std::string>& ids) {
  if (static_cast<std::size_t>(X.rows()) != predictions.size()) throw DimensionError("covariate and prediction counts differ");
  if (!ids.empty() && ids.size() != predictions.size()) throw DimensionError("id and prediction counts differ");
  std::ostringstream out;
  out << csv_header(provenance, info);
  std::vector<std::string> cols;
  if (!ids.empty()) cols.push_back("id");
  for (Eigen::Index j = 0; j < X.cols(); ++j) cols.push_back("x" + std::to_string(j + 1));
  for (auto& c : object_columns(space)) cols.push_back(c);
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    bool first = true;
    auto put = [&](const std::string& s) {
      out << (first ? "" : ",") << s;
      first = false;
    };
    if (!ids.empty()) put(ids[i]);
    for (Eigen::Index j = 0; j < X.cols(); ++j) put(full(X(static_cast<Eigen::Index>(i), j)));
    for (double v : object_values(predictions[i])) put(full(v));
    out << '\n';
  }
  return out.str();
}

std::string predictions_json(const Matrix& X, const std::vector<MetricObject>& predictions, const SpaceSpec& space,
                             const json& provenance, const RunInfo& info, const std::vector<std::string>& ids) {
  if (static_cast<std::size_t>(X.rows()) != predictions.size()) throw DimensionError("covariate and prediction counts differ");
  json rows = json::array();
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto x = X.row(static_cast<Eigen::Index>(i));
    json row = {{"x", std::vector<double>(x.begin(), x.end())}, {"value", object_values(predictions[i])}};
    if (!ids.empty()) row["id"] = ids.at(i);
    rows.push_back(std::move(row));
  }
  json body = {{"provenance", provenance},
               {"version", kLibraryVersion},
               {"space", {{"kind", std::string(to_string(space.kind))}, {"dims", space.dims}}},
               {"predictions", rows}};
  return json_with_run_info(std::move(body), info);
}

std::string model_document(const FittedModel& model, const json& provenance, const RunInfo& info) {
  json body = model_to_json(model);
  body["provenance"] = provenance;
  return json_with_run_info(std::move(body), info);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing: " + std::strerror(errno));
  out << text;
  out.close();
  if (!out) throw Error("failed writing '" + path + "': " + std::strerror(errno));
}

}  // namespace frechet
