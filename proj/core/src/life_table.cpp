#include "frechet/life_table.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>
#include <regex>

#include "frechet/errors.hpp"

namespace frechet {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::optional<std::pair<double, double>> parse_bin(const std::string& cell) {
  static const std::regex pattern(R"(^\[\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\)$)");
  std::smatch m;
  if (!std::regex_match(cell, m, pattern)) return std::nullopt;
  try {
    return std::make_pair(std::stod(m[1].str()), std::stod(m[2].str()));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size() || !std::isfinite(v)) {
    throw DataError("row " + std::to_string(row) + ": column '" + column + "' is not a finite number ('" + cell + "')");
  }
  return v;
}

bool is_id_column(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower == "id";
}

}  // namespace

std::vector<std::string> split_delimited(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '"') {
      if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else {
        quoted = !quoted;
      }
    } else if (c == delimiter && !quoted) {
      cells.push_back(trim(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

Vector binned_quantiles(const std::vector<std::pair<double, double>>& bins, const Vector& counts, const Vector& t) {
  if (bins.empty()) throw EmptyInput("no bins");
  if (counts.size() != static_cast<Eigen::Index>(bins.size())) throw DimensionError("bin and count sizes differ");
  const double total = counts.sum();
  if (!(total > 0.0)) throw DataError("no positive counts");
  Vector out(t.size());
  for (Eigen::Index q = 0; q < t.size(); ++q) {
    const double target = t[q] * total;
    double cum = 0.0;
    out[q] = bins.back().second;
    for (Eigen::Index k = 0; k < counts.size(); ++k) {
      if (counts[k] <= 0.0) continue;
      if (cum + counts[k] >= target) {
        const auto [a, b] = bins[static_cast<std::size_t>(k)];
        out[q] = a + (target - cum) / counts[k] * (b - a);
        break;
      }
      cum += counts[k];
    }
  }
  return out;
}

LifeTable parse_life_table(std::istream& in, const LifeTableOptions& options) {
  if (options.grid_size < 2) throw ValidationError("grid_size must be at least 2");
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty life table (no header)");
  const std::vector<std::string> header = split_delimited(line, options.delimiter);

  LifeTable out;
  std::vector<std::size_t> bin_cols, cov_cols;
  std::optional<std::size_t> id_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (auto bin = parse_bin(header[c])) {
      if (!(bin->second > bin->first)) throw DataError("bin '" + header[c] + "' must have b > a");
      out.bins.push_back(*bin);
      bin_cols.push_back(c);
    } else if (is_id_column(header[c])) {
      if (id_col) throw DataError("header declares more than one id column");
      id_col = c;
    } else {
      if (header[c].empty()) throw DataError("header cell " + std::to_string(c + 1) + " is empty");
      out.covariate_names.push_back(header[c]);
      cov_cols.push_back(c);
    }
  }
  if (bin_cols.empty()) throw DataError("header declares no age bins of the form [a,b)");
  if (cov_cols.empty()) throw DataError("header declares no covariate columns");
  // Bins are processed in increasing order and may not overlap.
  std::vector<std::size_t> order(out.bins.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return out.bins[a].first < out.bins[b].first; });
  std::vector<std::pair<double, double>> sorted_bins;
  std::vector<std::size_t> sorted_cols;
  for (std::size_t i : order) {
    if (!sorted_bins.empty() && out.bins[i].first < sorted_bins.back().second) {
      throw DataError("age bins overlap");
    }
    sorted_bins.push_back(out.bins[i]);
    sorted_cols.push_back(bin_cols[i]);
  }
  out.bins = sorted_bins;

  const Vector t = quantile_grid(options.grid_size);
  std::vector<Vector> covs;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::vector<std::string> cells = split_delimited(line, options.delimiter);
    const bool blank = std::all_of(cells.begin(), cells.end(), [](const std::string& c) { return c.empty(); });
    if (blank) throw DataError("row " + std::to_string(row) + ": empty row");
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " cells, found " +
                      std::to_string(cells.size()));
    }
    Vector counts(static_cast<Eigen::Index>(sorted_cols.size()));
    for (std::size_t k = 0; k < sorted_cols.size(); ++k) {
      const double v = parse_number(cells[sorted_cols[k]], row, header[sorted_cols[k]]);
      if (v < 0.0) throw DataError("row " + std::to_string(row) + ": negative count in bin '" + header[sorted_cols[k]] + "'");
      counts[static_cast<Eigen::Index>(k)] = v;
    }
    if (!(counts.sum() > 0.0)) throw DataError("row " + std::to_string(row) + ": empty row (all counts zero)");
    Vector x(static_cast<Eigen::Index>(cov_cols.size()));
    for (std::size_t k = 0; k < cov_cols.size(); ++k) {
      x[static_cast<Eigen::Index>(k)] = parse_number(cells[cov_cols[k]], row, header[cov_cols[k]]);
    }
    covs.push_back(x);
    out.ids.push_back(id_col ? cells[*id_col] : std::to_string(row));
    out.data.Y.push_back(QuantileFunction(binned_quantiles(out.bins, counts, t)));
  }
  if (covs.size() < 2) throw DataError("life table needs at least 2 data rows");

  const auto n = static_cast<Eigen::Index>(covs.size());
  const auto p = static_cast<Eigen::Index>(cov_cols.size());
  Matrix X(n, p);
  for (Eigen::Index i = 0; i < n; ++i) X.row(i) = covs[static_cast<std::size_t>(i)].transpose();
  out.covariate_center = Vector::Zero(p);
  out.covariate_scale = Vector::Ones(p);
  if (options.standardize) {
    out.covariate_center = X.colwise().mean().transpose();
    const Matrix centered = X.rowwise() - out.covariate_center.transpose();
    for (Eigen::Index j = 0; j < p; ++j) {
      const double sd = std::sqrt(centered.col(j).squaredNorm() / static_cast<double>(n));
      if (!(sd > 0.0)) throw DataError("covariate '" + out.covariate_names[static_cast<std::size_t>(j)] + "' is constant");
      out.covariate_scale[j] = sd;
    }
    X = centered.array().rowwise() / out.covariate_scale.transpose().array();
  }
  out.data.X = X;
  out.data.space = SpaceSpec{SpaceKind::wasserstein, options.grid_size, kDefaultSpdEps};
  out.data.validate();
  return out;
}

LifeTable ingest_life_table(const std::string& path, const LifeTableOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read life table '" + path + "'");
  return parse_life_table(in, options);
}

CovariateTable read_covariate_table(const std::string& path, char delimiter) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read covariates '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty covariate file (no header)");
  const std::vector<std::string> header = split_delimited(line, delimiter);
  CovariateTable out;
  std::optional<std::size_t> id_col;
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (is_id_column(header[c])) {
      id_col = c;
    } else {
      out.names.push_back(header[c]);
      cols.push_back(c);
    }
  }
  if (cols.empty()) throw DataError("covariate file has no covariate columns");
  std::vector<Vector> rows;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::vector<std::string> cells = split_delimited(line, delimiter);
    if (std::all_of(cells.begin(), cells.end(), [](const std::string& c) { return c.empty(); })) {
      throw DataError("row " + std::to_string(row) + ": empty row");
    }
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) + " cells");
    }
    Vector x(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) x[static_cast<Eigen::Index>(k)] = parse_number(cells[cols[k]], row, header[cols[k]]);
    rows.push_back(x);
    if (id_col) out.ids.push_back(cells[*id_col]);
  }
  if (rows.empty()) throw DataError("covariate file has no data rows");
  out.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out.X.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return out;
}

}  // namespace frechet
