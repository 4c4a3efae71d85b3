#pragma once

#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "frechet/estimators.hpp"

namespace frechet {

/// Delimited life-table layout: a header row, then one row per unit. Header
/// cells of the form "[a,b)" are age bins holding death counts; a column
/// named "id" is a unit label; every other column is a numeric covariate.
struct LifeTableOptions {
  int grid_size = 20;
  bool standardize = false;  // center and scale covariates (1/n variance)
  char delimiter = ',';
};

struct LifeTable {
  Dataset data;
  std::vector<std::string> ids;
  std::vector<std::string> covariate_names;
  std::vector<std::pair<double, double>> bins;
  Vector covariate_center;  // zero / one when not standardized
  Vector covariate_scale;
};

/// Quantiles at probabilities t of the binned distribution with `counts`
/// spread uniformly inside each bin.
Vector binned_quantiles(const std::vector<std::pair<double, double>>& bins, const Vector& counts, const Vector& t);

LifeTable parse_life_table(std::istream& in, const LifeTableOptions& options = {});
LifeTable ingest_life_table(const std::string& path, const LifeTableOptions& options = {});

/// Numeric covariate table: header row, optional "id" column.
struct CovariateTable {
  Matrix X;
  std::vector<std::string> ids;  // empty without an id column
  std::vector<std::string> names;
};
CovariateTable read_covariate_table(const std::string& path, char delimiter = ',');

/// Splits one delimited line, honoring double quotes; cells are trimmed.
std::vector<std::string> split_delimited(const std::string& line, char delimiter);

}  // namespace frechet
