#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "frechet/numeric.hpp"

namespace frechet {

enum class SpaceKind { wasserstein, spd_frobenius, spd_cholesky };

std::string_view to_string(SpaceKind kind);
SpaceKind space_kind_from_string(std::string_view name);

inline constexpr double kDefaultSpdEps = 1e-8;

/// Metric space descriptor: kind, grid size (wasserstein) or matrix dimension
/// (spd_*), and the projection epsilon for the SPD spaces.
struct SpaceSpec {
  SpaceKind kind = SpaceKind::wasserstein;
  int dims = 20;
  double eps = kDefaultSpdEps;

  void validate() const;
  bool is_spd() const { return kind != SpaceKind::wasserstein; }
  bool operator==(const SpaceSpec&) const = default;
};

/// Midpoint probability grid t_i = (2i - 1) / (2m), i = 1..m.
Vector quantile_grid(int m);

/// A distribution, stored as its quantile function on the midpoint grid.
class QuantileFunction {
 public:
  explicit QuantileFunction(Vector values);
  const Vector& values() const { return values_; }
  int grid_size() const { return static_cast<int>(values_.size()); }

 private:
  Vector values_;
};

/// Symmetric positive-definite matrix, stored with its upper Cholesky factor.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix entries);
  /// R^T R for an upper-triangular R with positive diagonal. The factor is
  /// kept as given, so nearly singular products stay representable.
  static SpdMatrix from_factor(Matrix factor);

  const Matrix& entries() const { return entries_; }
  const Matrix& factor() const { return factor_; }
  int dim() const { return static_cast<int>(entries_.rows()); }

 private:
  SpdMatrix() = default;
  Matrix entries_;
  Matrix factor_;
};

using MetricObject = std::variant<QuantileFunction, SpdMatrix>;

/// Pre-projection intermediate in the space's linear coordinates: a value
/// vector (m x 1) for wasserstein, a symmetric matrix for spd_frobenius and an
/// upper-triangular Cholesky-factor matrix for spd_cholesky. No feasibility
/// invariant.
struct RawObject {
  SpaceKind kind = SpaceKind::wasserstein;
  Matrix data;
};

// Metric operations.
double distance(const SpaceSpec& space, const MetricObject& a, const MetricObject& b);
RawObject combine(const SpaceSpec& space, const Vector& coefficients, const std::vector<MetricObject>& objects);
MetricObject project(const SpaceSpec& space, const RawObject& raw);
RawObject as_raw(const SpaceSpec& space, const MetricObject& object);
/// Flat (ambient) distance between two raw objects of the same space.
double raw_distance(const SpaceSpec& space, const RawObject& a, const RawObject& b);
MetricObject weighted_frechet_mean(const SpaceSpec& space, const std::vector<MetricObject>& objects,
                                   const Vector& weights);

/// Throws SpecMismatch / DimensionError when `object` does not belong to `space`.
void check_member(const SpaceSpec& space, const MetricObject& object);

// Flattened Hilbert coordinates. All three spaces embed isometrically (up to
// the 1/m grid factor of wasserstein) into R^D; estimators work on these.
namespace coords {

int size(const SpaceSpec& space);
Vector from_object(const SpaceSpec& space, const MetricObject& object);
Vector from_raw(const SpaceSpec& space, const RawObject& raw);
RawObject to_raw(const SpaceSpec& space, const Vector& c);
/// Projects coordinates onto the feasible set (in place).
void project(const SpaceSpec& space, Eigen::Ref<Vector> c);
MetricObject to_object(const SpaceSpec& space, const Vector& feasible);
double squared_distance(const SpaceSpec& space, const Eigen::Ref<const Vector>& a,
                        const Eigen::Ref<const Vector>& b);

}  // namespace coords

}  // namespace frechet
