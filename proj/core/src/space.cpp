#include "frechet/space.hpp"

#include <cmath>

#include "frechet/errors.hpp"

namespace frechet {

std::string_view to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::wasserstein: return "wasserstein";
    case SpaceKind::spd_frobenius: return "spd_frobenius";
    case SpaceKind::spd_cholesky: return "spd_cholesky";
  }
  return "unknown";
}

SpaceKind space_kind_from_string(std::string_view name) {
  if (name == "wasserstein") return SpaceKind::wasserstein;
  if (name == "spd_frobenius") return SpaceKind::spd_frobenius;
  if (name == "spd_cholesky") return SpaceKind::spd_cholesky;
  throw ValidationError("unknown space kind '" + std::string(name) + "'");
}

void SpaceSpec::validate() const {
  if (dims < 2) throw ValidationError("space dims must be >= 2");
  if (!(eps > 0.0)) throw ValidationError("space eps must be > 0");
}

Vector quantile_grid(int m) {
  if (m < 1) throw DimensionError("quantile_grid: m must be positive");
  Vector t(m);
  for (int i = 0; i < m; ++i) t[i] = (2.0 * (i + 1) - 1.0) / (2.0 * m);
  return t;
}

QuantileFunction::QuantileFunction(Vector values) : values_(std::move(values)) {
  if (values_.size() < 2) throw DimensionError("QuantileFunction: grid size must be >= 2");
  if (!values_.allFinite()) throw BadData("QuantileFunction: non-finite value");
  for (Eigen::Index i = 0; i + 1 < values_.size(); ++i) {
    if (values_[i] > values_[i + 1]) throw NotMonotone("QuantileFunction: values must be nondecreasing");
  }
}

SpdMatrix::SpdMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
    throw DimensionError("SpdMatrix: matrix must be square and non-empty");
  }
  if (!entries_.allFinite()) throw BadData("SpdMatrix: non-finite entry");
  const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
  if (asymmetry(entries_) > 1e-12 * scale) throw NotSymmetric("SpdMatrix: matrix not symmetric");
  entries_ = (0.5 * (entries_ + entries_.transpose())).eval();
  Eigen::LLT<Matrix> llt(entries_);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("SpdMatrix: matrix not positive definite");
  factor_ = llt.matrixU();
}

SpdMatrix SpdMatrix::from_factor(Matrix factor) {
  if (factor.rows() != factor.cols() || factor.rows() < 1) {
    throw DimensionError("SpdMatrix: factor must be square and non-empty");
  }
  if (!factor.allFinite()) throw BadData("SpdMatrix: non-finite factor entry");
  if (!factor.triangularView<Eigen::StrictlyLower>().toDenseMatrix().isZero(0.0)) {
    throw SpecMismatch("SpdMatrix: factor must be upper triangular");
  }
  if ((factor.diagonal().array() <= 0.0).any()) throw NotPositiveDefinite("SpdMatrix: factor diagonal must be positive");
  SpdMatrix out;
  const Matrix a = factor.transpose() * factor;
  out.entries_ = 0.5 * (a + a.transpose());
  out.factor_ = std::move(factor);
  return out;
}

void check_member(const SpaceSpec& space, const MetricObject& object) {
  if (space.kind == SpaceKind::wasserstein) {
    const auto* q = std::get_if<QuantileFunction>(&object);
    if (!q) throw SpecMismatch("expected a quantile function for the wasserstein space");
    if (q->grid_size() != space.dims) throw DimensionError("quantile grid size differs from space dims");
  } else {
    const auto* s = std::get_if<SpdMatrix>(&object);
    if (!s) throw SpecMismatch("expected an SPD matrix for an spd space");
    if (s->dim() != space.dims) throw DimensionError("matrix dimension differs from space dims");
  }
}

namespace coords {

int size(const SpaceSpec& space) {
  return space.kind == SpaceKind::wasserstein ? space.dims : space.dims * space.dims;
}

Vector from_object(const SpaceSpec& space, const MetricObject& object) {
  check_member(space, object);
  switch (space.kind) {
    case SpaceKind::wasserstein: return std::get<QuantileFunction>(object).values();
    case SpaceKind::spd_frobenius: return std::get<SpdMatrix>(object).entries().reshaped();
    case SpaceKind::spd_cholesky: return std::get<SpdMatrix>(object).factor().reshaped();
  }
  return {};
}

Vector from_raw(const SpaceSpec& space, const RawObject& raw) {
  if (raw.kind != space.kind) throw SpecMismatch("raw object kind differs from space kind");
  const Eigen::Index rows = space.kind == SpaceKind::wasserstein ? space.dims : space.dims;
  const Eigen::Index cols = space.kind == SpaceKind::wasserstein ? 1 : space.dims;
  if (raw.data.rows() != rows || raw.data.cols() != cols) throw DimensionError("raw object has wrong shape");
  if (space.kind == SpaceKind::spd_cholesky) {
    Matrix upper = raw.data.triangularView<Eigen::Upper>();
    return upper.reshaped();
  }
  return raw.data.reshaped();
}

RawObject to_raw(const SpaceSpec& space, const Vector& c) {
  if (c.size() != size(space)) throw DimensionError("coordinate vector has wrong length");
  if (space.kind == SpaceKind::wasserstein) return {space.kind, c};
  return {space.kind, c.reshaped(space.dims, space.dims)};
}

void project(const SpaceSpec& space, Eigen::Ref<Vector> c) {
  switch (space.kind) {
    case SpaceKind::wasserstein: {
      bool monotone = true;
      for (Eigen::Index i = 0; i + 1 < c.size(); ++i) {
        if (c[i] > c[i + 1]) {
          monotone = false;
          break;
        }
      }
      if (!monotone) c = isotonic_regression(c);
      return;
    }
    case SpaceKind::spd_frobenius: {
      Eigen::Map<Matrix> a(c.data(), space.dims, space.dims);
      Matrix sym = 0.5 * (a + a.transpose());
      // Fast path: A - eps I positive definite means every eigenvalue exceeds eps.
      Matrix shifted = sym;
      shifted.diagonal().array() -= space.eps;
      if (Eigen::LLT<Matrix>(shifted).info() == Eigen::Success) {
        a = sym;
        return;
      }
      a = sym_eig_clip(sym, space.eps);
      return;
    }
    case SpaceKind::spd_cholesky: {
      Eigen::Map<Matrix> r(c.data(), space.dims, space.dims);
      r.triangularView<Eigen::StrictlyLower>().setZero();
      r.diagonal() = r.diagonal().cwiseMax(space.eps);
      return;
    }
  }
}

MetricObject to_object(const SpaceSpec& space, const Vector& feasible) {
  switch (space.kind) {
    case SpaceKind::wasserstein: return QuantileFunction(feasible);
    case SpaceKind::spd_frobenius: return SpdMatrix(feasible.reshaped(space.dims, space.dims));
    case SpaceKind::spd_cholesky: return SpdMatrix::from_factor(feasible.reshaped(space.dims, space.dims));
  }
  throw SpecMismatch("unknown space kind");
}

double squared_distance(const SpaceSpec& space, const Eigen::Ref<const Vector>& a,
                        const Eigen::Ref<const Vector>& b) {
  const double ss = (a - b).squaredNorm();
  return space.kind == SpaceKind::wasserstein ? ss / static_cast<double>(space.dims) : ss;
}

}  // namespace coords

double distance(const SpaceSpec& space, const MetricObject& a, const MetricObject& b) {
  const Vector ca = coords::from_object(space, a);
  const Vector cb = coords::from_object(space, b);
  return std::sqrt(coords::squared_distance(space, ca, cb));
}

RawObject as_raw(const SpaceSpec& space, const MetricObject& object) {
  return coords::to_raw(space, coords::from_object(space, object));
}

double raw_distance(const SpaceSpec& space, const RawObject& a, const RawObject& b) {
  return std::sqrt(coords::squared_distance(space, coords::from_raw(space, a), coords::from_raw(space, b)));
}

RawObject combine(const SpaceSpec& space, const Vector& coefficients, const std::vector<MetricObject>& objects) {
  if (objects.empty()) throw EmptyInput("combine: no objects");
  if (coefficients.size() != static_cast<Eigen::Index>(objects.size())) {
    throw DimensionError("combine: coefficient and object counts differ");
  }
  Vector acc = Vector::Zero(coords::size(space));
  for (std::size_t i = 0; i < objects.size(); ++i) {
    acc += coefficients[static_cast<Eigen::Index>(i)] * coords::from_object(space, objects[i]);
  }
  return coords::to_raw(space, acc);
}

MetricObject project(const SpaceSpec& space, const RawObject& raw) {
  Vector c = coords::from_raw(space, raw);
  coords::project(space, c);
  return coords::to_object(space, c);
}

MetricObject weighted_frechet_mean(const SpaceSpec& space, const std::vector<MetricObject>& objects,
                                   const Vector& weights) {
  if (objects.empty()) throw EmptyInput("weighted_frechet_mean: no objects");
  if (weights.size() != static_cast<Eigen::Index>(objects.size())) {
    throw DimensionError("weighted_frechet_mean: weight and object counts differ");
  }
  const double total = weights.sum();
  if (!(total > 0.0)) {
    throw IllPosedObjective("weighted_frechet_mean: total weight must be positive");
  }
  return project(space, combine(space, weights / total, objects));
}

}  // namespace frechet
