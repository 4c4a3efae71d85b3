#include "frechet/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "frechet/errors.hpp"

namespace frechet {

Vector isotonic_regression(const Vector& values, const std::optional<Vector>& weights) {
  const Eigen::Index n = values.size();
  if (n == 0) throw EmptyInput("isotonic_regression: empty input");
  if (weights) {
    if (weights->size() != n) throw DimensionError("isotonic_regression: weight length mismatch");
    if ((weights->array() <= 0.0).any()) throw BadData("isotonic_regression: weights must be positive");
  }

  struct Block {
    double mean;
    double weight;
    Eigen::Index count;
  };
  std::vector<Block> stack;
  stack.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Block b{values[i], weights ? (*weights)[i] : 1.0, 1};
    while (!stack.empty() && stack.back().mean > b.mean) {
      const Block& top = stack.back();
      const double w = top.weight + b.weight;
      b.mean = (top.weight * top.mean + b.weight * b.mean) / w;
      b.weight = w;
      b.count += top.count;
      stack.pop_back();
    }
    stack.push_back(b);
  }

  Vector out(n);
  Eigen::Index pos = 0;
  for (const Block& b : stack) {
    out.segment(pos, b.count).setConstant(b.mean);
    pos += b.count;
  }
  return out;
}

double asymmetry(const Matrix& matrix) {
  return (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
}

Matrix sym_eig_clip(const Matrix& matrix, double eps) {
  if (matrix.rows() != matrix.cols()) throw DimensionError("sym_eig_clip: matrix not square");
  if (matrix.size() == 0) throw EmptyInput("sym_eig_clip: empty matrix");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if (asymmetry(matrix) > 1e-10 * scale) throw NotSymmetric("sym_eig_clip: input not symmetric");

  const Matrix sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector& lambda = eig.eigenvalues();
  if (lambda.minCoeff() >= eps) return sym;
  const Vector clipped = lambda.cwiseMax(eps);
  Matrix out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Matrix cholesky_factor(const Matrix& matrix) {
  if (matrix.rows() != matrix.cols()) throw DimensionError("cholesky_factor: matrix not square");
  Eigen::LLT<Matrix> llt(matrix);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("cholesky_factor: matrix not positive definite");
  Matrix r = llt.matrixU();
  if ((r.diagonal().array() <= 0.0).any() || !r.allFinite()) {
    throw NotPositiveDefinite("cholesky_factor: non-positive pivot");
  }
  return r;
}

Matrix spd_inverse_ridge(const Matrix& matrix) {
  if (matrix.rows() != matrix.cols()) throw DimensionError("spd_inverse_ridge: matrix not square");
  const Eigen::Index p = matrix.rows();
  const double trace = matrix.trace();
  const double lambda = trace > 0.0 ? 1e-10 * trace / static_cast<double>(p) : 1e-10;
  Matrix shifted = 0.5 * (matrix + matrix.transpose());
  shifted.diagonal().array() += lambda;
  Matrix inv = shifted.ldlt().solve(Matrix::Identity(p, p));
  return 0.5 * (inv + inv.transpose());
}

}  // namespace frechet
