#pragma once

#include <optional>

#include <Eigen/Dense>

namespace frechet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Weighted least-squares projection onto nondecreasing vectors
/// (pool-adjacent-violators). Equal weights when `weights` is absent.
Vector isotonic_regression(const Vector& values,
                           const std::optional<Vector>& weights = std::nullopt);

/// Frobenius projection of a symmetric matrix onto {eigenvalues >= eps}.
/// Throws NotSymmetric when max |A - A^T| exceeds 1e-10 (scaled by max |A|).
Matrix sym_eig_clip(const Matrix& matrix, double eps);

/// Upper-triangular R with positive diagonal and R^T R = matrix.
Matrix cholesky_factor(const Matrix& matrix);

/// (A + lambda I)^{-1} with lambda = 1e-10 * trace(A) / p, or 1e-10 when the
/// trace vanishes. Always finite for symmetric PSD input.
Matrix spd_inverse_ridge(const Matrix& matrix);

/// Largest absolute asymmetry max |A_ij - A_ji|.
double asymmetry(const Matrix& matrix);

}  // namespace frechet
