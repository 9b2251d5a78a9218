#pragma once

// Dense small-matrix primitives for non-degenerate Gaussian laws on R^N:
// SPD validation, Cholesky factors, matrix square roots and conditioning
// along the time index.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "aot/error.hpp"

namespace aot {

using Vec = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Relative symmetry tolerance (against the largest absolute entry).
inline constexpr double kSymTol = 1e-12;
/// Relative pivot / eigenvalue floor (against the largest diagonal entry).
inline constexpr double kPdTol = 1e-12;

namespace detail {

inline void require_finite(const Matrix& a, const char* context) {
  if (!a.allFinite()) fail(ErrorCode::NonFinite, std::string(context) + " has non-finite entries");
}

inline void require_finite(const Vec& v, const char* context) {
  if (!v.allFinite()) fail(ErrorCode::NonFinite, std::string(context) + " has non-finite entries");
}

inline void require_square(const Matrix& a, const char* context) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    fail(ErrorCode::DimensionMismatch, std::string(context) + " must be a non-empty square matrix, got " +
                                           std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

}  // namespace detail

/// Checks that `a` is square, finite and symmetric within kSymTol, then
/// returns (A + Aᵀ)/2.
inline Matrix symmetrized(const Matrix& a) {
  detail::require_square(a, "matrix");
  detail::require_finite(a, "matrix");
  const double scale = a.cwiseAbs().maxCoeff();
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymTol * scale) {
    detail::fail(ErrorCode::NotSymmetric,
                 "max |A - A^T| = " + std::to_string(asym) + " exceeds tolerance relative to max |A| = " +
                     std::to_string(scale));
  }
  return (a + a.transpose()) / 2.0;
}

/// Lower-triangular matrix with strictly positive diagonal.
class CholeskyFactor {
 public:
  /// Validates and wraps an existing factor. The strictly upper part must be
  /// exactly zero.
  static CholeskyFactor from_lower(Matrix lower) {
    detail::require_square(lower, "Cholesky factor");
    detail::require_finite(lower, "Cholesky factor");
    const Index n = lower.rows();
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < j; ++i) {
        if (lower(i, j) != 0.0) {
          detail::fail(ErrorCode::NotPositiveDefinite, "Cholesky factor is not lower triangular");
        }
      }
      if (!(lower(j, j) > 0.0)) {
        detail::fail(ErrorCode::NotPositiveDefinite,
                     "Cholesky factor diagonal entry " + std::to_string(j) + " is not positive");
      }
    }
    return CholeskyFactor(std::move(lower));
  }

  [[nodiscard]] const Matrix& matrix() const noexcept { return lower_; }
  [[nodiscard]] Index dim() const noexcept { return lower_.rows(); }
  [[nodiscard]] double operator()(Index i, Index j) const { return lower_(i, j); }

  /// L Lᵀ, symmetrized.
  [[nodiscard]] Matrix reconstruct() const {
    const Matrix p = lower_ * lower_.transpose();
    return (p + p.transpose()) / 2.0;
  }

 private:
  explicit CholeskyFactor(Matrix lower) : lower_(std::move(lower)) {}
  friend CholeskyFactor cholesky(const Matrix& a);

  Matrix lower_;
};

/// Unique Cholesky factor of an SPD matrix. Pivots must exceed kPdTol times
/// the largest diagonal entry.
inline CholeskyFactor cholesky(const Matrix& a) {
  const Matrix s = symmetrized(a);
  const Index n = s.rows();
  const double max_diag = s.diagonal().maxCoeff();
  if (!(max_diag > 0.0)) detail::fail(ErrorCode::NotPositiveDefinite, "largest diagonal entry is not positive");
  const double floor = kPdTol * max_diag;

  Matrix l = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    const double pivot = s(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > floor)) {
      detail::fail(ErrorCode::NotPositiveDefinite,
                   "Cholesky pivot " + std::to_string(j) + " = " + std::to_string(pivot) + " below tolerance");
    }
    const double d = std::sqrt(pivot);
    l(j, j) = d;
    for (Index i = j + 1; i < n; ++i) {
      l(i, j) = (s(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / d;
    }
  }
  return CholeskyFactor(std::move(l));
}

namespace detail {

struct SpdEigen {
  Vec values;
  Matrix vectors;
};

inline SpdEigen spd_eigen(const Matrix& a) {
  const Matrix s = symmetrized(a);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
  if (solver.info() != Eigen::Success) fail(ErrorCode::InternalConsistency, "eigendecomposition failed");
  const double max_diag = s.diagonal().maxCoeff();
  if (!(max_diag > 0.0) || !(solver.eigenvalues().minCoeff() > kPdTol * max_diag)) {
    fail(ErrorCode::NotPositiveDefinite,
         "smallest eigenvalue " + std::to_string(solver.eigenvalues().minCoeff()) + " below tolerance");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline Matrix spd_power(const Matrix& a, double exponent) {
  const SpdEigen e = spd_eigen(a);
  const Vec powered = e.values.array().pow(exponent).matrix();
  const Matrix r = e.vectors * powered.asDiagonal() * e.vectors.transpose();
  return (r + r.transpose()) / 2.0;
}

}  // namespace detail

/// Principal square root of an SPD matrix via symmetric eigendecomposition.
inline Matrix sqrtm(const Matrix& a) { return detail::spd_power(a, 0.5); }

/// A^{-1/2} for SPD A.
inline Matrix inverse_sqrtm(const Matrix& a) { return detail::spd_power(a, -0.5); }

/// Split point between the past 1..t and the future t+1..N (1-based times),
/// i.e. the first `t` coordinates form the past.
struct BlockIndex {
  Index t = 0;
  constexpr explicit BlockIndex(Index split) noexcept : t(split) {}
};

/// Non-degenerate Gaussian N(mean, cov). The Cholesky factor is computed on
/// construction and cached; instances are immutable.
class GaussianSpec {
 public:
  GaussianSpec(Vec mean, const Matrix& cov) : mean_(std::move(mean)), cov_(symmetrized(cov)), chol_(cholesky(cov_)) {
    detail::require_finite(mean_, "mean");
    detail::require_same_dim(mean_.size(), cov_.rows(), "mean length vs covariance dimension");
  }

  /// Builds N(mean, L Lᵀ) from a validated factor; the factor is kept as-is.
  static GaussianSpec from_cholesky(Vec mean, Matrix lower) {
    CholeskyFactor chol = CholeskyFactor::from_lower(std::move(lower));
    detail::require_finite(mean, "mean");
    detail::require_same_dim(mean.size(), chol.dim(), "mean length vs factor dimension");
    Matrix cov = chol.reconstruct();
    return GaussianSpec(std::move(mean), std::move(cov), std::move(chol));
  }

  /// Uses a covariance and a factor supplied together. The factor must
  /// reconstruct the covariance to 1e-10 in relative Frobenius norm.
  static GaussianSpec from_parts(Vec mean, const Matrix& cov, Matrix lower) {
    CholeskyFactor chol = CholeskyFactor::from_lower(std::move(lower));
    Matrix sym = symmetrized(cov);
    detail::require_finite(mean, "mean");
    detail::require_same_dim(mean.size(), sym.rows(), "mean length vs covariance dimension");
    detail::require_same_dim(chol.dim(), sym.rows(), "factor vs covariance dimension");
    if ((chol.reconstruct() - sym).norm() > 1e-10 * sym.norm()) {
      detail::fail(ErrorCode::BadParameter, "Cholesky factor does not reconstruct the covariance");
    }
    return GaussianSpec(std::move(mean), std::move(sym), std::move(chol));
  }

  static GaussianSpec standard(Index n) { return from_cholesky(Vec::Zero(n), Matrix::Identity(n, n)); }

  [[nodiscard]] const Vec& mean() const noexcept { return mean_; }
  [[nodiscard]] const Matrix& cov() const noexcept { return cov_; }
  [[nodiscard]] const CholeskyFactor& chol() const noexcept { return chol_; }
  [[nodiscard]] Index dim() const noexcept { return mean_.size(); }

 private:
  GaussianSpec(Vec mean, Matrix cov, CholeskyFactor chol)
      : mean_(std::move(mean)), cov_(std::move(cov)), chol_(std::move(chol)) {}

  Vec mean_;
  Matrix cov_;
  CholeskyFactor chol_;
};

/// Law of the future coordinates given the first t coordinates:
///   N(a_f + L_fp L_pp^{-1} (x_past - a_p), L_ff L_ffᵀ).
/// The returned factor is exactly the trailing diagonal block of L, so the
/// conditional covariance does not depend on x_past.
inline GaussianSpec conditional(const GaussianSpec& mu, BlockIndex split, const Vec& x_past) {
  const Index n = mu.dim();
  const Index t = split.t;
  if (t <= 0 || t >= n) {
    detail::fail(ErrorCode::BadSplit, "split " + std::to_string(t) + " outside (0, " + std::to_string(n) + ")");
  }
  detail::require_same_dim(x_past.size(), t, "past length vs split");
  detail::require_finite(x_past, "past values");

  const Matrix& l = mu.chol().matrix();
  const Vec noise = l.topLeftCorner(t, t).triangularView<Eigen::Lower>().solve(x_past - mu.mean().head(t));
  Vec mean = mu.mean().tail(n - t) + l.bottomLeftCorner(n - t, t) * noise;
  return GaussianSpec::from_cholesky(std::move(mean), l.bottomRightCorner(n - t, n - t));
}

}  // namespace aot
