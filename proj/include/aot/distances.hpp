#pragma once

// Closed-form transport distances between non-degenerate Gaussians.
//
//   W2^2(mu, nu)  = |a - b|^2 + d_BW^2(A, B)
//   KR2^2(mu, nu) = |a - b|^2 + d_KR^2(A, B),   d_KR(A, B) = |L - M|_F
//   AW2^2(mu, nu) = |a - b|^2 + d_ABW^2(A, B),
//   d_ABW^2(A, B) = Tr A + Tr B - 2 |diag(Lᵀ M)|_1
//
// with A = L Lᵀ and B = M Mᵀ the Cholesky factorizations.

#include <cmath>
#include <numbers>
#include <string>

#include "aot/gauss.hpp"

namespace aot {

/// Squared distance split into its mean and covariance parts.
struct DistanceReport {
  double squared_value = 0.0;
  double value = 0.0;
  double mean_term = 0.0;
  double cov_term = 0.0;
};

/// Diagonal weights w_t > 0 for the cost sum_t w_t (x_t - y_t)^2.
class WeightDiagonal {
 public:
  explicit WeightDiagonal(Vec w) : w_(std::move(w)) {
    if (w_.size() == 0) detail::fail(ErrorCode::DimensionMismatch, "weights must be non-empty");
    detail::require_finite(w_, "weights");
    for (Index i = 0; i < w_.size(); ++i) {
      if (!(w_[i] > 0.0)) {
        detail::fail(ErrorCode::NonPositiveWeight, "weight " + std::to_string(i) + " = " + std::to_string(w_[i]));
      }
    }
  }

  static WeightDiagonal ones(Index n) { return WeightDiagonal(Vec::Ones(n)); }

  [[nodiscard]] const Vec& values() const noexcept { return w_; }
  [[nodiscard]] Index dim() const noexcept { return w_.size(); }

 private:
  Vec w_;
};

namespace detail {

/// Radicands that are mathematically non-negative may pick up round-off.
/// Residue down to -1e-9 (relative to `scale` when it exceeds 1) is clamped
/// to zero; anything more negative is an internal inconsistency.
inline double clamp_squared(double squared, double scale, const char* what) {
  if (squared >= 0.0) return squared;
  if (squared >= -1e-9 * std::max(1.0, scale)) return 0.0;
  fail(ErrorCode::InternalConsistency, std::string(what) + " squared value " + std::to_string(squared) + " < 0");
}

}  // namespace detail

/// diag(Lᵀ M): entry t is the dot product of column t of L and M.
inline Vec diag_cross(const CholeskyFactor& l, const CholeskyFactor& m) {
  detail::require_same_dim(l.dim(), m.dim(), "diag(L^T M)");
  return (l.matrix().cwiseProduct(m.matrix())).colwise().sum().transpose();
}

/// diag(Lᵀ W M).
inline Vec diag_cross(const CholeskyFactor& l, const CholeskyFactor& m, const WeightDiagonal& w) {
  detail::require_same_dim(l.dim(), m.dim(), "diag(L^T W M)");
  detail::require_same_dim(l.dim(), w.dim(), "weights vs dimension");
  return (w.values().asDiagonal() * l.matrix().cwiseProduct(m.matrix())).colwise().sum().transpose();
}

inline double bures_wasserstein_squared(const Matrix& a, const Matrix& b) {
  detail::require_same_dim(a.rows(), b.rows(), "Bures-Wasserstein");
  const Matrix root_a = sqrtm(a);
  const Matrix sb = symmetrized(b);
  const Matrix inner = root_a * sb * root_a;
  const detail::SpdEigen e = detail::spd_eigen((inner + inner.transpose()) / 2.0);
  const double cross = e.values.array().sqrt().sum();
  const double traces = symmetrized(a).trace() + sb.trace();
  return detail::clamp_squared(traces - 2.0 * cross, traces, "d_BW");
}

inline double bures_wasserstein(const Matrix& a, const Matrix& b) {
  return std::sqrt(bures_wasserstein_squared(a, b));
}

inline double kr_distance(const CholeskyFactor& l, const CholeskyFactor& m) {
  detail::require_same_dim(l.dim(), m.dim(), "d_KR");
  return (l.matrix() - m.matrix()).norm();
}

inline double kr_distance(const Matrix& a, const Matrix& b) {
  detail::require_same_dim(a.rows(), b.rows(), "d_KR");
  return kr_distance(cholesky(a), cholesky(b));
}

namespace detail {

/// Sum over columns j of sum_i w_i (L_ij - s_j M_ij)^2 with s_j the sign of
/// the weighted column product (+1 on ties). Equals
/// Tr(LᵀWL) + Tr(MᵀWM) - 2 |diag(LᵀWM)|_1 without the cancellation.
inline double signed_column_gap(const Matrix& l, const Matrix& m, const Vec& w) {
  double total = 0.0;
  for (Index j = 0; j < l.cols(); ++j) {
    const double sign = l.col(j).dot(w.asDiagonal() * m.col(j)) < 0.0 ? -1.0 : 1.0;
    total += (l.col(j) - sign * m.col(j)).cwiseAbs2().dot(w);
  }
  return total;
}

}  // namespace detail

/// d_ABW^2 = Tr A + Tr B - 2 |diag(Lᵀ M)|_1, evaluated as |L - M P|_F^2.
inline double abw_distance_squared(const CholeskyFactor& l, const CholeskyFactor& m) {
  detail::require_same_dim(l.dim(), m.dim(), "d_ABW");
  return detail::signed_column_gap(l.matrix(), m.matrix(), Vec::Ones(l.dim()));
}

inline double abw_distance(const CholeskyFactor& l, const CholeskyFactor& m) {
  return std::sqrt(abw_distance_squared(l, m));
}

inline double abw_distance(const Matrix& a, const Matrix& b) {
  detail::require_same_dim(a.rows(), b.rows(), "d_ABW");
  return abw_distance(cholesky(a), cholesky(b));
}

namespace detail {

inline DistanceReport make_report(double mean_term, double cov_term) {
  DistanceReport r;
  r.mean_term = mean_term;
  r.cov_term = cov_term;
  r.squared_value = mean_term + cov_term;
  r.value = std::sqrt(r.squared_value);
  return r;
}

}  // namespace detail

inline DistanceReport wasserstein2(const GaussianSpec& mu, const GaussianSpec& nu) {
  detail::require_same_dim(mu.dim(), nu.dim(), "W2");
  return detail::make_report((mu.mean() - nu.mean()).squaredNorm(), bures_wasserstein_squared(mu.cov(), nu.cov()));
}

/// Cost of the Knothe-Rosenblatt (synchronous) coupling.
inline DistanceReport kr2(const GaussianSpec& mu, const GaussianSpec& nu) {
  detail::require_same_dim(mu.dim(), nu.dim(), "KR2");
  const double d = kr_distance(mu.chol(), nu.chol());
  return detail::make_report((mu.mean() - nu.mean()).squaredNorm(), d * d);
}

/// Adapted 2-Wasserstein distance.
inline DistanceReport aw2(const GaussianSpec& mu, const GaussianSpec& nu) {
  detail::require_same_dim(mu.dim(), nu.dim(), "AW2");
  return detail::make_report((mu.mean() - nu.mean()).squaredNorm(), abw_distance_squared(mu.chol(), nu.chol()));
}

/// Optimal bicausal value for the cost sum_t w_t (x_t - y_t)^2 (squared, no root):
///   (a-b)ᵀW(a-b) + Tr(LᵀWL) + Tr(MᵀWM) - 2 |diag(LᵀWM)|_1.
inline double weighted_bicausal_value(const GaussianSpec& mu, const GaussianSpec& nu, const WeightDiagonal& w) {
  detail::require_same_dim(mu.dim(), nu.dim(), "weighted value");
  detail::require_same_dim(mu.dim(), w.dim(), "weights vs dimension");
  const Vec& wv = w.values();
  const Vec diff = mu.mean() - nu.mean();
  const double mean_term = diff.dot(wv.asDiagonal() * diff);
  const double cov_term = detail::signed_column_gap(mu.chol().matrix(), nu.chol().matrix(), wv);
  return mean_term + cov_term;
}

/// μ_n(θ) = N(0, L_n L_nᵀ) with L_n = [[0, 0], [cos θ, sin θ]] + I/n.
inline GaussianSpec incompleteness_measure(double theta, Index n) {
  if (!(theta > 0.0 && theta < std::numbers::pi)) {
    detail::fail(ErrorCode::BadAngle, "angle " + std::to_string(theta) + " outside (0, pi)");
  }
  if (n < 1) detail::fail(ErrorCode::BadParameter, "sequence index must be at least 1");
  const double eps = 1.0 / static_cast<double>(n);
  Matrix l(2, 2);
  l << eps, 0.0, std::cos(theta), std::sin(theta) + eps;
  return GaussianSpec::from_cholesky(Vec::Zero(2), std::move(l));
}

struct IncompletenessPoint {
  double finite_value = 0.0;  ///< AW2^2(μ_n(θ), μ_n(θ'))
  double limit_value = 0.0;   ///< 2 - 2(|cos θ cos θ'| + sin θ sin θ')
};

inline IncompletenessPoint incompleteness_limit(double theta, double theta_prime, Index n) {
  const GaussianSpec lhs = incompleteness_measure(theta, n);
  const GaussianSpec rhs = incompleteness_measure(theta_prime, n);
  IncompletenessPoint p;
  p.finite_value = aw2(lhs, rhs).squared_value;
  p.limit_value = 2.0 - 2.0 * (std::abs(std::cos(theta) * std::cos(theta_prime)) +
                               std::sin(theta) * std::sin(theta_prime));
  return p;
}

}  // namespace aot
