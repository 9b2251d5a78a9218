#pragma once

// Displacement interpolation between two Gaussians,
//   a_t = (1 - t) a_0 + t a_1,   A_t = T_t A_0 T_tᵀ,   T_t = (1 - t) I + t T,
// with T the linear part of the Brenier map (Wasserstein geodesic), of the
// Knothe-Rosenblatt map L_1 L_0^{-1} (Cholesky factors move linearly) or of
// the adapted map L_1 P L_0^{-1}. The adapted curve can pass through
// degenerate covariances when some (L_0ᵀ L_1)_tt < 0.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "aot/couplings.hpp"
#include "aot/distances.hpp"
#include "aot/gauss.hpp"

namespace aot {

enum class GeodesicKind { wasserstein, knothe_rosenblatt, adapted };

constexpr std::string_view to_string(GeodesicKind kind) noexcept {
  switch (kind) {
    case GeodesicKind::wasserstein: return "wasserstein";
    case GeodesicKind::knothe_rosenblatt: return "knothe_rosenblatt";
    case GeodesicKind::adapted: return "adapted";
  }
  return "unknown";
}

struct GeodesicPoint {
  double t = 0.0;
  Vec mean;
  Matrix cov;  ///< symmetric PSD; PD unless `degenerate`
  bool degenerate = false;
  double min_eigenvalue = 0.0;
  /// Adapted kind only: the sign matrix had free entries and +1 was used.
  bool tie_broken = false;
};

/// Linear part T of the map defining the curve, plus the tie-break flag.
struct InterpolationMatrix {
  Matrix matrix;
  bool tie_broken = false;
};

inline InterpolationMatrix interpolation_matrix(const GaussianSpec& mu0, const GaussianSpec& mu1, GeodesicKind kind) {
  detail::require_same_dim(mu0.dim(), mu1.dim(), "geodesic endpoints");
  switch (kind) {
    case GeodesicKind::wasserstein: return {brenier_map(mu0, mu1).matrix, false};
    case GeodesicKind::knothe_rosenblatt: return {kr_map(mu0, mu1).matrix, false};
    case GeodesicKind::adapted: {
      AdaptedMap m = aw_map(mu0, mu1);
      return {std::move(m.map.matrix), !m.unique()};
    }
  }
  detail::fail(ErrorCode::BadParameter, "unknown geodesic kind");
}

namespace detail {

inline GeodesicPoint make_point(double t, Vec mean, Matrix cov, bool tie_broken) {
  cov = (cov + cov.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov, Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  const double max_diag = cov.diagonal().maxCoeff();
  const bool degenerate = !(max_diag > 0.0) || min_eig <= kPdTol * max_diag;
  return GeodesicPoint{t, std::move(mean), std::move(cov), degenerate, min_eig, tie_broken};
}

inline void require_unit_interval(double t, const char* name) {
  if (!(t >= 0.0 && t <= 1.0)) {
    fail(ErrorCode::BadParameter, std::string(name) + " = " + std::to_string(t) + " outside [0, 1]");
  }
}

}  // namespace detail

/// Point at time t on the curve of the given kind. The endpoints t = 0 and
/// t = 1 return the input laws unchanged.
inline GeodesicPoint geodesic_point(const GaussianSpec& mu0, const GaussianSpec& mu1, double t, GeodesicKind kind) {
  detail::require_unit_interval(t, "t");
  const InterpolationMatrix interp = interpolation_matrix(mu0, mu1, kind);
  if (t == 0.0) return detail::make_point(t, mu0.mean(), mu0.cov(), interp.tie_broken);
  if (t == 1.0) return detail::make_point(t, mu1.mean(), mu1.cov(), interp.tie_broken);

  const Index n = mu0.dim();
  const Matrix step = (1.0 - t) * Matrix::Identity(n, n) + t * interp.matrix;
  Vec mean = (1.0 - t) * mu0.mean() + t * mu1.mean();
  return detail::make_point(t, std::move(mean), step * mu0.cov() * step.transpose(), interp.tie_broken);
}

enum class CheckStatus { ok, skipped };

/// Constant-speed check: dist(μ_s, μ_t) against |s - t| dist(μ_0, μ_1),
/// measured with the distance that matches the curve kind (W2, KR2 or AW2).
struct GeodesicCheck {
  CheckStatus status = CheckStatus::ok;
  double distance = 0.0;  ///< dist(μ_s, μ_t)
  double expected = 0.0;  ///< |s - t| dist(μ_0, μ_1)
  double difference = 0.0;
  std::string reason;  ///< set when skipped
};

inline double geodesic_distance(const GaussianSpec& lhs, const GaussianSpec& rhs, GeodesicKind kind) {
  switch (kind) {
    case GeodesicKind::wasserstein: return wasserstein2(lhs, rhs).value;
    case GeodesicKind::knothe_rosenblatt: return kr2(lhs, rhs).value;
    case GeodesicKind::adapted: return aw2(lhs, rhs).value;
  }
  detail::fail(ErrorCode::BadParameter, "unknown geodesic kind");
}

inline GeodesicCheck geodesic_check(const GaussianSpec& mu0, const GaussianSpec& mu1, GeodesicKind kind, double s,
                                    double t) {
  detail::require_unit_interval(s, "s");
  detail::require_unit_interval(t, "t");
  const GeodesicPoint ps = geodesic_point(mu0, mu1, s, kind);
  const GeodesicPoint pt = geodesic_point(mu0, mu1, t, kind);
  GeodesicCheck check;
  if (ps.degenerate || pt.degenerate) {
    check.status = CheckStatus::skipped;
    check.reason = "degenerate intermediate covariance";
    return check;
  }
  check.distance = geodesic_distance(GaussianSpec(ps.mean, ps.cov), GaussianSpec(pt.mean, pt.cov), kind);
  check.expected = std::abs(s - t) * geodesic_distance(mu0, mu1, kind);
  check.difference = std::abs(check.distance - check.expected);
  return check;
}

}  // namespace aot
