#pragma once

// Bicausal couplings of Gaussian pairs and their transport maps.
//
// The correlated family pi^P is the law of (a + L eps^X, b + M eps^Y) where
// the noise pairs (eps^X_t, eps^Y_t) are independent across t with
// correlation rho_t. Its joint covariance is [[A, L P Mᵀ], [M P Lᵀ, B]] and
// its cost is |a - b|^2 + Tr A + Tr B - 2 sum_t rho_t (Lᵀ M)_tt. The sign
// choice rho_t = sign((Lᵀ M)_tt) attains AW2^2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aot/distances.hpp"
#include "aot/gauss.hpp"
#include "aot/random.hpp"

namespace aot {

/// Per-time correlations rho_t in [-1, 1].
class CorrelationDiagonal {
 public:
  explicit CorrelationDiagonal(Vec rho) : rho_(std::move(rho)) {
    if (rho_.size() == 0) detail::fail(ErrorCode::DimensionMismatch, "correlations must be non-empty");
    detail::require_finite(rho_, "correlations");
    for (Index i = 0; i < rho_.size(); ++i) {
      if (std::abs(rho_[i]) > 1.0) {
        detail::fail(ErrorCode::BadCorrelation,
                     "correlation " + std::to_string(i) + " = " + std::to_string(rho_[i]) + " outside [-1, 1]");
      }
    }
  }

  static CorrelationDiagonal ones(Index n) { return CorrelationDiagonal(Vec::Ones(n)); }
  static CorrelationDiagonal zeros(Index n) { return CorrelationDiagonal(Vec::Zero(n)); }

  [[nodiscard]] const Vec& values() const noexcept { return rho_; }
  [[nodiscard]] Index dim() const noexcept { return rho_.size(); }
  [[nodiscard]] double operator[](Index i) const { return rho_[i]; }

  [[nodiscard]] CorrelationDiagonal tail(Index count) const { return CorrelationDiagonal(rho_.tail(count)); }

 private:
  Vec rho_;
};

/// Optimal correlation signs. Indices are 0-based; `free_indices` lists the
/// times where the cross diagonal vanishes and rho_t is not determined (the
/// canonical choice +1 is stored there).
struct SignSelection {
  CorrelationDiagonal rho;
  std::vector<Index> free_indices;
  bool unique = true;
};

namespace detail {

inline SignSelection sign_selection(const Vec& cross, double zero_tol) {
  Vec rho(cross.size());
  std::vector<Index> free;
  for (Index t = 0; t < cross.size(); ++t) {
    if (std::abs(cross[t]) <= zero_tol) {
      rho[t] = 1.0;
      free.push_back(t);
    } else {
      rho[t] = cross[t] > 0.0 ? 1.0 : -1.0;
    }
  }
  const bool unique = free.empty();
  return SignSelection{CorrelationDiagonal(std::move(rho)), std::move(free), unique};
}

}  // namespace detail

inline SignSelection optimal_sign(const CholeskyFactor& l, const CholeskyFactor& m) {
  const Vec cross = diag_cross(l, m);
  return detail::sign_selection(cross, 1e-12 * l.matrix().norm() * m.matrix().norm());
}

/// Sign rule for the weighted cost: signs of diag(Lᵀ W M).
inline SignSelection optimal_sign(const CholeskyFactor& l, const CholeskyFactor& m, const WeightDiagonal& w) {
  const Vec cross = diag_cross(l, m, w);
  const Vec root_w = w.values().cwiseSqrt();
  const double scale = (root_w.asDiagonal() * l.matrix()).norm() * (root_w.asDiagonal() * m.matrix()).norm();
  return detail::sign_selection(cross, 1e-12 * scale);
}

/// Joint Gaussian law of (X, Y) under pi^P. The generating factors are kept
/// so the (possibly singular) joint can be sampled without a 2N Cholesky.
struct JointGaussianCoupling {
  Vec mean;    ///< (a, b), length 2N
  Matrix cov;  ///< [[A, L P Mᵀ], [M P Lᵀ, B]]
  CholeskyFactor x_factor;
  CholeskyFactor y_factor;
  CorrelationDiagonal rho;

  [[nodiscard]] Index dim() const noexcept { return x_factor.dim(); }
};

namespace detail {

inline void require_pair(const GaussianSpec& mu, const GaussianSpec& nu, const CorrelationDiagonal& rho) {
  require_same_dim(mu.dim(), nu.dim(), "source vs target dimension");
  require_same_dim(rho.dim(), mu.dim(), "correlations vs dimension");
}

}  // namespace detail

inline JointGaussianCoupling coupling_pi_p(const GaussianSpec& mu, const GaussianSpec& nu,
                                           const CorrelationDiagonal& rho) {
  detail::require_pair(mu, nu, rho);
  const Index n = mu.dim();
  const Matrix& l = mu.chol().matrix();
  const Matrix& m = nu.chol().matrix();
  const Matrix cross = l * rho.values().asDiagonal() * m.transpose();

  Vec mean(2 * n);
  mean << mu.mean(), nu.mean();
  Matrix cov(2 * n, 2 * n);
  cov.topLeftCorner(n, n) = mu.cov();
  cov.topRightCorner(n, n) = cross;
  cov.bottomLeftCorner(n, n) = cross.transpose();
  cov.bottomRightCorner(n, n) = nu.cov();
  return JointGaussianCoupling{std::move(mean), std::move(cov), mu.chol(), nu.chol(), rho};
}

/// Closed-form E|X - Y|^2 under pi^P.
inline double coupling_cost(const GaussianSpec& mu, const GaussianSpec& nu, const CorrelationDiagonal& rho) {
  detail::require_pair(mu, nu, rho);
  const Vec cross = diag_cross(mu.chol(), nu.chol());
  return (mu.mean() - nu.mean()).squaredNorm() + mu.cov().trace() + nu.cov().trace() -
         2.0 * rho.values().dot(cross);
}

/// Closed-form E[sum_t w_t (X_t - Y_t)^2] under pi^P.
inline double coupling_cost(const GaussianSpec& mu, const GaussianSpec& nu, const CorrelationDiagonal& rho,
                            const WeightDiagonal& w) {
  detail::require_pair(mu, nu, rho);
  detail::require_same_dim(w.dim(), mu.dim(), "weights vs dimension");
  const Vec& wv = w.values();
  const Vec diff = mu.mean() - nu.mean();
  const Matrix& l = mu.chol().matrix();
  const Matrix& m = nu.chol().matrix();
  return diff.dot(wv.asDiagonal() * diff) + (wv.asDiagonal() * l.cwiseAbs2()).sum() +
         (wv.asDiagonal() * m.cwiseAbs2()).sum() - 2.0 * rho.values().dot(diag_cross(mu.chol(), nu.chol(), w));
}

namespace detail {

/// One draw of (eps^X, eps^Y) with eps^Y_t = rho_t eps^X_t + sqrt(1 - rho_t^2) xi_t.
inline void draw_correlated_noise(Rng& rng, const Vec& rho, Vec& eps_x, Vec& eps_y) {
  for (Index t = 0; t < rho.size(); ++t) {
    const double ex = rng.normal();
    const double xi = rng.normal();
    eps_x[t] = ex;
    eps_y[t] = rho[t] * ex + std::sqrt(1.0 - rho[t] * rho[t]) * xi;
  }
}

}  // namespace detail

struct CouplingDraws {
  Matrix x;  ///< one draw per row
  Matrix y;
};

/// Samples pi^P through its factor representation.
inline CouplingDraws sample_coupling(const JointGaussianCoupling& pi, Index n, std::uint64_t seed) {
  if (n < 1) detail::fail(ErrorCode::BadParameter, "sample count must be at least 1");
  const Index dim = pi.dim();
  Rng rng(seed);
  CouplingDraws draws{Matrix(n, dim), Matrix(n, dim)};
  Vec eps_x(dim);
  Vec eps_y(dim);
  for (Index r = 0; r < n; ++r) {
    detail::draw_correlated_noise(rng, pi.rho.values(), eps_x, eps_y);
    draws.x.row(r) = (pi.mean.head(dim) + pi.x_factor.matrix() * eps_x).transpose();
    draws.y.row(r) = (pi.mean.tail(dim) + pi.y_factor.matrix() * eps_y).transpose();
  }
  return draws;
}

enum class MapKind { brenier, knothe_rosenblatt, adapted_wasserstein };

constexpr std::string_view to_string(MapKind kind) noexcept {
  switch (kind) {
    case MapKind::brenier: return "brenier";
    case MapKind::knothe_rosenblatt: return "knothe_rosenblatt";
    case MapKind::adapted_wasserstein: return "adapted_wasserstein";
  }
  return "unknown";
}

/// y = offset + matrix * x.
struct AffineTransportMap {
  Vec offset;
  Matrix matrix;
  MapKind kind = MapKind::brenier;

  [[nodiscard]] Vec operator()(const Vec& x) const { return offset + matrix * x; }

  /// T A Tᵀ, symmetrized.
  [[nodiscard]] Matrix pushforward_cov(const Matrix& a) const {
    const Matrix p = matrix * a * matrix.transpose();
    return (p + p.transpose()) / 2.0;
  }
};

namespace detail {

/// Map x -> b + T (x - a).
inline AffineTransportMap centered_map(const GaussianSpec& mu, const GaussianSpec& nu, Matrix t, MapKind kind) {
  Vec offset = nu.mean() - t * mu.mean();
  return AffineTransportMap{std::move(offset), std::move(t), kind};
}

/// M P L^{-1}, computed as (L^{-T} P Mᵀ)ᵀ with a triangular solve.
inline Matrix triangular_map(const CholeskyFactor& l, const CholeskyFactor& m, const Vec& rho) {
  const Matrix rhs = rho.asDiagonal() * m.matrix().transpose();
  Matrix t = l.matrix().transpose().triangularView<Eigen::Upper>().solve(rhs).transpose();
  t.triangularView<Eigen::StrictlyUpper>().setZero();
  return t;
}

}  // namespace detail

/// Brenier map b + A^{-1/2} (A^{1/2} B A^{1/2})^{1/2} A^{-1/2} (x - a).
inline AffineTransportMap brenier_map(const GaussianSpec& mu, const GaussianSpec& nu) {
  detail::require_same_dim(mu.dim(), nu.dim(), "Brenier map");
  const Matrix root_a = sqrtm(mu.cov());
  const Matrix inv_root_a = inverse_sqrtm(mu.cov());
  const Matrix inner = root_a * nu.cov() * root_a;
  Matrix t = inv_root_a * sqrtm((inner + inner.transpose()) / 2.0) * inv_root_a;
  t = (t + t.transpose()) / 2.0;
  return detail::centered_map(mu, nu, std::move(t), MapKind::brenier);
}

/// Knothe-Rosenblatt map b + M L^{-1} (x - a).
inline AffineTransportMap kr_map(const GaussianSpec& mu, const GaussianSpec& nu) {
  detail::require_same_dim(mu.dim(), nu.dim(), "KR map");
  return detail::centered_map(mu, nu, detail::triangular_map(mu.chol(), nu.chol(), Vec::Ones(mu.dim())),
                              MapKind::knothe_rosenblatt);
}

/// Adapted-Wasserstein map together with the sign selection it was built
/// from. When the selection is not unique the map uses rho = +1 on the free
/// indices and is one optimizer among many.
struct AdaptedMap {
  AffineTransportMap map;
  SignSelection selection;

  [[nodiscard]] bool unique() const noexcept { return selection.unique; }
};

/// b + M P L^{-1} (x - a) with P the optimal sign matrix.
inline AdaptedMap aw_map(const GaussianSpec& mu, const GaussianSpec& nu) {
  detail::require_same_dim(mu.dim(), nu.dim(), "AW map");
  SignSelection selection = optimal_sign(mu.chol(), nu.chol());
  Matrix t = detail::triangular_map(mu.chol(), nu.chol(), selection.rho.values());
  return AdaptedMap{detail::centered_map(mu, nu, std::move(t), MapKind::adapted_wasserstein), std::move(selection)};
}

/// Conditional law of the futures (X_f, Y_f) under pi^P given both pasts.
/// The futures are driven by the tail noise through the trailing factor
/// blocks, so the result is the pi^P coupling of the two conditionals with
/// correlations rho_f.
inline JointGaussianCoupling condition_coupling(const GaussianSpec& mu, const GaussianSpec& nu,
                                                const CorrelationDiagonal& rho, BlockIndex split, const Vec& x_past,
                                                const Vec& y_past) {
  detail::require_pair(mu, nu, rho);
  const GaussianSpec mu_f = conditional(mu, split, x_past);
  const GaussianSpec nu_f = conditional(nu, split, y_past);
  return coupling_pi_p(mu_f, nu_f, rho.tail(mu.dim() - split.t));
}

/// Largest coefficient by which the conditional mean of Y_{1:t} given all of
/// X loads on X_{t+1:N} (and symmetrically with X and Y swapped), over all t.
/// Zero for a bicausal Gaussian coupling. Computed from the joint covariance
/// alone with a general solve.
inline double causality_defect(const JointGaussianCoupling& pi) {
  const Index n = pi.dim();
  const Matrix a = pi.cov.topLeftCorner(n, n);
  const Matrix b = pi.cov.bottomRightCorner(n, n);
  const Matrix c_yx = pi.cov.bottomLeftCorner(n, n);
  // E[Y | X = x] - b = C_yx A^{-1} (x - a)
  const Matrix k_yx = a.partialPivLu().solve(c_yx.transpose()).transpose();
  const Matrix k_xy = b.partialPivLu().solve(c_yx).transpose();
  double defect = 0.0;
  for (Index t = 1; t < n; ++t) {
    defect = std::max(defect, k_yx.block(0, t, t, n - t).cwiseAbs().maxCoeff());
    defect = std::max(defect, k_xy.block(0, t, t, n - t).cwiseAbs().maxCoeff());
  }
  return defect;
}

}  // namespace aot
