#pragma once

// Independent verification engines for the closed forms:
//
//  * value_function : the dynamic-programming value V_t in closed form
//  * dpp_recursion_check : one backward step of the DPP integrated on
//    quantile nodes with (counter-)monotone pairing
//  * dpp_solve_discrete : full backward induction on quantile trees with
//    exact discrete one-step OT
//  * monte_carlo_cost : sampled E|X - Y|^2 under pi^P with standard error
//  * rho_grid_search : exhaustive search over correlation grids
//
// The discrete solver reads the conditional laws off the covariance matrix by
// Schur complements, never through the Cholesky route the closed forms use.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "aot/assignment.hpp"
#include "aot/couplings.hpp"
#include "aot/distances.hpp"
#include "aot/gauss.hpp"
#include "aot/random.hpp"

namespace aot {

/// Standard normal mid-quantiles Φ^{-1}((k + 1/2) / m), k = 0..m-1, in
/// increasing order and exactly antisymmetric (node m-1-k = -node k).
inline Vec quantile_nodes(Index m) {
  if (m < 2) detail::fail(ErrorCode::BadParameter, "need at least 2 quantile nodes");
  Vec z(m);
  for (Index k = 0; k < m / 2; ++k) {
    const double p = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
    z[k] = -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
    z[m - 1 - k] = -z[k];
  }
  if (m % 2 == 1) z[m / 2] = 0.0;
  return z;
}

/// Mid-quantile nodes rescaled to unit second moment, so that equal-weight
/// sums integrate quadratics in a standard normal exactly.
inline Vec normalized_quantile_nodes(Index m) {
  const Vec z = quantile_nodes(m);
  return z / std::sqrt(z.squaredNorm() / static_cast<double>(m));
}

struct ValueFunctionEval {
  Index t = 0;
  Vec x_past;
  Vec y_past;
  double value = 0.0;
  /// (Lᵀ M)_{t+1,t+1} / (L_{t+1,t+1} M_{t+1,t+1}), the coefficient of
  /// -2 x_{t+1} y_{t+1} in V_{t+1}; empty at t = N.
  std::optional<double> alpha_next;
};

/// V_t(x_{1:t}, y_{1:t}) = |x - y|^2 + |m_X - m_Y|^2 + d_ABW^2(L_ff L_ffᵀ, M_ff M_ffᵀ)
/// where m_X, m_Y are the conditional means of the futures.
inline ValueFunctionEval value_function(const GaussianSpec& mu, const GaussianSpec& nu, BlockIndex split,
                                        const Vec& x_past, const Vec& y_past) {
  detail::require_same_dim(mu.dim(), nu.dim(), "value function");
  const Index n = mu.dim();
  const Index t = split.t;
  if (t < 0 || t > n) {
    detail::fail(ErrorCode::BadSplit, "split " + std::to_string(t) + " outside [0, " + std::to_string(n) + "]");
  }
  detail::require_same_dim(x_past.size(), t, "x past length");
  detail::require_same_dim(y_past.size(), t, "y past length");

  ValueFunctionEval eval{t, x_past, y_past, (x_past - y_past).squaredNorm(), std::nullopt};
  if (t == n) return eval;

  const Matrix& l = mu.chol().matrix();
  const Matrix& m = nu.chol().matrix();
  const Index f = n - t;
  Vec mean_x = mu.mean().tail(f);
  Vec mean_y = nu.mean().tail(f);
  if (t > 0) {
    mean_x += l.bottomLeftCorner(f, t) *
              l.topLeftCorner(t, t).triangularView<Eigen::Lower>().solve(x_past - mu.mean().head(t));
    mean_y += m.bottomLeftCorner(f, t) *
              m.topLeftCorner(t, t).triangularView<Eigen::Lower>().solve(y_past - nu.mean().head(t));
  }
  const Matrix l_ff = l.bottomRightCorner(f, f);
  const Matrix m_ff = m.bottomRightCorner(f, f);
  eval.value += (mean_x - mean_y).squaredNorm() + detail::signed_column_gap(l_ff, m_ff, Vec::Ones(f));
  eval.alpha_next = l.col(t).dot(m.col(t)) / (l(t, t) * m(t, t));
  return eval;
}

/// One DPP step at time t evaluated numerically against the closed form.
struct RecursionReport {
  double closed_form = 0.0;       ///< V_t from value_function
  double comonotone = 0.0;        ///< integral of V_{t+1} under the comonotone pairing
  double counter_monotone = 0.0;  ///< ... under the counter-monotone pairing
  double one_step = 0.0;          ///< pairing selected by sign(alpha_{t+1})
  double alpha = 0.0;
  double abs_error = 0.0;  ///< |one_step - closed_form|
};

inline RecursionReport dpp_recursion_check(const GaussianSpec& mu, const GaussianSpec& nu, BlockIndex split,
                                           const Vec& x_past, const Vec& y_past, Index quad) {
  detail::require_same_dim(mu.dim(), nu.dim(), "recursion check");
  const Index n = mu.dim();
  const Index t = split.t;
  if (t < 0 || t >= n) {
    detail::fail(ErrorCode::BadSplit, "split " + std::to_string(t) + " outside [0, " + std::to_string(n) + ")");
  }
  if (quad < 16) detail::fail(ErrorCode::BadParameter, "need at least 16 quadrature nodes");

  const ValueFunctionEval current = value_function(mu, nu, split, x_past, y_past);

  // Univariate laws of X_{t+1} | x_past and Y_{t+1} | y_past.
  auto next_law = [&](const GaussianSpec& g, const Vec& past) -> std::pair<double, double> {
    if (t == 0) return {g.mean()[0], g.chol()(0, 0)};
    const GaussianSpec c = conditional(g, split, past);
    return {c.mean()[0], c.chol()(0, 0)};
  };
  const auto [mx, sx] = next_law(mu, x_past);
  const auto [my, sy] = next_law(nu, y_past);

  const Vec z = normalized_quantile_nodes(quad);
  Vec x_next(t + 1);
  Vec y_next(t + 1);
  x_next.head(t) = x_past;
  y_next.head(t) = y_past;
  auto next_value = [&](double xv, double yv) {
    x_next[t] = xv;
    y_next[t] = yv;
    return value_function(mu, nu, BlockIndex(t + 1), x_next, y_next).value;
  };

  RecursionReport report;
  for (Index k = 0; k < quad; ++k) {
    const double xv = mx + sx * z[k];
    report.comonotone += next_value(xv, my + sy * z[k]);
    report.counter_monotone += next_value(xv, my + sy * z[quad - 1 - k]);
  }
  report.comonotone /= static_cast<double>(quad);
  report.counter_monotone /= static_cast<double>(quad);
  report.closed_form = current.value;
  report.alpha = current.alpha_next.value_or(0.0);
  report.one_step = report.alpha >= 0.0 ? report.comonotone : report.counter_monotone;
  report.abs_error = std::abs(report.one_step - report.closed_form);
  return report;
}

/// Quantile-tree resolution for the discrete DPP solver.
struct GridSpec {
  Index points_per_dim = 200;  ///< m >= 2 nodes per conditional law
  /// One-step problems per time level that are re-solved as a full m x m
  /// assignment in addition to the two sorted pairings.
  Index assignment_samples = 4;
};

struct DiscreteDppResult {
  double value = 0.0;  ///< discrete estimate of AW2^2
  Index one_step_problems = 0;
  Index assignment_checks = 0;
  /// Checked problems where the assignment beat both sorted pairings.
  Index assignment_improvements = 0;
  double max_assignment_gain = 0.0;
};

/// Largest number of joint tree states (m^{2(N-1)}) the discrete solver accepts.
inline constexpr double kMaxDiscreteStates = 4.0e6;

namespace detail {

/// Coordinate values of every node path of a quantile tree. Level s holds
/// m^{s+1} entries; path digits are base m with the first time most
/// significant.
struct PathTable {
  std::vector<std::vector<double>> levels;
};

inline PathTable path_table(const GaussianSpec& g, const Vec& z) {
  const Index n = g.dim();
  const Index m = z.size();
  const Matrix& cov = g.cov();
  const double max_diag = cov.diagonal().maxCoeff();
  PathTable table;
  table.levels.resize(static_cast<std::size_t>(n));
  std::vector<std::size_t> power(static_cast<std::size_t>(n + 1), 1);
  for (std::size_t s = 1; s < power.size(); ++s) power[s] = power[s - 1] * static_cast<std::size_t>(m);

  for (Index s = 0; s < n; ++s) {
    // Regression of X_s on X_{0:s}: beta = Cov(X_s, X_p) Cov(X_p)^{-1}.
    Vec beta = Vec::Zero(s);
    double var = cov(s, s);
    if (s > 0) {
      beta = cov.topLeftCorner(s, s).ldlt().solve(cov.col(s).head(s));
      var -= beta.dot(cov.col(s).head(s));
    }
    if (!(var > kPdTol * max_diag)) fail(ErrorCode::NotPositiveDefinite, "conditional variance not positive");
    const double sd = std::sqrt(var);

    auto& level = table.levels[static_cast<std::size_t>(s)];
    level.resize(power[static_cast<std::size_t>(s + 1)]);
    for (std::size_t idx = 0; idx < level.size(); ++idx) {
      double value = g.mean()[s] + sd * z[static_cast<Index>(idx % static_cast<std::size_t>(m))];
      for (Index r = 0; r < s; ++r) {
        const std::size_t prefix = idx / power[static_cast<std::size_t>(s - r)];
        value += beta[r] * (table.levels[static_cast<std::size_t>(r)][prefix] - g.mean()[r]);
      }
      level[idx] = value;
    }
  }
  return table;
}

template <typename Cost>
double solve_one_step(Index m, const Cost& cost, bool run_assignment, DiscreteDppResult& stats) {
  double como = 0.0;
  double counter = 0.0;
  for (Index k = 0; k < m; ++k) {
    como += cost(k, k);
    counter += cost(k, m - 1 - k);
  }
  double best = std::min(como, counter) / static_cast<double>(m);
  ++stats.one_step_problems;
  if (run_assignment) {
    Matrix c(m, m);
    for (Index k = 0; k < m; ++k) {
      for (Index l = 0; l < m; ++l) c(k, l) = cost(k, l);
    }
    const double assigned = solve_assignment(c).cost / static_cast<double>(m);
    ++stats.assignment_checks;
    if (assigned < best - 1e-12 * (1.0 + std::abs(best))) {
      ++stats.assignment_improvements;
      stats.max_assignment_gain = std::max(stats.max_assignment_gain, best - assigned);
    }
    best = std::min(best, assigned);
  }
  return best;
}

}  // namespace detail

/// Backward induction of the adapted transport problem on quantile trees.
/// Each conditional law is replaced by m equally weighted mid-quantile nodes
/// and every one-step coupling problem between node sets is solved exactly
/// (sorted pairings, confirmed by a full assignment on a sample of steps).
inline DiscreteDppResult dpp_solve_discrete(const GaussianSpec& mu, const GaussianSpec& nu, const GridSpec& grid) {
  detail::require_same_dim(mu.dim(), nu.dim(), "discrete DPP");
  const Index n = mu.dim();
  const Index m = grid.points_per_dim;
  if (n > 3) detail::fail(ErrorCode::TooLarge, "discrete DPP supports N <= 3, got N = " + std::to_string(n));
  if (m < 2) detail::fail(ErrorCode::BadParameter, "grid needs at least 2 points per dimension");
  if (std::pow(static_cast<double>(m), 2.0 * static_cast<double>(n - 1)) > kMaxDiscreteStates) {
    detail::fail(ErrorCode::TooLarge, "quantile tree with m = " + std::to_string(m) + " and N = " +
                                          std::to_string(n) + " exceeds the state budget");
  }

  const Vec z = quantile_nodes(m);
  const detail::PathTable xs = detail::path_table(mu, z);
  const detail::PathTable ys = detail::path_table(nu, z);
  const auto um = static_cast<std::size_t>(m);

  DiscreteDppResult result;
  std::vector<double> next;
  for (Index t = n - 1; t >= 0; --t) {
    std::size_t paths = 1;
    for (Index s = 0; s < t; ++s) paths *= um;
    const std::size_t next_paths = paths * um;
    const std::size_t problems = paths * paths;

    std::vector<std::size_t> checked;
    for (Index j = 0; j < grid.assignment_samples; ++j) {
      checked.push_back(static_cast<std::size_t>(j) * problems / static_cast<std::size_t>(grid.assignment_samples));
    }

    std::vector<double> current(problems);
    const auto& x_last = xs.levels[static_cast<std::size_t>(t)];
    const auto& y_last = ys.levels[static_cast<std::size_t>(t)];
    for (std::size_t xi = 0; xi < paths; ++xi) {
      for (std::size_t yi = 0; yi < paths; ++yi) {
        const std::size_t problem = xi * paths + yi;
        const bool run_assignment = std::find(checked.begin(), checked.end(), problem) != checked.end();
        double value = 0.0;
        if (t == n - 1) {
          // Terminal step: V_N = sum over all times of (x_s - y_s)^2.
          double base = 0.0;
          std::size_t div = paths;
          for (Index s = 0; s < t; ++s) {
            div /= um;
            const double dx = xs.levels[static_cast<std::size_t>(s)][xi / div] -
                              ys.levels[static_cast<std::size_t>(s)][yi / div];
            base += dx * dx;
          }
          auto cost = [&](Index k, Index l) {
            const double d = x_last[xi * um + static_cast<std::size_t>(k)] - y_last[yi * um + static_cast<std::size_t>(l)];
            return base + d * d;
          };
          value = detail::solve_one_step(m, cost, run_assignment, result);
        } else {
          auto cost = [&](Index k, Index l) {
            return next[(xi * um + static_cast<std::size_t>(k)) * next_paths + yi * um + static_cast<std::size_t>(l)];
          };
          value = detail::solve_one_step(m, cost, run_assignment, result);
        }
        current[problem] = value;
      }
    }
    next = std::move(current);
  }
  result.value = next.front();
  return result;
}

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  Index samples = 0;
};

namespace detail {

struct RunningMoments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double v) {
    count += 1.0;
    const double delta = v - mean;
    mean += delta / count;
    m2 += delta * (v - mean);
  }

  void merge(const RunningMoments& o) {
    if (o.count == 0.0) return;
    const double total = count + o.count;
    const double delta = o.mean - mean;
    mean += delta * o.count / total;
    m2 += o.m2 + delta * delta * count * o.count / total;
    count = total;
  }
};

inline constexpr Index kMonteCarloChunk = Index{1} << 15;

/// Chunk c draws from Rng::stream(seed, c); chunks are merged in index
/// order, so the result does not depend on the thread count.
inline MonteCarloEstimate monte_carlo(const GaussianSpec& mu, const GaussianSpec& nu, const CorrelationDiagonal& rho,
                                      const Vec& weights, Index n, std::uint64_t seed) {
  require_pair(mu, nu, rho);
  if (n < 1000) fail(ErrorCode::BadParameter, "Monte Carlo needs at least 1000 samples");
  const Index dim = mu.dim();
  const Index chunks = (n + kMonteCarloChunk - 1) / kMonteCarloChunk;
  std::vector<RunningMoments> moments(static_cast<std::size_t>(chunks));

  auto run_chunk = [&](Index c) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(c));
    const Index begin = c * kMonteCarloChunk;
    const Index end = std::min(n, begin + kMonteCarloChunk);
    Vec eps_x(dim), eps_y(dim);
    RunningMoments acc;
    for (Index i = begin; i < end; ++i) {
      draw_correlated_noise(rng, rho.values(), eps_x, eps_y);
      const Vec diff = (mu.mean() + mu.chol().matrix() * eps_x) - (nu.mean() + nu.chol().matrix() * eps_y);
      acc.push(diff.cwiseAbs2().dot(weights));
    }
    moments[static_cast<std::size_t>(c)] = acc;
  };

  const Index workers = std::max<Index>(1, std::min<Index>(chunks, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (Index c = w; c < chunks; c += workers) run_chunk(c);
    });
  }
  for (auto& th : pool) th.join();

  RunningMoments total;
  for (const auto& part : moments) total.merge(part);
  MonteCarloEstimate est;
  est.estimate = total.mean;
  est.samples = n;
  est.standard_error = std::sqrt(total.m2 / (total.count - 1.0) / total.count);
  return est;
}

}  // namespace detail

/// Sampled E|X - Y|^2 under pi^P built from correlated noise. Deterministic
/// for a fixed seed.
inline MonteCarloEstimate monte_carlo_cost(const GaussianSpec& mu, const GaussianSpec& nu,
                                           const CorrelationDiagonal& rho, Index n, std::uint64_t seed) {
  return detail::monte_carlo(mu, nu, rho, Vec::Ones(mu.dim()), n, seed);
}

/// Weighted variant: sampled E[sum_t w_t (X_t - Y_t)^2].
inline MonteCarloEstimate monte_carlo_cost(const GaussianSpec& mu, const GaussianSpec& nu,
                                           const CorrelationDiagonal& rho, const WeightDiagonal& w, Index n,
                                           std::uint64_t seed) {
  detail::require_same_dim(w.dim(), mu.dim(), "weights vs dimension");
  return detail::monte_carlo(mu, nu, rho, w.values(), n, seed);
}

struct GridSearchResult {
  CorrelationDiagonal best_rho;
  double best_cost = 0.0;
};

/// Minimizes the pi^P cost over rho in {-1, -1 + 2/(steps-1), ..., 1}^N.
inline GridSearchResult rho_grid_search(const GaussianSpec& mu, const GaussianSpec& nu, Index steps) {
  detail::require_same_dim(mu.dim(), nu.dim(), "grid search");
  if (steps < 3) detail::fail(ErrorCode::BadParameter, "grid needs at least 3 steps");
  const Index n = mu.dim();
  if (static_cast<double>(n) * std::log2(static_cast<double>(steps)) > 30.0) {
    detail::fail(ErrorCode::TooLarge, "grid of " + std::to_string(steps) + "^" + std::to_string(n) + " points");
  }
  // The cost is affine in rho: cost(rho) = cost(0) - 2 rho . diag(Lᵀ M).
  const double base = coupling_cost(mu, nu, CorrelationDiagonal::zeros(n));
  const Vec cross = diag_cross(mu.chol(), nu.chol());
  auto level = [steps](Index k) { return -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(steps - 1); };

  std::vector<Index> digits(static_cast<std::size_t>(n), 0);
  Vec rho(n);
  Vec best_rho = Vec::Constant(n, -1.0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    for (Index t = 0; t < n; ++t) rho[t] = level(digits[static_cast<std::size_t>(t)]);
    const double cost = base - 2.0 * rho.dot(cross);
    if (cost < best) {
      best = cost;
      best_rho = rho;
    }
    Index t = 0;
    while (t < n && ++digits[static_cast<std::size_t>(t)] == steps) digits[static_cast<std::size_t>(t++)] = 0;
    if (t == n) break;
  }
  return GridSearchResult{CorrelationDiagonal(std::move(best_rho)), best};
}

}  // namespace aot
