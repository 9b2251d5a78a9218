#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "aot/aot.hpp"

namespace aot::cli {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class Suite {
 public:
  Suite(std::string prefix, double scale) : prefix_(std::move(prefix)), scale_(scale) {}

  void bound(const std::string& name, double value, double tolerance, std::string detail = {}) {
    const double tol = tolerance * scale_;
    checks_.push_back(CheckResult{prefix_ + name, value <= tol, false, value, tol, std::move(detail)});
  }

  void skip(const std::string& name, std::string reason) {
    checks_.push_back(CheckResult{prefix_ + name, true, true, 0.0, 0.0, std::move(reason)});
  }

  std::vector<CheckResult> take() { return std::move(checks_); }

 private:
  std::string prefix_;
  double scale_;
  std::vector<CheckResult> checks_;
};

// Mid-quantile nodes understate each conditional variance by the factor
// (1 - deficit). Band: max(0.05, 2 deficit) (1 + AW2^2).
double oracle_tolerance(Index m, double aw_squared) {
  const Vec z = quantile_nodes(m);
  const double deficit = 1.0 - z.squaredNorm() / static_cast<double>(m);
  return std::max(0.05, 2.0 * deficit) * (1.0 + aw_squared);
}

void check_oracle(Suite& suite, const GaussianSpec& mu, const GaussianSpec& nu, double aw_squared,
                  VerifyLevel level) {
  const Index n = mu.dim();
  if (n > 3) {
    suite.skip("oracle", "discrete oracle limited to N <= 3");
    return;
  }
  const bool full = level == VerifyLevel::full;
  const Index m = n <= 2 ? (full ? 200 : 50) : (full ? 40 : 16);
  const DiscreteDppResult result = dpp_solve_discrete(mu, nu, GridSpec{m, 4});
  suite.bound("oracle", std::abs(result.value - aw_squared), oracle_tolerance(m, aw_squared),
              "m = " + std::to_string(m) + ", oracle = " + fmt(result.value) + ", closed form = " + fmt(aw_squared));
  if (result.assignment_improvements > 0) {
    suite.bound("oracle_pairing", result.max_assignment_gain, 1e-9 * (1.0 + aw_squared),
                "assignment beat the monotone pairings");
  }
  if (full && n <= 2) {
    double previous = std::numeric_limits<double>::infinity();
    double worst_increase = 0.0;
    std::string trail;
    for (Index grid : {Index{50}, Index{100}, Index{200}}) {
      const double err = std::abs(dpp_solve_discrete(mu, nu, GridSpec{grid, 0}).value - aw_squared);
      if (std::isfinite(previous)) worst_increase = std::max(worst_increase, err - previous);
      previous = err;
      trail += (trail.empty() ? "" : ", ") + fmt(err);
    }
    suite.bound("oracle_refinement", worst_increase, 1e-3, "errors at m = 50, 100, 200: " + trail);
  }
}

void check_monte_carlo(Suite& suite, const ProblemSpec& problem, const VerifyOptions& options) {
  const GaussianSpec& mu = problem.mu;
  const GaussianSpec& nu = problem.nu;
  const Index samples = options.level == VerifyLevel::full ? 1'000'000 : 100'000;

  std::vector<std::pair<std::string, CorrelationDiagonal>> cases{
      {"optimal", optimal_sign(mu.chol(), nu.chol()).rho}, {"ones", CorrelationDiagonal::ones(mu.dim())}};
  if (problem.rho) cases.emplace_back("spec_rho", *problem.rho);

  std::uint64_t stream = 0;
  for (const auto& [label, rho] : cases) {
    const double exact = coupling_cost(mu, nu, rho);
    const MonteCarloEstimate est = monte_carlo_cost(mu, nu, rho, samples, splitmix64(options.seed + ++stream));
    suite.bound("monte_carlo_" + label, std::abs(est.estimate - exact),
                4.0 * est.standard_error + 1e-9 * (1.0 + exact),
                "estimate = " + fmt(est.estimate) + ", se = " + fmt(est.standard_error) + ", exact = " + fmt(exact));
  }
  if (problem.weights) {
    const WeightDiagonal& w = *problem.weights;
    const double exact = weighted_bicausal_value(mu, nu, w);
    const CorrelationDiagonal rho = optimal_sign(mu.chol(), nu.chol(), w).rho;
    const MonteCarloEstimate est = monte_carlo_cost(mu, nu, rho, w, samples, splitmix64(options.seed + ++stream));
    suite.bound("monte_carlo_weighted", std::abs(est.estimate - exact),
                4.0 * est.standard_error + 1e-9 * (1.0 + exact),
                "estimate = " + fmt(est.estimate) + ", se = " + fmt(est.standard_error) + ", exact = " + fmt(exact));
  }
}

void check_recursion(Suite& suite, const GaussianSpec& mu, const GaussianSpec& nu, const VerifyOptions& options) {
  const Index n = mu.dim();
  const Index quad = options.level == VerifyLevel::full ? 512 : 128;
  const Matrix xs = sample(mu, 1, splitmix64(options.seed ^ 0x51ULL));
  const Matrix ys = sample(nu, 1, splitmix64(options.seed ^ 0x52ULL));
  double worst = 0.0;
  for (Index t = 0; t < n; ++t) {
    const Vec x = xs.row(0).head(t).transpose();
    const Vec y = ys.row(0).head(t).transpose();
    const RecursionReport r = dpp_recursion_check(mu, nu, BlockIndex(t), x, y, quad);
    worst = std::max(worst, r.abs_error / (1.0 + r.closed_form));
  }
  suite.bound("dpp_recursion", worst, 1e-9, "largest |one step - V_t| / (1 + V_t) over t = 0.." + std::to_string(n - 1));
}

void check_geodesics(Suite& suite, const GaussianSpec& mu, const GaussianSpec& nu) {
  const GeodesicCheck kr = geodesic_check(mu, nu, GeodesicKind::knothe_rosenblatt, 0.25, 0.75);
  suite.bound("geodesic_kr_speed", kr.difference, 1e-8 * (1.0 + kr.expected));

  const Vec cross = diag_cross(mu.chol(), nu.chol());
  if (cross.minCoeff() <= 0.0) {
    suite.skip("geodesic_adapted_speed", "diag(L^T M) has non-positive entries");
    return;
  }
  const GeodesicCheck aw = geodesic_check(mu, nu, GeodesicKind::adapted, 0.25, 0.75);
  if (aw.status == CheckStatus::skipped) {
    suite.skip("geodesic_adapted_speed", aw.reason);
  } else {
    suite.bound("geodesic_adapted_speed", aw.difference, 1e-8 * (1.0 + aw.expected));
  }
}

}  // namespace

std::vector<CheckResult> verify_problem(const ProblemSpec& problem, const VerifyOptions& options,
                                        const std::string& prefix) {
  const GaussianSpec& mu = problem.mu;
  const GaussianSpec& nu = problem.nu;
  const Index n = mu.dim();
  Suite suite(prefix, options.tolerance_scale);

  const DistanceReport w = wasserstein2(mu, nu);
  const DistanceReport kr = kr2(mu, nu);
  const DistanceReport aw = aw2(mu, nu);
  const double trace_scale = std::max(1.0, mu.cov().trace() + nu.cov().trace());

  suite.bound("ordering", std::max(w.value - aw.value, aw.value - kr.value), 1e-9 * (1.0 + aw.value),
              "w2 = " + fmt(w.value) + ", aw2 = " + fmt(aw.value) + ", kr2 = " + fmt(kr.value));

  const Vec cross = diag_cross(mu.chol(), nu.chol());
  const double negative = -cross.cwiseMin(0.0).sum();
  const double d_kr = kr_distance(mu.chol(), nu.chol());
  suite.bound("abw_kr_identity",
              std::abs(abw_distance_squared(mu.chol(), nu.chol()) - (d_kr * d_kr - 4.0 * negative)),
              1e-9 * trace_scale);

  const SignSelection selection = optimal_sign(mu.chol(), nu.chol());
  suite.bound("optimal_sign_cost", std::abs(coupling_cost(mu, nu, selection.rho) - aw.squared_value),
              1e-9 * (1.0 + aw.squared_value));
  if (static_cast<double>(n) * std::log2(5.0) <= 30.0) {
    const GridSearchResult grid = rho_grid_search(mu, nu, 5);
    suite.bound("rho_grid_search", aw.squared_value - grid.best_cost, 1e-9 * (1.0 + aw.squared_value),
                "best grid cost = " + fmt(grid.best_cost));
  } else {
    suite.skip("rho_grid_search", "grid too large");
  }

  const AdaptedMap map = aw_map(mu, nu);
  suite.bound("aw_map_pushforward", (map.map.pushforward_cov(mu.cov()) - nu.cov()).norm(),
              1e-8 * (1.0 + nu.cov().norm()));
  suite.bound("aw_map_cost", std::abs(coupling_cost(mu, nu, map.selection.rho) - aw.squared_value),
              1e-9 * (1.0 + aw.squared_value));

  const JointGaussianCoupling pi = coupling_pi_p(mu, nu, selection.rho);
  suite.bound("causality_defect", causality_defect(pi), 1e-6);

  {
    Rng rng(splitmix64(options.seed ^ 0x7A1ULL));
    const Index trials = options.level == VerifyLevel::full ? 1000 : 100;
    const double d_ab = abw_distance(mu.chol(), nu.chol());
    double worst = 0.0;
    for (Index k = 0; k < trials; ++k) {
      const CholeskyFactor c = cholesky(random_spd(rng, n));
      const double d_ac = abw_distance(mu.chol(), c);
      const double d_cb = abw_distance(c, nu.chol());
      worst = std::max({worst, d_ab - d_ac - d_cb, d_ac - d_ab - d_cb, d_cb - d_ab - d_ac});
    }
    suite.bound("abw_triangle", worst, 1e-9, std::to_string(trials) + " random third laws");
    suite.bound("abw_symmetry", std::abs(d_ab - abw_distance(nu.chol(), mu.chol())), 1e-9);
  }

  check_recursion(suite, mu, nu, options);
  check_oracle(suite, mu, nu, aw.squared_value, options.level);
  check_monte_carlo(suite, problem, options);
  check_geodesics(suite, mu, nu);
  return suite.take();
}

std::vector<ProblemSpec> random_problems(Index count, std::uint64_t seed) {
  if (count < 1) detail::fail(ErrorCode::BadParameter, "random problem count must be at least 1");
  Rng rng(seed);
  std::vector<ProblemSpec> out;
  for (Index i = 0; i < count; ++i) {
    const Index n = rng.uniform() < 0.5 ? 2 : 3;
    GaussianSpec mu = random_gaussian(rng, n);
    GaussianSpec nu = random_gaussian(rng, n);
    out.push_back(ProblemSpec{std::move(mu), std::move(nu), std::nullopt, std::nullopt});
  }
  return out;
}

Json to_json(const CheckResult& check) {
  Json out{{"name", check.name}, {"passed", check.passed}, {"skipped", check.skipped}};
  if (!check.skipped) {
    out["value"] = check.value;
    out["tolerance"] = check.tolerance;
  }
  if (!check.detail.empty()) out["detail"] = check.detail;
  return out;
}

}  // namespace aot::cli
