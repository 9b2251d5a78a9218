// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "aot/aot.hpp"

using namespace aot;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

class Report {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && outcome_.passed) {
      outcome_.passed = false;
      first_failure_ = what;
    }
  }
  void note(const std::string& text) { notes_ << (notes_.tellp() > 0 ? "; " : "") << text; }

  Outcome finish() {
    outcome_.detail = notes_.str();
    if (!outcome_.passed) outcome_.detail = "first failure: " + first_failure_ + " | " + outcome_.detail;
    return outcome_;
  }

 private:
  Outcome outcome_;
  std::string first_failure_;
  std::ostringstream notes_;
};

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Matrix mat2(double a, double b, double c, double d) { return (Matrix(2, 2) << a, b, c, d).finished(); }

const GaussianSpec kCompareMu(Vec::Zero(2), mat2(1, 2, 2, 5));
const GaussianSpec kCompareNu(Vec::Zero(2), mat2(1, -2, -2, 5));

Outcome example_compare() {
  Report r;
  const auto start = std::chrono::steady_clock::now();
  const DistanceReport aw = aw2(kCompareMu, kCompareNu);
  const DistanceReport kr = kr2(kCompareMu, kCompareNu);
  const DistanceReport w = wasserstein2(kCompareMu, kCompareNu);
  const Vec cross = diag_cross(kCompareMu.chol(), kCompareNu.chol());
  const double elapsed = seconds_since(start);
  r.require(std::abs(aw.value - 2.0) <= 1e-12, "aw2 = 2");
  r.require(std::abs(kr.value - 4.0) <= 1e-12, "kr2 = 4");
  r.require(std::abs(w.value - 1.75) <= 0.01, "w2 = 1.75 +- 0.01");
  r.require(cross[0] == -3.0 && cross[1] == 1.0, "diag(L^T M) = (-3, 1)");
  r.require(elapsed < 1e-3, "runtime < 1 ms");
  r.note("aw2 = " + num(aw.value) + ", kr2 = " + num(kr.value) + ", w2 = " + num(w.value) + ", diag = (" +
         num(cross[0]) + ", " + num(cross[1]) + "), " + num(elapsed * 1e3) + " ms");
  return r.finish();
}

Outcome example_nonunique() {
  Report r;
  const auto start = std::chrono::steady_clock::now();
  const GaussianSpec mu(Vec::Zero(2), mat2(1, 1, 1, 2));
  const GaussianSpec nu(Vec::Zero(2), mat2(1, -1, -1, 2));
  const Vec cross = diag_cross(mu.chol(), nu.chol());
  const SignSelection s = optimal_sign(mu.chol(), nu.chol());
  const double aw = aw2(mu, nu).squared_value;
  const double kr = kr2(mu, nu).squared_value;
  const double elapsed = seconds_since(start);
  r.require(cross[0] == 0.0 && cross[1] == 1.0, "diag(L^T M) = (0, 1)");
  r.require(!s.unique && s.free_indices.size() == 1 && s.free_indices[0] == 0, "free index 1");
  r.require(std::abs(aw - kr) <= 1e-12, "aw2^2 = kr2^2");
  r.require(elapsed < 1e-3, "runtime < 1 ms");
  r.note("aw2^2 = " + num(aw) + ", kr2^2 = " + num(kr) + ", " + num(elapsed * 1e3) + " ms");
  return r.finish();
}

Outcome oracle_agreement() {
  Report r;
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::pair<GaussianSpec, GaussianSpec>> pairs{{kCompareMu, kCompareNu}};
  Rng rng(2024);
  for (int i = 0; i < 20; ++i) {
    GaussianSpec mu = random_gaussian(rng, 2);
    GaussianSpec nu = random_gaussian(rng, 2);
    pairs.emplace_back(std::move(mu), std::move(nu));
  }
  double worst_ratio = 0.0;
  int refinement_violations = 0;
  for (const auto& [mu, nu] : pairs) {
    const double exact = aw2(mu, nu).squared_value;
    std::vector<double> errors;
    for (Index m : {Index{50}, Index{100}, Index{200}}) {
      errors.push_back(std::abs(dpp_solve_discrete(mu, nu, GridSpec{m, 4}).value - exact));
    }
    const double tol = 0.05 * (1.0 + exact);
    r.require(errors.back() <= tol, "m = 200 within 0.05 (1 + aw2^2)");
    worst_ratio = std::max(worst_ratio, errors.back() / tol);
    if (errors[1] > errors[0] || errors[2] > errors[1]) ++refinement_violations;
  }
  const double elapsed = seconds_since(start);
  r.require(refinement_violations == 0, "errors non-increasing over m = 50, 100, 200");
  r.require(elapsed < 60.0, "runtime < 60 s");
  r.note(std::to_string(pairs.size()) + " pairs, worst error / tolerance = " + num(worst_ratio) +
         ", refinement violations = " + std::to_string(refinement_violations) + ", " + num(elapsed) + " s");
  return r.finish();
}

Outcome monte_carlo_agreement() {
  Report r;
  const auto start = std::chrono::steady_clock::now();
  const MonteCarloEstimate opt =
      monte_carlo_cost(kCompareMu, kCompareNu, optimal_sign(kCompareMu.chol(), kCompareNu.chol()).rho, 1'000'000, 1);
  const MonteCarloEstimate ones = monte_carlo_cost(kCompareMu, kCompareNu, CorrelationDiagonal::ones(2), 1'000'000, 2);
  r.require(std::abs(opt.estimate - 4.0) <= 4.0 * opt.standard_error, "optimal rho within 4 SE of 4");
  r.require(std::abs(ones.estimate - 16.0) <= 4.0 * ones.standard_error, "rho = (1, 1) within 4 SE of 16");

  Rng rng(99);
  int within = 0;
  const int triples = 50;
  for (int i = 0; i < triples; ++i) {
    const Index n = 2 + i % 4;
    const GaussianSpec mu = random_gaussian(rng, n);
    const GaussianSpec nu = random_gaussian(rng, n);
    Vec rho(n);
    for (Index t = 0; t < n; ++t) rho[t] = 2.0 * rng.uniform() - 1.0;
    const CorrelationDiagonal corr(rho);
    const MonteCarloEstimate est = monte_carlo_cost(mu, nu, corr, 200'000, 1000 + static_cast<std::uint64_t>(i));
    if (std::abs(est.estimate - coupling_cost(mu, nu, corr)) <= 4.0 * est.standard_error) ++within;
  }
  const double elapsed = seconds_since(start);
  r.require(within >= 0.95 * triples, ">= 95% of random triples within 4 SE");
  r.require(elapsed < 30.0, "runtime < 30 s");
  r.note("optimal: " + num(opt.estimate) + " +- " + num(opt.standard_error) + ", ones: " + num(ones.estimate) +
         " +- " + num(ones.standard_error) + ", random within 4 SE: " + std::to_string(within) + "/" +
         std::to_string(triples) + ", " + num(elapsed) + " s");
  return r.finish();
}

Outcome abw_kr_identity() {
  Report r;
  const auto start = std::chrono::steady_clock::now();
  Rng rng(5);
  double worst = 0.0;
  for (int i = 0; i < 10'000; ++i) {
    const Index n = 2 + i % 7;
    const CholeskyFactor l = cholesky(random_spd(rng, n));
    const CholeskyFactor m = cholesky(random_spd(rng, n));
    const Vec cross = diag_cross(l, m);
    const double d_kr = kr_distance(l, m);
    const double rhs = d_kr * d_kr - 4.0 * (-cross.cwiseMin(0.0).sum());
    worst = std::max(worst, std::abs(abw_distance_squared(l, m) - rhs));
  }
  const double elapsed = seconds_since(start);
  r.require(worst <= 1e-9, "identity within 1e-9");
  r.require(elapsed < 10.0, "runtime < 10 s");
  r.note("max deviation = " + num(worst) + ", " + num(elapsed) + " s");
  return r.finish();
}

Outcome ordering_and_metric() {
  Report r;
  const auto start = std::chrono::steady_clock::now();
  Rng rng(6);
  double worst_order = -1e300, worst_triangle = -1e300, worst_symmetry = 0.0;
  for (int i = 0; i < 10'000; ++i) {
    const Index n = 1 + i % 6;
    const GaussianSpec mu = random_gaussian(rng, n);
    const GaussianSpec nu = random_gaussian(rng, n);
    const double w = wasserstein2(mu, nu).value;
    const double aw = aw2(mu, nu).value;
    const double d_kr = kr_distance(mu.chol(), nu.chol());
    const double kr_bound = std::sqrt((mu.mean() - nu.mean()).squaredNorm() + d_kr * d_kr);
    worst_order = std::max({worst_order, w - aw, aw - kr_bound});

    const CholeskyFactor c = cholesky(random_spd(rng, n));
    const double d_ab = abw_distance(mu.chol(), nu.chol());
    const double d_ac = abw_distance(mu.chol(), c);
    const double d_cb = abw_distance(c, nu.chol());
    worst_triangle = std::max(worst_triangle, d_ab - d_ac - d_cb);
    worst_symmetry = std::max(worst_symmetry, std::abs(d_ab - abw_distance(nu.chol(), mu.chol())));
  }
  const double elapsed = seconds_since(start);
  r.require(worst_order <= 1e-9, "W2 <= AW2 <= KR bound");
  r.require(worst_triangle <= 1e-9, "triangle inequality");
  r.require(worst_symmetry <= 1e-9, "symmetry");
  r.require(elapsed < 30.0, "runtime < 30 s");
  r.note("max ordering excess = " + num(worst_order) + ", max triangle excess = " + num(worst_triangle) +
         ", max asymmetry = " + num(worst_symmetry) + ", " + num(elapsed) + " s");
  return r.finish();
}

Outcome local_coincidence() {
  Report r;
  Rng rng(7);
  double worst = 0.0;
  int shrinks = 0;
  for (int i = 0; i < 1000; ++i) {
    const Index n = 2 + i % 5;
    const GaussianSpec mu = random_gaussian(rng, n);
    Matrix e = random_spd(rng, n, 0.0) - random_spd(rng, n, 0.0);
    e = (e + e.transpose()) / 2.0;
    double eps = 1e-2;
    while (true) {
      const Matrix b = mu.cov() + eps * e;
      const Eigen::SelfAdjointEigenSolver<Matrix> solver(b, Eigen::EigenvaluesOnly);
      if (solver.eigenvalues().minCoeff() > 1e-6 * b.diagonal().maxCoeff()) {
        const GaussianSpec nu(rng.normal_vector(n), b);
        if (diag_cross(mu.chol(), nu.chol()).minCoeff() > 0.0) {
          const double d_kr = kr_distance(mu.chol(), nu.chol());
          const double expected = (mu.mean() - nu.mean()).squaredNorm() + d_kr * d_kr;
          worst = std::max(worst, std::abs(aw2(mu, nu).squared_value - expected));
          break;
        }
      }
      eps /= 2.0;
      ++shrinks;
    }
  }
  r.require(worst <= 1e-9, "aw2^2 = |a - b|^2 + d_KR^2");
  r.note("max deviation = " + num(worst) + ", eps halvings = " + std::to_string(shrinks));
  return r.finish();
}

Outcome geodesic_property() {
  Report r;
  Rng rng(8);
  double worst = 0.0;
  int pairs = 0;
  int skipped = 0;
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  while (pairs < 1000) {
    const Index n = 2 + pairs % 3;
    const GaussianSpec mu = random_gaussian(rng, n);
    const GaussianSpec nu = random_gaussian(rng, n);
    if (diag_cross(mu.chol(), nu.chol()).minCoeff() <= 0.0) continue;
    ++pairs;
    for (double s : grid) {
      for (double t : grid) {
        const GeodesicCheck c = geodesic_check(mu, nu, GeodesicKind::adapted, s, t);
        if (c.status == CheckStatus::skipped) {
          ++skipped;
          continue;
        }
        worst = std::max(worst, c.difference);
      }
    }
  }
  r.require(skipped == 0, "no degenerate points when diag(L0^T L1) > 0");
  r.require(worst <= 1e-8, "constant speed within 1e-8");
  const GeodesicPoint mid = geodesic_point(kCompareMu, kCompareNu, 0.5, GeodesicKind::adapted);
  r.require(mid.degenerate, "adapted midpoint flagged degenerate");
  r.require((mid.cov - mat2(0, 0, 0, 5)).norm() <= 1e-12, "adapted midpoint cov = [[0, 0], [0, 5]]");
  r.note("max speed deviation = " + num(worst) + ", midpoint cov = [[" + num(mid.cov(0, 0)) + ", " +
         num(mid.cov(0, 1)) + "], [" + num(mid.cov(1, 0)) + ", " + num(mid.cov(1, 1)) + "]]");
  return r.finish();
}

Outcome incompleteness() {
  Report r;
  const double pi = std::numbers::pi;
  const IncompletenessPoint p = incompleteness_limit(pi / 2.0, pi / 4.0, 1000);
  r.require(std::abs(p.finite_value - (2.0 - std::sqrt(2.0))) <= 0.01, "n = 1000 within 0.01 of 2 - sqrt 2");
  double worst = -1e300;
  for (double theta : {pi / 2.0, pi / 4.0}) {
    for (Index n : {10, 100, 1000}) {
      for (Index m : {10, 100, 1000}) {
        const double d = aw2(incompleteness_measure(theta, n), incompleteness_measure(theta, m)).value;
        const double bound = std::sqrt(2.0) * std::abs(1.0 / static_cast<double>(n) - 1.0 / static_cast<double>(m));
        worst = std::max(worst, d - bound);
      }
    }
  }
  r.require(worst <= 1e-9, "Cauchy bound");
  r.note("AW2^2 at n = 1000: " + num(p.finite_value) + " (2 - sqrt 2 = " + num(2.0 - std::sqrt(2.0)) +
         "), max Cauchy excess = " + num(worst));
  return r.finish();
}

Outcome time_consistency() {
  Report r;
  Rng rng(10);
  double worst_block = 0.0;
  double worst_tower = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Index n = i % 2 == 0 ? 3 : 5;
    const GaussianSpec mu = random_gaussian(rng, n);
    const GaussianSpec nu = random_gaussian(rng, n);
    Vec rho_values(n);
    for (Index t = 0; t < n; ++t) rho_values[t] = 2.0 * rng.uniform() - 1.0;
    const CorrelationDiagonal rho(rho_values);
    const Index t = 1 + i % (n - 1);
    const Index f = n - t;
    const Matrix& l = mu.chol().matrix();
    const Matrix& m = nu.chol().matrix();

    const Vec full = diag_cross(mu.chol(), nu.chol());
    const Vec block = (l.bottomRightCorner(f, f).transpose() * m.bottomRightCorner(f, f)).diagonal();
    worst_block = std::max(worst_block, (full.tail(f) - block).cwiseAbs().maxCoeff());

    // Total cost = E|X_p - Y_p|^2 + E[cost of the conditional coupling of the futures].
    const JointGaussianCoupling pi = coupling_pi_p(mu, nu, rho);
    const Matrix& s = pi.cov;
    Matrix past_cov(2 * t, 2 * t);
    past_cov << s.block(0, 0, t, t), s.block(0, n, t, t), s.block(n, 0, t, t), s.block(n, n, t, t);
    const Vec gap = mu.mean().head(t) - nu.mean().head(t);
    const double past_cost = gap.squaredNorm() + past_cov.topLeftCorner(t, t).trace() +
                             past_cov.bottomRightCorner(t, t).trace() - 2.0 * past_cov.bottomLeftCorner(t, t).trace();

    // Conditional future means are affine in the pasts: c + H (x_p - a_p, y_p - b_p).
    Matrix h(f, 2 * t);
    h << l.bottomLeftCorner(f, t) * l.topLeftCorner(t, t).triangularView<Eigen::Lower>().solve(Matrix::Identity(t, t)),
        -m.bottomLeftCorner(f, t) * m.topLeftCorner(t, t).triangularView<Eigen::Lower>().solve(Matrix::Identity(t, t));
    const JointGaussianCoupling at_mean =
        condition_coupling(mu, nu, rho, BlockIndex(t), mu.mean().head(t), nu.mean().head(t));
    const GaussianSpec xf = GaussianSpec::from_cholesky(at_mean.mean.head(f), at_mean.x_factor.matrix());
    const GaussianSpec yf = GaussianSpec::from_cholesky(at_mean.mean.tail(f), at_mean.y_factor.matrix());
    const double future_cost = coupling_cost(xf, yf, at_mean.rho) + (h * past_cov * h.transpose()).trace();

    const double total = coupling_cost(mu, nu, rho);
    worst_tower = std::max(worst_tower, std::abs(total - past_cost - future_cost) / (1.0 + total));
  }
  r.require(worst_block <= 1e-12, "block identity within 1e-12");
  r.require(worst_tower <= 1e-9, "tower identity within 1e-9 (relative)");
  r.note("max block deviation = " + num(worst_block) + ", max relative tower deviation = " + num(worst_tower));
  return r.finish();
}

Outcome weighted_value() {
  Report r;
  Rng rng(11);
  double worst_reduction = 0.0;
  int within = 0;
  const int instances = 20;
  for (int i = 0; i < instances; ++i) {
    const Index n = 2 + i % 4;
    const GaussianSpec mu = random_gaussian(rng, n);
    const GaussianSpec nu = random_gaussian(rng, n);
    worst_reduction = std::max(
        worst_reduction, std::abs(weighted_bicausal_value(mu, nu, WeightDiagonal::ones(n)) - aw2(mu, nu).squared_value));

    Vec w(n);
    for (Index t = 0; t < n; ++t) w[t] = 0.2 + 3.0 * rng.uniform();
    const WeightDiagonal weights(w);
    const double exact = weighted_bicausal_value(mu, nu, weights);
    const CorrelationDiagonal rho = optimal_sign(mu.chol(), nu.chol(), weights).rho;
    const MonteCarloEstimate est =
        monte_carlo_cost(mu, nu, rho, weights, 1'000'000, 5000 + static_cast<std::uint64_t>(i));
    if (std::abs(est.estimate - exact) <= 4.0 * est.standard_error) ++within;
  }
  r.require(worst_reduction <= 1e-12, "W = I reduces to aw2^2");
  r.require(within == instances, "weighted value within 4 SE of Monte Carlo");
  r.note("max reduction deviation = " + num(worst_reduction) + ", within 4 SE: " + std::to_string(within) + "/" +
         std::to_string(instances));
  return r.finish();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"sign-flip example reproduction", example_compare},
      {"non-unique example reproduction", example_nonunique},
      {"oracle agreement", oracle_agreement},
      {"monte carlo agreement", monte_carlo_agreement},
      {"abw / kr identity", abw_kr_identity},
      {"ordering and metric properties", ordering_and_metric},
      {"local coincidence with kr", local_coincidence},
      {"geodesic property", geodesic_property},
      {"incompleteness demonstration", incompleteness},
      {"time consistency", time_consistency},
      {"weighted value", weighted_value},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = Outcome{false, std::string("exception: ") + e.what()};
    }
    const double elapsed = seconds_since(start);
    if (!outcome.passed) ++failures;
    std::printf("%s %2zu %-32s (%.3f s) %s\n", outcome.passed ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                elapsed, outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
