#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "aot/aot.hpp"
#include "test_support.hpp"

using namespace aot;

TEST(Assignment, MatchesBruteForce) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 1 + trial % 7;
    Matrix cost(n, n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) cost(i, j) = std::floor(10.0 * rng.uniform()) + rng.uniform();
    }
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    double best = std::numeric_limits<double>::infinity();
    do {
      double c = 0.0;
      for (Index i = 0; i < n; ++i) c += cost(i, perm[static_cast<std::size_t>(i)]);
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const Assignment a = solve_assignment(cost);
    EXPECT_NEAR(a.cost, best, 1e-9);
    std::vector<Index> cols = a.column_of_row;
    std::sort(cols.begin(), cols.end());
    for (Index i = 0; i < n; ++i) EXPECT_EQ(cols[static_cast<std::size_t>(i)], i);
  }
}

TEST(Quantiles, NodesAreSymmetric) {
  const Vec z = quantile_nodes(101);
  for (Index k = 0; k < z.size(); ++k) EXPECT_EQ(z[k], -z[z.size() - 1 - k]);
  EXPECT_EQ(z[50], 0.0);
  EXPECT_LT(z.squaredNorm() / 101.0, 1.0);
  const Vec u = normalized_quantile_nodes(64);
  EXPECT_NEAR(u.squaredNorm() / 64.0, 1.0, 1e-14);
}

TEST(ValueFunction, RootValueIsAwSquared) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + trial % 5;
    const GaussianSpec mu = random_gaussian(rng, n);
    const GaussianSpec nu = random_gaussian(rng, n);
    EXPECT_NEAR(value_function(mu, nu, BlockIndex(0), Vec(), Vec()).value, aw2(mu, nu).squared_value, 1e-9);
  }
}

TEST(Recursion, ExampleCompare) {
  const RecursionReport r = dpp_recursion_check(aot::testing::example_mu(), aot::testing::example_nu(),
                                                BlockIndex(0), Vec(), Vec(), 512);
  EXPECT_NEAR(r.closed_form, 4.0, 1e-12);
  EXPECT_NEAR(r.one_step, 4.0, 1e-9);
  EXPECT_NEAR(r.comonotone, 16.0, 1e-9);
  EXPECT_LT(r.alpha, 0.0);
}

TEST(Recursion, RandomStepsAgree) {
  Rng rng(19);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = 2 + trial % 4;
    const GaussianSpec mu = random_gaussian(rng, n);
    const GaussianSpec nu = random_gaussian(rng, n);
    const Index t = trial % n;
    const RecursionReport r =
        dpp_recursion_check(mu, nu, BlockIndex(t), rng.normal_vector(t), rng.normal_vector(t), 64);
    EXPECT_LE(r.abs_error, 1e-9 * (1 + r.closed_form));
    EXPECT_LE(r.one_step, std::max(r.comonotone, r.counter_monotone) + 1e-12);
  }
  EXPECT_THROW(dpp_recursion_check(GaussianSpec::standard(2), GaussianSpec::standard(2), BlockIndex(2),
                                   Vec::Zero(2), Vec::Zero(2), 64),
               Error);
}

TEST(DiscreteDpp, ExampleRefines) {
  const GaussianSpec mu = aot::testing::example_mu();
  const GaussianSpec nu = aot::testing::example_nu();
  double previous = 1e9;
  for (Index m : {25, 50, 100}) {
    const DiscreteDppResult r = dpp_solve_discrete(mu, nu, GridSpec{m, 4});
    const double err = std::abs(r.value - 4.0);
    EXPECT_LT(err, previous);
    EXPECT_EQ(r.assignment_improvements, 0);
    previous = err;
  }
  EXPECT_LT(previous, 0.1);
}

TEST(DiscreteDpp, ThreePeriods) {
  Rng rng(44);
  const GaussianSpec mu = random_gaussian(rng, 3);
  const GaussianSpec nu = random_gaussian(rng, 3);
  const double exact = aw2(mu, nu).squared_value;
  const DiscreteDppResult r = dpp_solve_discrete(mu, nu, GridSpec{24, 2});
  EXPECT_LE(std::abs(r.value - exact), 0.1 * (1 + exact));
}

TEST(DiscreteDpp, Limits) {
  EXPECT_THROW(dpp_solve_discrete(GaussianSpec::standard(4), GaussianSpec::standard(4), GridSpec{4, 0}), Error);
  EXPECT_THROW(dpp_solve_discrete(GaussianSpec::standard(2), GaussianSpec::standard(2), GridSpec{1, 0}), Error);
}

TEST(MonteCarlo, DeterministicAndAccurate) {
  const GaussianSpec mu = aot::testing::example_mu();
  const GaussianSpec nu = aot::testing::example_nu();
  const CorrelationDiagonal rho = CorrelationDiagonal::ones(2);
  const MonteCarloEstimate a = monte_carlo_cost(mu, nu, rho, 100000, 5);
  const MonteCarloEstimate b = monte_carlo_cost(mu, nu, rho, 100000, 5);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.standard_error, b.standard_error);
  EXPECT_LE(std::abs(a.estimate - 16.0), 4.0 * a.standard_error);
  EXPECT_THROW(monte_carlo_cost(mu, nu, rho, 10, 5), Error);
}

TEST(GridSearch, FindsOptimalSigns) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 1 + trial % 4;
    const GaussianSpec mu = random_gaussian(rng, n);
    const GaussianSpec nu = random_gaussian(rng, n);
    const GridSearchResult g = rho_grid_search(mu, nu, 5);
    EXPECT_NEAR(g.best_cost, aw2(mu, nu).squared_value, 1e-9 * (1 + g.best_cost));
    EXPECT_EQ(g.best_rho.values(), optimal_sign(mu.chol(), nu.chol()).rho.values());
  }
}
