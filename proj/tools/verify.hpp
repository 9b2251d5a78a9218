#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "problem.hpp"

namespace aot::cli {

enum class VerifyLevel { fast, full };

struct CheckResult {
  std::string name;
  bool passed = true;
  bool skipped = false;
  double value = 0.0;      ///< the measured discrepancy (or value for one-sided checks)
  double tolerance = 0.0;  ///< pass iff value <= tolerance
  std::string detail;
};

struct VerifyOptions {
  VerifyLevel level = VerifyLevel::fast;
  std::uint64_t seed = 0;
  double tolerance_scale = 1.0;
};

/// Runs the consistency suite on one problem: distance ordering, the
/// ABW/KR identity, sign optimality, transport pushforward, bicausality,
/// the triangle inequality on random third laws, the one-step recursion,
/// agreement with the discrete oracle (N <= 3), Monte Carlo agreement and
/// constant speed along the geodesics. Names are prefixed with `prefix`.
std::vector<CheckResult> verify_problem(const ProblemSpec& problem, const VerifyOptions& options,
                                        const std::string& prefix);

/// `count` random problems with N in {2, 3}, drawn from `options.seed`.
std::vector<ProblemSpec> random_problems(Index count, std::uint64_t seed);

Json to_json(const CheckResult& check);

}  // namespace aot::cli
