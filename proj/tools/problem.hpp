#pragma once

// Problem documents for the command-line tool.
//
//   {
//     "mu":      {"mean": [0, 0], "cov": [[1, 2], [2, 5]]},
//     "nu":      {"mean": [0, 0], "chol": [[1, 0], [-2, 1]]},
//     "weights": [1, 1],      (optional)
//     "rho":     [-1, 1]      (optional)
//   }
//
// Each law takes "cov", "chol" or both; the factor takes precedence and must
// match the covariance when both are present. "mean" defaults to zero.
// Unknown keys are ignored, so result documents can be fed back as input.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "aot/couplings.hpp"
#include "aot/distances.hpp"
#include "aot/gauss.hpp"

namespace aot::cli {

using Json = nlohmann::ordered_json;

/// Malformed input: unreadable file, bad syntax, missing or mistyped fields.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemSpec {
  GaussianSpec mu;
  GaussianSpec nu;
  std::optional<WeightDiagonal> weights;
  std::optional<CorrelationDiagonal> rho;
};

Vec vec_from_json(const Json& node, const std::string& field);
Matrix matrix_from_json(const Json& node, const std::string& field);
GaussianSpec gaussian_from_json(const Json& node, const std::string& field);

ProblemSpec parse_problem(const Json& doc);
ProblemSpec parse_problem_text(const std::string& text);
ProblemSpec load_problem(const std::filesystem::path& path);

/// Comma-separated list of numbers, e.g. "-1,1" or "10, 100, 1000".
Vec parse_number_list(const std::string& text);

Json to_json(const Vec& v);
Json to_json(const Matrix& m);
/// {"mean", "cov", "chol"}; parses back to an identical GaussianSpec.
Json to_json(const GaussianSpec& g);
/// Echo of the problem in input format (mu, nu and the optional fields).
Json problem_json(const ProblemSpec& problem);

}  // namespace aot::cli
