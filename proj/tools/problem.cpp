#include "problem.hpp"

#include <fstream>
#include <sstream>

namespace aot::cli {

namespace {

const Json& require_field(const Json& node, const std::string& key, const std::string& context) {
  if (!node.is_object()) throw ParseError(context + " must be an object");
  auto it = node.find(key);
  if (it == node.end()) throw ParseError(context + " is missing field \"" + key + "\"");
  return *it;
}

double number_from_json(const Json& node, const std::string& field) {
  if (!node.is_number()) throw ParseError(field + " must be a number");
  return node.get<double>();
}

}  // namespace

Vec vec_from_json(const Json& node, const std::string& field) {
  if (!node.is_array()) throw ParseError(field + " must be an array of numbers");
  Vec v(static_cast<Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    v[static_cast<Index>(i)] = number_from_json(node[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

Matrix matrix_from_json(const Json& node, const std::string& field) {
  if (!node.is_array() || node.empty()) throw ParseError(field + " must be a non-empty array of rows");
  const std::size_t rows = node.size();
  const std::size_t cols = node[0].is_array() ? node[0].size() : 0;
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string row_name = field + "[" + std::to_string(i) + "]";
    const Vec row = vec_from_json(node[i], row_name);
    if (static_cast<std::size_t>(row.size()) != cols) throw ParseError(row_name + " has inconsistent length");
    m.row(static_cast<Index>(i)) = row.transpose();
  }
  return m;
}

GaussianSpec gaussian_from_json(const Json& node, const std::string& field) {
  if (!node.is_object()) throw ParseError(field + " must be an object");
  const bool has_cov = node.contains("cov");
  const bool has_chol = node.contains("chol");
  if (!has_cov && !has_chol) throw ParseError(field + " needs \"cov\" or \"chol\"");

  std::optional<Matrix> cov;
  std::optional<Matrix> chol;
  if (has_cov) cov = matrix_from_json(node["cov"], field + ".cov");
  if (has_chol) chol = matrix_from_json(node["chol"], field + ".chol");
  const Index n = chol ? chol->rows() : cov->rows();
  Vec mean = node.contains("mean") ? vec_from_json(node["mean"], field + ".mean") : Vec::Zero(n);

  if (chol && cov) return GaussianSpec::from_parts(std::move(mean), *cov, std::move(*chol));
  if (chol) return GaussianSpec::from_cholesky(std::move(mean), std::move(*chol));
  return GaussianSpec(std::move(mean), *cov);
}

ProblemSpec parse_problem(const Json& doc) {
  if (!doc.is_object()) throw ParseError("problem document must be an object");
  GaussianSpec mu = gaussian_from_json(require_field(doc, "mu", "problem"), "mu");
  GaussianSpec nu = gaussian_from_json(require_field(doc, "nu", "problem"), "nu");
  detail::require_same_dim(mu.dim(), nu.dim(), "mu vs nu");
  ProblemSpec problem{std::move(mu), std::move(nu), std::nullopt, std::nullopt};
  if (doc.contains("weights") && !doc["weights"].is_null()) {
    problem.weights.emplace(vec_from_json(doc["weights"], "weights"));
    detail::require_same_dim(problem.weights->dim(), problem.mu.dim(), "weights vs dimension");
  }
  if (doc.contains("rho") && !doc["rho"].is_null()) {
    problem.rho.emplace(vec_from_json(doc["rho"], "rho"));
    detail::require_same_dim(problem.rho->dim(), problem.mu.dim(), "rho vs dimension");
  }
  return problem;
}

ProblemSpec parse_problem_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return parse_problem(doc);
}

ProblemSpec load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_problem_text(buffer.str());
}

Vec parse_number_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ParseError("not a number: \"" + item + "\"");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) throw ParseError("not a number: \"" + item + "\"");
    values.push_back(value);
  }
  if (values.empty()) throw ParseError("empty number list");
  return Eigen::Map<const Vec>(values.data(), static_cast<Index>(values.size()));
}

Json to_json(const Vec& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vec(m.row(i).transpose())));
  return out;
}

Json to_json(const GaussianSpec& g) {
  return Json{{"mean", to_json(g.mean())}, {"cov", to_json(g.cov())}, {"chol", to_json(g.chol().matrix())}};
}

Json problem_json(const ProblemSpec& problem) {
  Json out = Json::object();
  out["mu"] = to_json(problem.mu);
  out["nu"] = to_json(problem.nu);
  if (problem.weights) out["weights"] = to_json(problem.weights->values());
  if (problem.rho) out["rho"] = to_json(problem.rho->values());
  return out;
}

}  // namespace aot::cli
