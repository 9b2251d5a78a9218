#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "aot/aot.hpp"
#include "cli.hpp"
#include "figure.hpp"
#include "verify.hpp"

namespace aot::cli {

namespace {

struct GlobalFlags {
  std::uint64_t seed = 20240601;
  double tolerance_scale = 1.0;
  std::string output;
  std::string format = "json";
};

std::string format_4g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

bool is_scalar(const Json& j) { return !j.is_object() && !j.is_array(); }

bool is_flat_array(const Json& j) {
  if (!j.is_array()) return false;
  for (const auto& item : j) {
    if (!is_scalar(item)) return false;
  }
  return true;
}

std::string scalar_text(const Json& j) {
  if (j.is_number_integer()) return j.dump();
  if (j.is_number()) return format_4g(j.get<double>());
  if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
  if (j.is_string()) return j.get<std::string>();
  if (j.is_null()) return "-";
  return j.dump();
}

std::string flat_text(const Json& j) {
  std::string s = "[";
  for (std::size_t i = 0; i < j.size(); ++i) s += (i ? ", " : "") + scalar_text(j[i]);
  return s + "]";
}

void render_node(const Json& node, int indent, std::ostringstream& os) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) {
      if (is_scalar(value)) {
        os << pad << key << ": " << scalar_text(value) << '\n';
      } else if (is_flat_array(value)) {
        os << pad << key << ": " << flat_text(value) << '\n';
      } else {
        os << pad << key << ":\n";
        render_node(value, indent + 2, os);
      }
    }
  } else if (node.is_array()) {
    for (const auto& item : node) {
      if (is_scalar(item)) {
        os << pad << "- " << scalar_text(item) << '\n';
      } else if (is_flat_array(item)) {
        os << pad << flat_text(item) << '\n';
      } else {
        os << pad << "-\n";
        render_node(item, indent + 2, os);
      }
    }
  } else {
    os << pad << scalar_text(node) << '\n';
  }
}

void emit(const Json& doc, const GlobalFlags& flags, std::ostream& out) {
  const std::string text = flags.format == "human" ? render_human(doc) : doc.dump(2) + "\n";
  if (flags.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(flags.output);
  file << text;
  if (!file) throw ParseError("cannot write " + flags.output);
}

MapKind parse_map(const std::string& name) {
  if (name == "w" || name == "brenier") return MapKind::brenier;
  if (name == "kr" || name == "knothe_rosenblatt") return MapKind::knothe_rosenblatt;
  if (name == "aw" || name == "adapted_wasserstein") return MapKind::adapted_wasserstein;
  throw ParseError("unknown map \"" + name + "\" (expected w, kr or aw)");
}

GeodesicKind parse_kind(const std::string& name) {
  if (name == "w" || name == "wasserstein") return GeodesicKind::wasserstein;
  if (name == "kr" || name == "knothe_rosenblatt") return GeodesicKind::knothe_rosenblatt;
  if (name == "aw" || name == "adapted") return GeodesicKind::adapted;
  throw ParseError("unknown geodesic kind \"" + name + "\" (expected w, kr or aw)");
}

Json one_based(const std::vector<Index>& indices) {
  Json out = Json::array();
  for (Index i : indices) out.push_back(i + 1);
  return out;
}

Json selection_json(const SignSelection& s) {
  return Json{{"rho", to_json(s.rho.values())}, {"unique", s.unique}, {"free_indices", one_based(s.free_indices)}};
}

void append_problem(Json& doc, const ProblemSpec& problem) {
  const Json echo = problem_json(problem);
  for (const auto& [key, value] : echo.items()) doc[key] = value;
}

// dist -------------------------------------------------------------------

Json cmd_dist(const ProblemSpec& p) {
  const DistanceReport w = wasserstein2(p.mu, p.nu);
  const DistanceReport kr = kr2(p.mu, p.nu);
  const DistanceReport aw = aw2(p.mu, p.nu);
  const SignSelection selection = optimal_sign(p.mu.chol(), p.nu.chol());
  bool kr_optimal = true;
  for (Index t = 0; t < selection.rho.dim(); ++t) kr_optimal = kr_optimal && selection.rho[t] > 0.0;

  Json doc{{"command", "dist"},
           {"w2", w.value},
           {"kr2", kr.value},
           {"aw2", aw.value},
           {"w2_squared", w.squared_value},
           {"kr2_squared", kr.squared_value},
           {"aw2_squared", aw.squared_value},
           {"bw", bures_wasserstein(p.mu.cov(), p.nu.cov())},
           {"d_kr", kr_distance(p.mu.chol(), p.nu.chol())},
           {"d_abw", abw_distance(p.mu.chol(), p.nu.chol())},
           {"mean_term", aw.mean_term},
           {"diag_LtM", to_json(diag_cross(p.mu.chol(), p.nu.chol()))},
           {"kr_optimal", kr_optimal},
           {"aw_unique", selection.unique},
           {"free_indices", one_based(selection.free_indices)}};
  if (p.weights) {
    doc["weighted_value"] = weighted_bicausal_value(p.mu, p.nu, *p.weights);
    doc["weighted_selection"] = selection_json(optimal_sign(p.mu.chol(), p.nu.chol(), *p.weights));
  }
  append_problem(doc, p);
  return doc;
}

// coupling ---------------------------------------------------------------

Json cmd_coupling(ProblemSpec p, MapKind kind, const std::string& rho_text) {
  const Index n = p.mu.dim();
  detail::require_same_dim(n, p.nu.dim(), "mu vs nu");
  AffineTransportMap map;
  SignSelection selection = optimal_sign(p.mu.chol(), p.nu.chol());
  switch (kind) {
    case MapKind::brenier: map = brenier_map(p.mu, p.nu); break;
    case MapKind::knothe_rosenblatt: map = kr_map(p.mu, p.nu); break;
    case MapKind::adapted_wasserstein: map = aw_map(p.mu, p.nu).map; break;
  }
  if (!rho_text.empty()) {
    const Vec rho = parse_number_list(rho_text);
    detail::require_same_dim(rho.size(), n, "--rho vs dimension");
    p.rho.emplace(rho);
  }
  const CorrelationDiagonal rho = p.rho ? *p.rho : selection.rho;
  const JointGaussianCoupling pi = coupling_pi_p(p.mu, p.nu, rho);

  Json doc{{"command", "coupling"},
           {"map", Json{{"kind", std::string(to_string(map.kind))},
                        {"offset", to_json(map.offset)},
                        {"matrix", to_json(map.matrix)}}},
           {"sign_selection", selection_json(selection)},
           {"unique", selection.unique},
           {"free_indices", one_based(selection.free_indices)},
           {"coupling_rho", to_json(rho.values())},
           {"joint_mean", to_json(pi.mean)},
           {"joint_cov", to_json(pi.cov)},
           {"cost", coupling_cost(p.mu, p.nu, rho)},
           {"optimal_cost", aw2(p.mu, p.nu).squared_value},
           {"causality_defect", causality_defect(pi)}};
  if (p.weights) doc["weighted_cost"] = coupling_cost(p.mu, p.nu, rho, *p.weights);
  p.rho.emplace(rho);
  append_problem(doc, p);
  return doc;
}

// geodesic ---------------------------------------------------------------

Json point_json(const GeodesicPoint& pt) {
  Json j{{"t", pt.t},
         {"mean", to_json(pt.mean)},
         {"cov", to_json(pt.cov)},
         {"degenerate", pt.degenerate},
         {"min_eigenvalue", pt.min_eigenvalue}};
  if (!pt.degenerate) {
    try {
      j["chol"] = to_json(cholesky(pt.cov).matrix());
    } catch (const Error&) {
      j["chol"] = nullptr;
    }
  }
  return j;
}

std::vector<double> frame_times(Index frames) {
  if (frames < 2) detail::fail(ErrorCode::BadParameter, "--frames must be at least 2");
  std::vector<double> ts;
  for (Index k = 0; k < frames; ++k) ts.push_back(static_cast<double>(k) / static_cast<double>(frames - 1));
  return ts;
}

// demo-incompleteness ----------------------------------------------------

Json cmd_incompleteness(double theta, double theta_prime, const std::string& n_list) {
  const Vec raw = parse_number_list(n_list);
  std::vector<Index> ns;
  for (Index i = 0; i < raw.size(); ++i) {
    if (raw[i] != std::floor(raw[i]) || std::abs(raw[i]) > 1e12) {
      throw ParseError("--n-list entries must be integers");
    }
    ns.push_back(static_cast<Index>(raw[i]));
  }
  Json rows = Json::array();
  double limit = 0.0;
  for (Index n : ns) {
    const IncompletenessPoint pt = incompleteness_limit(theta, theta_prime, n);
    limit = pt.limit_value;
    rows.push_back(Json{{"n", n}, {"aw2_squared", pt.finite_value}, {"limit", pt.limit_value}});
  }
  Json cauchy = Json::array();
  for (std::size_t i = 0; i < ns.size(); ++i) {
    for (std::size_t k = i + 1; k < ns.size(); ++k) {
      const double d = aw2(incompleteness_measure(theta, ns[i]), incompleteness_measure(theta, ns[k])).value;
      const double bound =
          std::sqrt(2.0) * std::abs(1.0 / static_cast<double>(ns[i]) - 1.0 / static_cast<double>(ns[k]));
      cauchy.push_back(Json{{"n", ns[i]}, {"m", ns[k]}, {"aw2", d}, {"bound", bound}, {"holds", d <= bound + 1e-9}});
    }
  }
  return Json{{"command", "demo-incompleteness"}, {"theta", theta}, {"theta_prime", theta_prime},
              {"limit", limit},                   {"rows", rows},   {"cauchy", cauchy}};
}

// figure -----------------------------------------------------------------

Json figure_summary(const FigureData& figure, const std::string& kind, const std::string& svg,
                    const std::string& csv) {
  Json arrows = Json::array();
  Json degenerate = Json::array();
  for (const Panel& panel : figure.panels) {
    for (const Shape& s : panel.shapes) {
      if (s.kind == ShapeKind::arrow) {
        arrows.push_back(Json{{"label", s.label},
                              {"from", {s.points[0][0], s.points[0][1]}},
                              {"direction", {s.points[1][0] - s.points[0][0], s.points[1][1] - s.points[0][1]}}});
      }
      if (s.kind == ShapeKind::segment) degenerate.push_back(s.label);
    }
  }
  return Json{{"command", "figure"}, {"kind", kind},       {"svg", svg},
              {"csv", csv},          {"arrows", arrows}, {"degenerate_shapes", degenerate}};
}

}  // namespace

std::string render_human(const Json& doc) {
  std::ostringstream os;
  render_node(doc, 0, os);
  return os.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adapted (bicausal) optimal transport between Gaussian laws", "aot-gauss"};
  app.require_subcommand(1, 1);
  GlobalFlags flags;
  app.add_option("--seed", flags.seed, "Seed for random instances and Monte Carlo");
  app.add_option("--tolerance-scale", flags.tolerance_scale, "Multiplier on verification tolerances")
      ->check(CLI::PositiveNumber);
  app.add_option("--output", flags.output, "Write the document (or figure) to this path");
  app.add_option("--format", flags.format, "Output format")->check(CLI::IsMember({"json", "human"}));

  std::string spec_path;
  std::string map_name = "aw";
  std::string kind_name = "adapted";
  std::string rho_text;
  std::optional<double> t_value;
  Index frames = 5;
  std::string figure_path;
  Index random_count = 0;
  std::string level = "fast";
  double theta = std::numbers::pi / 2.0;
  double theta_prime = std::numbers::pi / 4.0;
  std::string n_list = "10,100,1000";
  std::string figure_kind = "contour_transport";
  Index grid_lines = 7;

  auto* dist = app.add_subcommand("dist", "Distances between the two laws");
  dist->add_option("spec", spec_path, "Problem file (JSON)")->required();

  auto* coupling = app.add_subcommand("coupling", "Transport map and correlated coupling");
  coupling->add_option("spec", spec_path, "Problem file (JSON)")->required();
  coupling->add_option("--map", map_name, "w, kr or aw");
  coupling->add_option("--rho", rho_text, "Comma-separated correlations for the coupling");

  auto* geodesic = app.add_subcommand("geodesic", "Points on an interpolating curve");
  geodesic->add_option("spec", spec_path, "Problem file (JSON)")->required();
  geodesic->add_option("--kind", kind_name, "w, kr or aw");
  auto* t_opt = geodesic->add_option("--t", t_value, "Single time in [0, 1]");
  geodesic->add_option("--frames", frames, "Number of equally spaced times")->excludes(t_opt);
  geodesic->add_option("--figure", figure_path, "Also write a filmstrip SVG");

  auto* verify = app.add_subcommand("verify", "Consistency checks against independent oracles");
  verify->add_option("spec", spec_path, "Problem file (JSON)");
  verify->add_option("--random", random_count, "Number of random problems instead of a file");
  verify->add_option("--level", level, "fast or full")->check(CLI::IsMember({"fast", "full"}));

  auto* demo = app.add_subcommand("demo-incompleteness", "Cauchy sequence without an adapted limit");
  demo->add_option("--theta", theta);
  demo->add_option("--theta-prime", theta_prime);
  demo->add_option("--n-list", n_list, "Comma-separated n values");

  auto* figure = app.add_subcommand("figure", "SVG figure with CSV sidecar");
  figure->add_option("spec", spec_path, "Problem file (JSON)")->required();
  figure->add_option("--kind", figure_kind, "contour_transport or interpolation_filmstrip")
      ->check(CLI::IsMember({"contour_transport", "interpolation_filmstrip"}));
  figure->add_option("--map", map_name, "w, kr or aw (contour_transport)");
  figure->add_option("--grid-lines", grid_lines, "Grid lines per direction (contour_transport)");
  figure->add_option("--frames", frames, "Frames per curve (interpolation_filmstrip)");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitParseError;
  }

  try {
    if (dist->parsed()) {
      emit(cmd_dist(load_problem(spec_path)), flags, out);
      return kExitOk;
    }
    if (coupling->parsed()) {
      emit(cmd_coupling(load_problem(spec_path), parse_map(map_name), rho_text), flags, out);
      return kExitOk;
    }
    if (geodesic->parsed()) {
      const ProblemSpec p = load_problem(spec_path);
      const GeodesicKind kind = parse_kind(kind_name);
      const std::vector<double> ts = t_value ? std::vector<double>{*t_value} : frame_times(frames);
      Json points = Json::array();
      bool tie_broken = false;
      for (double t : ts) {
        const GeodesicPoint pt = geodesic_point(p.mu, p.nu, t, kind);
        tie_broken = pt.tie_broken;
        points.push_back(point_json(pt));
      }
      Json doc{{"command", "geodesic"}, {"kind", std::string(to_string(kind))}, {"tie_broken", tie_broken},
               {"points", points}};
      if (!figure_path.empty()) {
        const FigureData fig = interpolation_filmstrip(p.mu, p.nu, {kind}, t_value ? 5 : frames);
        doc["figure"] = Json{{"svg", figure_path}, {"csv", write_figure(fig, figure_path).string()}};
      }
      append_problem(doc, p);
      emit(doc, flags, out);
      return kExitOk;
    }
    if (verify->parsed()) {
      std::vector<ProblemSpec> problems;
      if (random_count > 0) {
        if (!spec_path.empty()) throw ParseError("give either a spec file or --random, not both");
        problems = random_problems(random_count, flags.seed);
      } else if (!spec_path.empty()) {
        problems.push_back(load_problem(spec_path));
      } else {
        throw ParseError("verify needs a spec file or --random n");
      }
      const VerifyOptions options{level == "full" ? VerifyLevel::full : VerifyLevel::fast, flags.seed,
                                  flags.tolerance_scale};
      Json checks = Json::array();
      Json failures = Json::array();
      for (std::size_t i = 0; i < problems.size(); ++i) {
        const std::string prefix = problems.size() > 1 ? "instance" + std::to_string(i) + "." : "";
        for (const CheckResult& c : verify_problem(problems[i], options, prefix)) {
          checks.push_back(to_json(c));
          if (!c.passed) failures.push_back(c.name);
        }
      }
      const bool passed = failures.empty();
      Json doc{{"command", "verify"}, {"level", level},   {"seed", flags.seed}, {"instances", problems.size()},
               {"passed", passed},    {"failures", failures}, {"checks", checks}};
      if (problems.size() == 1 && random_count == 0) append_problem(doc, problems.front());
      emit(doc, flags, out);
      if (!passed) {
        for (const auto& name : failures) err << "FAILED: " << name.get<std::string>() << '\n';
      }
      return passed ? kExitOk : kExitVerificationFailed;
    }
    if (demo->parsed()) {
      emit(cmd_incompleteness(theta, theta_prime, n_list), flags, out);
      return kExitOk;
    }
    if (figure->parsed()) {
      if (flags.output.empty()) throw ParseError("figure needs --output <file.svg>");
      const ProblemSpec p = load_problem(spec_path);
      const FigureData fig =
          figure_kind == "contour_transport"
              ? contour_transport(p.mu, p.nu, parse_map(map_name), grid_lines)
              : interpolation_filmstrip(
                    p.mu, p.nu,
                    {GeodesicKind::wasserstein, GeodesicKind::knothe_rosenblatt, GeodesicKind::adapted}, frames);
      const std::filesystem::path csv = write_figure(fig, flags.output);
      const Json summary = figure_summary(fig, figure_kind, flags.output, csv.string());
      out << (flags.format == "human" ? render_human(summary) : summary.dump(2) + "\n");
      return kExitOk;
    }
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParseError;
  } catch (const Error& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kExitInvariantViolation;
  }
  err << "error: no command\n";
  return kExitParseError;
}

}  // namespace aot::cli
