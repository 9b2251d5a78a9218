#include "figure.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace aot::cli {

namespace {

constexpr int kOutlinePoints = 96;
constexpr std::array<double, 2> kLevels{1.0, 2.0};

void require_planar(Index dim) {
  if (dim != 2) {
    detail::fail(ErrorCode::UnsupportedDimension, "figures need N = 2, got N = " + std::to_string(dim));
  }
}

Point to_point(const Vec& v) { return {v[0], v[1]}; }

std::string level_name(double level) { return std::to_string(static_cast<int>(level)) + "sigma"; }

std::string format_number(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

Shape arrow(const Vec& from, const Vec& direction, std::string label, std::string style) {
  return Shape{ShapeKind::arrow, std::move(label), std::move(style), {to_point(from), to_point(from + direction)}};
}

// Lines {c_k v1 + s v2} and {s v1 + c_k v2}, |s| <= reach, about `center`.
std::vector<std::array<Vec, 2>> grid_segments(const Vec& center, const Matrix& basis, Index lines, double reach) {
  std::vector<std::array<Vec, 2>> out;
  for (Index k = 0; k < lines; ++k) {
    const double c = lines == 1 ? 0.0 : -reach + 2.0 * reach * static_cast<double>(k) / static_cast<double>(lines - 1);
    for (Index dir = 0; dir < 2; ++dir) {
      const Vec across = basis.col(dir);
      const Vec along = basis.col(1 - dir);
      out.push_back({center + c * across - reach * along, center + c * across + reach * along});
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(ShapeKind kind) noexcept {
  switch (kind) {
    case ShapeKind::ellipse: return "ellipse";
    case ShapeKind::segment: return "segment";
    case ShapeKind::grid_line: return "grid_line";
    case ShapeKind::arrow: return "arrow";
  }
  return "unknown";
}

std::string_view to_string(FigureKind kind) noexcept {
  switch (kind) {
    case FigureKind::contour_transport: return "contour_transport";
    case FigureKind::interpolation_filmstrip: return "interpolation_filmstrip";
  }
  return "unknown";
}

Shape ellipse_shape(const Vec& mean, const Matrix& cov, double level, std::string label, std::string style) {
  require_planar(mean.size());
  const Matrix sym = (cov + cov.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  const Vec values = solver.eigenvalues().cwiseMax(0.0);
  const Matrix& vectors = solver.eigenvectors();
  const double max_diag = sym.diagonal().maxCoeff();

  Shape shape{ShapeKind::ellipse, std::move(label), std::move(style), {}};
  if (!(max_diag > 0.0) || values[0] <= kPdTol * max_diag) {
    shape.kind = ShapeKind::segment;
    const Vec half = level * std::sqrt(values[1]) * vectors.col(1);
    shape.points = {to_point(mean - half), to_point(mean + half)};
    return shape;
  }
  for (int k = 0; k <= kOutlinePoints; ++k) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(k % kOutlinePoints) / kOutlinePoints;
    const Vec p = mean + level * (std::sqrt(values[0]) * std::cos(phi) * vectors.col(0) +
                                  std::sqrt(values[1]) * std::sin(phi) * vectors.col(1));
    shape.points.push_back(to_point(p));
  }
  return shape;
}

FigureData contour_transport(const GaussianSpec& mu, const GaussianSpec& nu, MapKind map, Index grid_lines) {
  require_planar(mu.dim());
  detail::require_same_dim(mu.dim(), nu.dim(), "figure laws");
  if (grid_lines < 0) detail::fail(ErrorCode::BadParameter, "grid line count must be non-negative");

  AffineTransportMap transport;
  switch (map) {
    case MapKind::brenier: transport = brenier_map(mu, nu); break;
    case MapKind::knothe_rosenblatt: transport = kr_map(mu, nu); break;
    case MapKind::adapted_wasserstein: transport = aw_map(mu, nu).map; break;
  }

  Matrix basis = Matrix::Identity(2, 2);
  std::array<std::string, 2> names{"e1", "e2"};
  if (map == MapKind::brenier) {
    basis = detail::spd_eigen(mu.cov()).vectors;
    names = {"v1", "v2"};
  }
  const std::string style(to_string(map));

  Panel source{"source", {}};
  Panel target{"target (" + style + ")", {}};
  const double reach = 2.0 * std::sqrt(mu.cov().diagonal().maxCoeff());
  for (const auto& seg : grid_segments(mu.mean(), basis, grid_lines, reach)) {
    source.shapes.push_back(Shape{ShapeKind::grid_line, "grid", "grid", {to_point(seg[0]), to_point(seg[1])}});
    target.shapes.push_back(
        Shape{ShapeKind::grid_line, "T grid", "grid", {to_point(transport(seg[0])), to_point(transport(seg[1]))}});
  }
  for (double level : kLevels) {
    source.shapes.push_back(ellipse_shape(mu.mean(), mu.cov(), level, "mu " + level_name(level), "source"));
    target.shapes.push_back(ellipse_shape(nu.mean(), nu.cov(), level, "nu " + level_name(level), "target"));
  }
  for (Index k = 0; k < 2; ++k) {
    const Vec v = basis.col(k);
    source.shapes.push_back(arrow(mu.mean(), v, names[static_cast<std::size_t>(k)], "source"));
    target.shapes.push_back(arrow(nu.mean(), transport.matrix * v, "T " + names[static_cast<std::size_t>(k)], style));
  }
  return FigureData{{std::move(source), std::move(target)}};
}

FigureData interpolation_filmstrip(const GaussianSpec& mu0, const GaussianSpec& mu1,
                                   const std::vector<GeodesicKind>& kinds, Index frames) {
  require_planar(mu0.dim());
  detail::require_same_dim(mu0.dim(), mu1.dim(), "figure laws");
  if (frames < 2) detail::fail(ErrorCode::BadParameter, "a filmstrip needs at least 2 frames");
  if (kinds.empty()) detail::fail(ErrorCode::BadParameter, "no interpolation kinds requested");

  std::vector<std::vector<GeodesicPoint>> curves;
  double widest = 0.0;
  for (GeodesicKind kind : kinds) {
    std::vector<GeodesicPoint> curve;
    for (Index k = 0; k < frames; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(frames - 1);
      curve.push_back(geodesic_point(mu0, mu1, t, kind));
      widest = std::max(widest, curve.back().cov.diagonal().maxCoeff());
    }
    curves.push_back(std::move(curve));
  }
  const double spacing = 2.0 * kLevels.back() * std::sqrt(widest) * 1.25;

  Panel panel{"interpolation", {}};
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const std::string style(to_string(kinds[c]));
    for (Index k = 0; k < frames; ++k) {
      const GeodesicPoint& p = curves[c][static_cast<std::size_t>(k)];
      Vec center = p.mean;
      center[0] += spacing * static_cast<double>(k);
      for (double level : kLevels) {
        const std::string label = style + " t=" + format_number("%.6g", p.t) + " " + level_name(level);
        panel.shapes.push_back(ellipse_shape(center, p.cov, level, label, style));
      }
    }
  }
  return FigureData{{std::move(panel)}};
}

std::string render_svg(const FigureData& figure) {
  constexpr double kHeight = 400.0;
  constexpr double kMargin = 30.0;
  struct Layout {
    double min_x, max_y, scale, width;
  };
  std::vector<Layout> layouts;
  double total_width = 0.0;
  for (const Panel& panel : figure.panels) {
    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = -min_x;
    for (const Shape& s : panel.shapes) {
      for (const Point& p : s.points) {
        min_x = std::min(min_x, p[0]);
        max_x = std::max(max_x, p[0]);
        min_y = std::min(min_y, p[1]);
        max_y = std::max(max_y, p[1]);
      }
    }
    if (!std::isfinite(min_x)) min_x = max_x = min_y = max_y = 0.0;
    const double dx = std::max(max_x - min_x, 1e-9);
    const double dy = std::max(max_y - min_y, 1e-9);
    const double width = std::clamp(kHeight * dx / dy, kHeight, 6.0 * kHeight);
    const double scale = std::min(width / dx, kHeight / dy);
    layouts.push_back({min_x, max_y, scale, width});
    total_width += width + 2.0 * kMargin;
  }

  std::ostringstream svg;
  auto num = [](double v) { return format_number("%.3f", v); };
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(total_width) << "\" height=\""
      << num(kHeight + 2.0 * kMargin) << "\">\n"
      << "<defs><marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"6\" "
         "markerHeight=\"6\" orient=\"auto-start-reverse\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"context-stroke\"/>"
         "</marker></defs>\n"
      << "<style>\n"
      << "  polyline, line { fill: none; stroke-width: 1.5; }\n"
      << "  .source { stroke: #000000; }\n"
      << "  .target { stroke: #000000; }\n"
      << "  .grid { stroke: #bbbbbb; stroke-width: 0.8; }\n"
      << "  .brenier, .wasserstein { stroke: #7f7f7f; }\n"
      << "  .knothe_rosenblatt { stroke: #d62728; stroke-dasharray: 6 3; }\n"
      << "  .adapted_wasserstein, .adapted { stroke: #1f77b4; stroke-width: 2; }\n"
      << "  text { font-family: sans-serif; font-size: 14px; }\n"
      << "</style>\n";

  double x0 = 0.0;
  for (std::size_t i = 0; i < figure.panels.size(); ++i) {
    const Panel& panel = figure.panels[i];
    const Layout& lay = layouts[i];
    auto sx = [&](double x) { return num(x0 + kMargin + (x - lay.min_x) * lay.scale); };
    auto sy = [&](double y) { return num(kMargin + (lay.max_y - y) * lay.scale); };
    svg << "<g>\n<text x=\"" << num(x0 + kMargin) << "\" y=\"20\">" << panel.title << "</text>\n";
    for (const Shape& s : panel.shapes) {
      if (s.kind == ShapeKind::arrow || s.kind == ShapeKind::segment || s.kind == ShapeKind::grid_line) {
        svg << "<line class=\"" << s.style << "\" x1=\"" << sx(s.points[0][0]) << "\" y1=\"" << sy(s.points[0][1])
            << "\" x2=\"" << sx(s.points[1][0]) << "\" y2=\"" << sy(s.points[1][1]) << "\"";
        if (s.kind == ShapeKind::arrow) svg << " marker-end=\"url(#head)\"";
        svg << "><title>" << s.label << "</title></line>\n";
      } else {
        svg << "<polyline class=\"" << s.style << "\" points=\"";
        for (std::size_t k = 0; k < s.points.size(); ++k) {
          svg << (k ? " " : "") << sx(s.points[k][0]) << "," << sy(s.points[k][1]);
        }
        svg << "\"><title>" << s.label << "</title></polyline>\n";
      }
    }
    svg << "</g>\n";
    x0 += lay.width + 2.0 * kMargin;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string render_csv(const FigureData& figure) {
  std::ostringstream csv;
  csv << "panel,shape,label,style,point,x,y\n";
  for (std::size_t i = 0; i < figure.panels.size(); ++i) {
    for (const Shape& s : figure.panels[i].shapes) {
      for (std::size_t k = 0; k < s.points.size(); ++k) {
        csv << i << ',' << to_string(s.kind) << ',' << s.label << ',' << s.style << ',' << k << ','
            << format_number("%.17g", s.points[k][0]) << ',' << format_number("%.17g", s.points[k][1]) << '\n';
      }
    }
  }
  return csv.str();
}

std::filesystem::path write_figure(const FigureData& figure, const std::filesystem::path& svg_path) {
  std::filesystem::path csv_path = svg_path;
  csv_path.replace_extension(".csv");
  std::ofstream svg(svg_path);
  std::ofstream csv(csv_path);
  if (!svg || !csv) detail::fail(ErrorCode::BadParameter, "cannot write figure to " + svg_path.string());
  svg << render_svg(figure);
  csv << render_csv(figure);
  return csv_path;
}

}  // namespace aot::cli
