#pragma once

// Static figures of transport between planar Gaussians. Figure content is
// built as plain geometry (FigureData) first and rendered to SVG and CSV
// afterwards, so tests can inspect the geometry directly.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "aot/couplings.hpp"
#include "aot/gauss.hpp"
#include "aot/geodesics.hpp"

namespace aot::cli {

using Point = std::array<double, 2>;

enum class ShapeKind { ellipse, segment, grid_line, arrow };

std::string_view to_string(ShapeKind kind) noexcept;

struct Shape {
  ShapeKind kind = ShapeKind::ellipse;
  std::string label;  ///< e.g. "mu 1sigma", "T e2", "adapted t=0.5 2sigma"
  std::string style;  ///< rendering class: source, target, grid, wasserstein, ...
  std::vector<Point> points;
};

struct Panel {
  std::string title;
  std::vector<Shape> shapes;
};

struct FigureData {
  std::vector<Panel> panels;
};

enum class FigureKind { contour_transport, interpolation_filmstrip };

std::string_view to_string(FigureKind kind) noexcept;

/// Outline of {x : (x - mean)ᵀ cov^{-1} (x - mean) = level^2}. A singular
/// covariance gives a two-point segment along its surviving eigenvector.
Shape ellipse_shape(const Vec& mean, const Matrix& cov, double level, std::string label, std::string style);

/// Source law with basis arrows and a grid (left), target law with the
/// images of both under the map (right). The basis is the eigenbasis of the
/// source covariance for the Brenier map and e1, e2 otherwise. Requires N = 2.
FigureData contour_transport(const GaussianSpec& mu, const GaussianSpec& nu, MapKind map, Index grid_lines);

/// Frames t = 0, 1/(frames-1), ..., 1 of each requested curve, shifted right
/// frame by frame, overlaid in one panel. Requires N = 2 and frames >= 2.
FigureData interpolation_filmstrip(const GaussianSpec& mu0, const GaussianSpec& mu1,
                                   const std::vector<GeodesicKind>& kinds, Index frames);

std::string render_svg(const FigureData& figure);
/// Columns: panel,shape,label,style,point,x,y.
std::string render_csv(const FigureData& figure);

/// Writes `svg_path` and the sidecar with extension ".csv"; returns the
/// sidecar path.
std::filesystem::path write_figure(const FigureData& figure, const std::filesystem::path& svg_path);

}  // namespace aot::cli
