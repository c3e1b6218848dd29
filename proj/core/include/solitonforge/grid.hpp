#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace soliton {

// Points and vectors in R^2 or R^3; the third component is 0 for 2-D.
using Vec = std::array<double, 3>;

inline Vec vec2(double x, double y) { return {x, y, 0.0}; }
inline Vec vec3(double x, double y, double z) { return {x, y, z}; }

inline double dot(const Vec& a, const Vec& b, int dim) {
  double s = 0;
  for (int d = 0; d < dim; ++d) s += a[d] * b[d];
  return s;
}

inline double norm(const Vec& a, int dim) { return std::sqrt(dot(a, a, dim)); }

// |x'| over the first dim-1 (transverse) coordinates.
inline double transverse_norm(const Vec& x, int dim) {
  double s = 0;
  for (int d = 0; d < dim - 1; ++d) s += x[d] * x[d];
  return std::sqrt(s);
}

struct CartesianGrid {
  int dim = 2;
  Vec origin{0, 0, 0};
  double spacing = 1.0;          // uniform, same on every axis
  std::array<int, 3> counts{1, 1, 1};  // nodes per axis; counts[2]==1 in 2-D

  std::size_t size() const {
    return static_cast<std::size_t>(counts[0]) * counts[1] * counts[2];
  }
  // Row-major: i (x) fastest.
  std::size_t index(int i, int j, int k = 0) const {
    return static_cast<std::size_t>((k * counts[1] + j)) * counts[0] + i;
  }
  bool in_bounds(int i, int j, int k = 0) const {
    return i >= 0 && i < counts[0] && j >= 0 && j < counts[1] && k >= 0 &&
           k < counts[2];
  }
  Vec node(int i, int j, int k = 0) const {
    return {origin[0] + spacing * i, origin[1] + spacing * j,
            origin[2] + spacing * k};
  }
  void validate() const;
};

// Two-parameter ellipsoid domain: |x'|^2/r^2 + x_n^2/t^2 < 1.
struct EllipsoidDomain {
  int dim = 2;
  double r = 1.0;  // transverse semi-axis (first dim-1 axes)
  double t = 1.0;  // axial semi-axis (last axis)

  double level(const Vec& x) const {
    double s = 0;
    for (int d = 0; d < dim - 1; ++d) s += x[d] * x[d];
    return s / (r * r) + x[dim - 1] * x[dim - 1] / (t * t) - 1.0;
  }
  bool contains(const Vec& x) const { return level(x) < 0.0; }
  Vec bbox_lo() const;
  Vec bbox_hi() const;
  void validate() const;
};

// Implicit convex domain given by a level function (negative inside).
// EllipsoidDomain and box domains both reduce to this for the solvers.
struct ImplicitDomain {
  int dim = 2;
  std::function<double(const Vec&)> level;  // < 0 inside
  Vec lo{}, hi{};                           // bounding box

  static ImplicitDomain from(const EllipsoidDomain& e);
  static ImplicitDomain box(const Vec& lo, const Vec& hi, int dim);
  bool contains(const Vec& x) const { return level(x) < 0.0; }
};

struct GridFunction {
  CartesianGrid grid;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;  // 1 = interior domain node

  GridFunction() = default;
  explicit GridFunction(const CartesianGrid& g)
      : grid(g), values(g.size(), 0.0), mask(g.size(), 0) {}

  double& at(int i, int j, int k = 0) { return values[grid.index(i, j, k)]; }
  double at(int i, int j, int k = 0) const {
    return values[grid.index(i, j, k)];
  }
  bool masked(int i, int j, int k = 0) const {
    return mask[grid.index(i, j, k)] != 0;
  }

  std::size_t masked_count() const;
  double min_masked() const;
  double max_masked() const;

  // True if every masked node has all face neighbours masked as well.
  bool has_interior_margin(int i, int j, int k = 0) const;

  // Bilinear / trilinear interpolation; requires the cell's corners to carry
  // values (masked or boundary-filled).
  double interpolate(const Vec& x) const;

  // Fill values from a callable at every node (mask untouched).
  void fill(const std::function<double(const Vec&)>& f);

  void save(const std::string& path) const;
  static GridFunction load(const std::string& path);
  void write(std::ostream& os) const;
  static GridFunction read(std::istream& is);
};

// Grid over the domain's bounding box with one spacing of margin; mask marks
// nodes strictly inside. resolution = node count across the longest box axis.
GridFunction build_grid(const EllipsoidDomain& domain, int resolution);
GridFunction build_grid(const ImplicitDomain& domain, int resolution);

}  // namespace soliton
