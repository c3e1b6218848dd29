#pragma once

#include <vector>

#include "solitonforge/grid.hpp"

namespace soliton {

struct LevelPolyline {
  std::vector<Vec> vertices;
  bool closed = false;
  double level = 0.0;

  double signed_area() const;  // 2-D shoelace, CCW positive
  double length() const;
};

// Contour of {u = h} by cell-edge linear interpolation (marching squares).
// In 3-D the contour is extracted slice by slice along the axial direction.
// Closed components are ordered counterclockwise. h coinciding with a node
// value is perturbed by 1e-12 * value range.
std::vector<LevelPolyline> extract_level_set(const GridFunction& u, double h);

struct ExtentRecord {
  double level = 0.0;
  double transverse_inradius = 0.0;        // a-bar_h
  double axial_width = 0.0;                // b-bar_h, full chord through origin
  std::vector<double> radial_samples;      // a_h(p) over sampled directions
  double origin_distance = 0.0;            // delta = dist(0, Gamma_h)
  bool truncated_transverse = false;
  bool truncated_axial = false;
  bool truncated() const { return truncated_transverse || truncated_axial; }
};

// Extents of the sub-level set {u < h}: transverse inradius of the projected
// set, axial chord through the origin, and the distance from the origin to
// the level set. Directions are sampled on the equatorial sphere (2 samples
// in 2-D, `directions` in 3-D). Truncated directions are lower bounds only.
ExtentRecord level_set_extents(const GridFunction& u, double h,
                               int directions = 64);

// Symmetric Hausdorff distance between two polylines (vertices of one against
// segments of the other).
double hausdorff_distance(const LevelPolyline& a, const LevelPolyline& b);

// Bound value C * eps^{2/3} * R^{-1/3} for the distance between the boundary
// of B_R and the boundary of a convex subset missing at most eps of its area.
// C = 3 fixed by the circular-segment calibration (see tests).
double area_to_distance_bound(double R, double eps);

double point_segment_distance(const Vec& p, const Vec& a, const Vec& b, int dim);

}  // namespace soliton
