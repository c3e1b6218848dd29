#include "solitonforge/level_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace soliton {

double LevelPolyline::signed_area() const {
  double a = 0;
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& p = vertices[i];
    const Vec& q = vertices[(i + 1) % n];
    a += p[0] * q[1] - q[0] * p[1];
  }
  return 0.5 * a;
}

double LevelPolyline::length() const {
  double len = 0;
  const std::size_t n = vertices.size();
  if (n < 2) return 0;
  std::size_t last = closed ? n : n - 1;
  for (std::size_t i = 0; i < last; ++i) {
    const Vec& p = vertices[i];
    const Vec& q = vertices[(i + 1) % n];
    len += std::hypot(q[0] - p[0], q[1] - p[1], q[2] - p[2]);
  }
  return len;
}

namespace {

// Edge key within one slice: (node flat index << 1) | axis.
using EdgeKey = std::int64_t;

struct SliceContours {
  std::vector<LevelPolyline> lines;
};

EdgeKey edge_key(int i, int j, int nx, int axis) {
  return (static_cast<EdgeKey>(j) * nx + i) * 2 + axis;
}

void extract_slice(const GridFunction& u, int k, double h,
                   std::vector<LevelPolyline>& out) {
  const auto& g = u.grid;
  const int nx = g.counts[0], ny = g.counts[1];

  // crossing vertex per edge
  std::map<EdgeKey, Vec> verts;
  // segments as pairs of edge keys
  std::vector<std::array<EdgeKey, 2>> segs;

  auto value = [&](int i, int j) { return u.at(i, j, k); };
  auto crossing = [&](int i0, int j0, int i1, int j1) -> Vec {
    double va = value(i0, j0), vb = value(i1, j1);
    double t = (h - va) / (vb - va);
    Vec a = g.node(i0, j0, k), b = g.node(i1, j1, k);
    return {a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2]};
  };

  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      double v[4] = {value(i, j), value(i + 1, j), value(i + 1, j + 1),
                     value(i, j + 1)};
      bool bad = false;
      for (double x : v) bad = bad || !std::isfinite(x);
      if (bad) continue;
      bool b0 = v[0] > h, b1 = v[1] > h, b2 = v[2] > h, b3 = v[3] > h;
      // edges: 0 bottom, 1 right, 2 top, 3 left
      EdgeKey e[4] = {edge_key(i, j, nx, 0), edge_key(i + 1, j, nx, 1),
                      edge_key(i, j + 1, nx, 0), edge_key(i, j, nx, 1)};
      bool cross[4] = {b0 != b1, b1 != b2, b3 != b2, b0 != b3};
      int ncross = cross[0] + cross[1] + cross[2] + cross[3];
      if (ncross == 0) continue;
      auto put = [&](int edge) {
        if (verts.count(e[edge])) return;
        switch (edge) {
          case 0: verts[e[edge]] = crossing(i, j, i + 1, j); break;
          case 1: verts[e[edge]] = crossing(i + 1, j, i + 1, j + 1); break;
          case 2: verts[e[edge]] = crossing(i, j + 1, i + 1, j + 1); break;
          case 3: verts[e[edge]] = crossing(i, j, i, j + 1); break;
        }
      };
      for (int t = 0; t < 4; ++t)
        if (cross[t]) put(t);
      if (ncross == 2) {
        std::array<EdgeKey, 2> s{};
        int w = 0;
        for (int t = 0; t < 4; ++t)
          if (cross[t]) s[w++] = e[t];
        segs.push_back(s);
      } else {
        // saddle: resolve with the cell-centre average
        double c = 0.25 * (v[0] + v[1] + v[2] + v[3]);
        if ((c > h) == b0) {
          segs.push_back({e[0], e[1]});
          segs.push_back({e[2], e[3]});
        } else {
          segs.push_back({e[0], e[3]});
          segs.push_back({e[1], e[2]});
        }
      }
    }

  // adjacency: edge key -> incident segments
  std::map<EdgeKey, std::array<int, 2>> inc;
  for (int s = 0; s < static_cast<int>(segs.size()); ++s)
    for (EdgeKey ek : segs[s]) {
      auto it = inc.find(ek);
      if (it == inc.end())
        inc[ek] = {s, -1};
      else
        it->second[1] = s;
    }

  std::vector<bool> used(segs.size(), false);
  for (int s0 = 0; s0 < static_cast<int>(segs.size()); ++s0) {
    if (used[s0]) continue;
    // walk forward from segs[s0]
    std::vector<EdgeKey> chain{segs[s0][0], segs[s0][1]};
    used[s0] = true;
    bool closed = false;
    for (int pass = 0; pass < 2; ++pass) {
      // pass 0 extends at the back, pass 1 at the front
      while (true) {
        EdgeKey tip = pass == 0 ? chain.back() : chain.front();
        auto& nb = inc[tip];
        int next = -1;
        for (int cand : nb)
          if (cand >= 0 && !used[cand]) next = cand;
        if (next < 0) break;
        used[next] = true;
        EdgeKey other = segs[next][0] == tip ? segs[next][1] : segs[next][0];
        if (pass == 0)
          chain.push_back(other);
        else
          chain.insert(chain.begin(), other);
        if (other == (pass == 0 ? chain.front() : chain.back())) {
          closed = true;
          chain.pop_back();
          break;
        }
      }
      if (closed) break;
    }
    if (!closed && chain.size() >= 2 && chain.front() == chain.back()) {
      closed = true;
      chain.pop_back();
    }
    LevelPolyline pl;
    pl.level = h;
    pl.closed = closed;
    pl.vertices.reserve(chain.size());
    for (EdgeKey ek : chain) pl.vertices.push_back(verts[ek]);
    if (closed && pl.signed_area() < 0)
      std::reverse(pl.vertices.begin(), pl.vertices.end());
    if (pl.vertices.size() >= 2) out.push_back(std::move(pl));
  }
}

}  // namespace

std::vector<LevelPolyline> extract_level_set(const GridFunction& u, double h) {
  const auto& g = u.grid;
  double lo = u.min_masked(), hi = u.max_masked();
  double range = hi - lo;
  if (range <= 0) return {};
  // avoid exact node hits
  bool exact = false;
  for (std::size_t p = 0; p < u.values.size(); ++p)
    if (u.mask[p] && u.values[p] == h) exact = true;
  if (exact) h += 1e-12 * range;

  std::vector<LevelPolyline> out;
  for (int k = 0; k < g.counts[2]; ++k) extract_slice(u, k, h, out);
  return out;
}

double point_segment_distance(const Vec& p, const Vec& a, const Vec& b,
                              int dim) {
  Vec ab{}, ap{};
  for (int d = 0; d < dim; ++d) {
    ab[d] = b[d] - a[d];
    ap[d] = p[d] - a[d];
  }
  double den = dot(ab, ab, dim);
  double t = den > 0 ? std::clamp(dot(ap, ab, dim) / den, 0.0, 1.0) : 0.0;
  double s = 0;
  for (int d = 0; d < dim; ++d) {
    double diff = ap[d] - t * ab[d];
    s += diff * diff;
  }
  return std::sqrt(s);
}

namespace {

double directed_hausdorff(const LevelPolyline& a, const LevelPolyline& b) {
  double worst = 0;
  const std::size_t nb = b.vertices.size();
  std::size_t nseg = b.closed ? nb : nb - 1;
  for (const Vec& p : a.vertices) {
    double best = std::numeric_limits<double>::infinity();
    if (nb == 1) best = point_segment_distance(p, b.vertices[0], b.vertices[0], 3);
    for (std::size_t s = 0; s < nseg; ++s)
      best = std::min(best, point_segment_distance(p, b.vertices[s],
                                                   b.vertices[(s + 1) % nb], 3));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double hausdorff_distance(const LevelPolyline& a, const LevelPolyline& b) {
  if (a.vertices.empty() || b.vertices.empty())
    throw std::invalid_argument("hausdorff_distance: empty polyline");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double area_to_distance_bound(double R, double eps) {
  if (!(R > 0) || !(eps > 0))
    throw std::invalid_argument("area_to_distance_bound: need R, eps > 0");
  constexpr double kCalibrated = 3.0;
  return kCalibrated * std::pow(eps, 2.0 / 3.0) * std::pow(R, -1.0 / 3.0);
}

namespace {

// True if the column over transverse point y contains a sub-level sample.
bool column_has_sublevel(const GridFunction& u, const Vec& y, double h) {
  const auto& g = u.grid;
  if (g.dim == 2) {
    for (int j = 0; j < g.counts[1]; ++j) {
      double z = g.origin[1] + j * g.spacing;
      double v = u.interpolate({y[0], z, 0});
      if (std::isfinite(v) && v < h) return true;
    }
    return false;
  }
  for (int k = 0; k < g.counts[2]; ++k) {
    double z = g.origin[2] + k * g.spacing;
    double v = u.interpolate({y[0], y[1], z});
    if (std::isfinite(v) && v < h) return true;
  }
  return false;
}

bool transverse_in_box(const CartesianGrid& g, const Vec& y) {
  int nt = g.dim - 1;
  for (int d = 0; d < nt; ++d) {
    if (y[d] < g.origin[d] + g.spacing) return false;
    if (y[d] > g.origin[d] + g.spacing * (g.counts[d] - 2)) return false;
  }
  return true;
}

}  // namespace

ExtentRecord level_set_extents(const GridFunction& u, double h, int directions) {
  const auto& g = u.grid;
  ExtentRecord rec;
  rec.level = h;

  // radial function of the projected sub-level set
  int ndir = g.dim == 2 ? 2 : directions;
  double ds = g.spacing / 4.0;
  double inradius = std::numeric_limits<double>::infinity();
  for (int m = 0; m < ndir; ++m) {
    Vec p{0, 0, 0};
    if (g.dim == 2) {
      p[0] = m == 0 ? 1.0 : -1.0;
    } else {
      double ang = 2.0 * M_PI * m / ndir;
      p[0] = std::cos(ang);
      p[1] = std::sin(ang);
    }
    double s = 0, extent = 0;
    bool truncated = false;
    while (true) {
      Vec y{s * p[0], s * p[1], 0};
      if (!transverse_in_box(g, y)) {
        truncated = true;
        break;
      }
      if (!column_has_sublevel(u, y, h)) break;
      extent = s;
      s += ds;
    }
    rec.radial_samples.push_back(extent);
    if (truncated) rec.truncated_transverse = true;
    inradius = std::min(inradius, extent);
  }
  rec.transverse_inradius = std::isfinite(inradius) ? inradius : 0.0;

  // axial chord through the origin
  const int axis = g.dim - 1;
  double chord = 0;
  for (int sign : {+1, -1}) {
    double s = 0, extent = 0;
    while (true) {
      Vec x{0, 0, 0};
      x[axis] = sign * s;
      if (x[axis] < g.origin[axis] + g.spacing ||
          x[axis] > g.origin[axis] + g.spacing * (g.counts[axis] - 2)) {
        rec.truncated_axial = true;
        break;
      }
      double v = u.interpolate(x);
      if (!std::isfinite(v) || v >= h) break;
      extent = s;
      s += ds;
    }
    chord += extent;
  }
  rec.axial_width = chord;

  // distance from the origin to the level set
  auto contours = extract_level_set(u, h);
  double delta = std::numeric_limits<double>::infinity();
  Vec origin{0, 0, 0};
  for (const auto& pl : contours) {
    std::size_t n = pl.vertices.size();
    std::size_t nseg = pl.closed ? n : n - 1;
    for (std::size_t s = 0; s < nseg; ++s)
      delta = std::min(delta,
                       point_segment_distance(origin, pl.vertices[s],
                                              pl.vertices[(s + 1) % n], g.dim));
  }
  rec.origin_distance = std::isfinite(delta) ? delta : 0.0;
  return rec;
}

}  // namespace soliton
