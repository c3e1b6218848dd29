#include "solitonforge/grid.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace soliton {

void CartesianGrid::validate() const {
  if (dim != 2 && dim != 3) throw std::invalid_argument("grid dim must be 2 or 3");
  if (!(spacing > 0)) throw std::invalid_argument("grid spacing must be positive");
  for (int d = 0; d < dim; ++d)
    if (counts[d] < 3) throw std::invalid_argument("grid needs >= 3 nodes per axis");
  if (dim == 2 && counts[2] != 1)
    throw std::invalid_argument("2-D grid must have counts[2] == 1");
}

Vec EllipsoidDomain::bbox_lo() const {
  Vec lo{-r, -r, -r};
  lo[dim - 1] = -t;
  if (dim == 2) lo[2] = 0;
  return lo;
}

Vec EllipsoidDomain::bbox_hi() const {
  Vec hi{r, r, r};
  hi[dim - 1] = t;
  if (dim == 2) hi[2] = 0;
  return hi;
}

void EllipsoidDomain::validate() const {
  if (dim != 2 && dim != 3) throw std::invalid_argument("domain dim must be 2 or 3");
  if (!(r > 0) || !(t > 0))
    throw std::invalid_argument("degenerate ellipsoid: r and t must be positive");
}

ImplicitDomain ImplicitDomain::from(const EllipsoidDomain& e) {
  e.validate();
  ImplicitDomain d;
  d.dim = e.dim;
  d.level = [e](const Vec& x) { return e.level(x); };
  d.lo = e.bbox_lo();
  d.hi = e.bbox_hi();
  return d;
}

ImplicitDomain ImplicitDomain::box(const Vec& lo, const Vec& hi, int dim) {
  ImplicitDomain d;
  d.dim = dim;
  d.lo = lo;
  d.hi = hi;
  d.level = [lo, hi, dim](const Vec& x) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < dim; ++k) {
      worst = std::max(worst, lo[k] - x[k]);
      worst = std::max(worst, x[k] - hi[k]);
    }
    return worst;
  };
  return d;
}

std::size_t GridFunction::masked_count() const {
  std::size_t n = 0;
  for (auto m : mask) n += m != 0;
  return n;
}

double GridFunction::min_masked() const {
  double v = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < values.size(); ++p)
    if (mask[p]) v = std::min(v, values[p]);
  return v;
}

double GridFunction::max_masked() const {
  double v = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < values.size(); ++p)
    if (mask[p]) v = std::max(v, values[p]);
  return v;
}

bool GridFunction::has_interior_margin(int i, int j, int k) const {
  if (!masked(i, j, k)) return false;
  const int kk = grid.dim == 3 ? 1 : 0;
  for (int dk = -kk; dk <= kk; ++dk)
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (!grid.in_bounds(i + di, j + dj, k + dk)) return false;
        if (!masked(i + di, j + dj, k + dk)) return false;
      }
  return true;
}

double GridFunction::interpolate(const Vec& x) const {
  const auto& g = grid;
  double fi = (x[0] - g.origin[0]) / g.spacing;
  double fj = (x[1] - g.origin[1]) / g.spacing;
  double fk = g.dim == 3 ? (x[2] - g.origin[2]) / g.spacing : 0.0;
  int i = std::clamp(static_cast<int>(std::floor(fi)), 0, g.counts[0] - 2);
  int j = std::clamp(static_cast<int>(std::floor(fj)), 0, g.counts[1] - 2);
  int k = g.dim == 3 ? std::clamp(static_cast<int>(std::floor(fk)), 0, g.counts[2] - 2) : 0;
  double a = fi - i, b = fj - j, c = fk - k;
  if (g.dim == 2) {
    return (1 - a) * (1 - b) * at(i, j) + a * (1 - b) * at(i + 1, j) +
           (1 - a) * b * at(i, j + 1) + a * b * at(i + 1, j + 1);
  }
  double v000 = at(i, j, k), v100 = at(i + 1, j, k);
  double v010 = at(i, j + 1, k), v110 = at(i + 1, j + 1, k);
  double v001 = at(i, j, k + 1), v101 = at(i + 1, j, k + 1);
  double v011 = at(i, j + 1, k + 1), v111 = at(i + 1, j + 1, k + 1);
  double v00 = v000 * (1 - a) + v100 * a;
  double v10 = v010 * (1 - a) + v110 * a;
  double v01 = v001 * (1 - a) + v101 * a;
  double v11 = v011 * (1 - a) + v111 * a;
  double v0 = v00 * (1 - b) + v10 * b;
  double v1 = v01 * (1 - b) + v11 * b;
  return v0 * (1 - c) + v1 * c;
}

void GridFunction::fill(const std::function<double(const Vec&)>& f) {
  for (int k = 0; k < grid.counts[2]; ++k)
    for (int j = 0; j < grid.counts[1]; ++j)
      for (int i = 0; i < grid.counts[0]; ++i)
        values[grid.index(i, j, k)] = f(grid.node(i, j, k));
}

namespace {

std::string shortest_repr(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

GridFunction from_implicit(const ImplicitDomain& domain, int resolution) {
  if (resolution < 3) throw std::invalid_argument("resolution must be >= 3");
  double longest = 0;
  for (int d = 0; d < domain.dim; ++d)
    longest = std::max(longest, domain.hi[d] - domain.lo[d]);
  if (!(longest > 0)) throw std::invalid_argument("degenerate domain box");
  double h = longest / (resolution - 1);

  CartesianGrid g;
  g.dim = domain.dim;
  g.spacing = h;
  for (int d = 0; d < domain.dim; ++d) {
    // one spacing of margin on each side
    g.origin[d] = domain.lo[d] - h;
    int n = static_cast<int>(std::ceil((domain.hi[d] - domain.lo[d]) / h)) + 3;
    g.counts[d] = n;
  }
  if (domain.dim == 2) {
    g.counts[2] = 1;
    g.origin[2] = 0;
  }
  g.validate();

  GridFunction f(g);
  for (int k = 0; k < g.counts[2]; ++k)
    for (int j = 0; j < g.counts[1]; ++j)
      for (int i = 0; i < g.counts[0]; ++i)
        f.mask[g.index(i, j, k)] = domain.contains(g.node(i, j, k)) ? 1 : 0;
  return f;
}

}  // namespace

GridFunction build_grid(const EllipsoidDomain& domain, int resolution) {
  return from_implicit(ImplicitDomain::from(domain), resolution);
}

GridFunction build_grid(const ImplicitDomain& domain, int resolution) {
  return from_implicit(domain, resolution);
}

void GridFunction::write(std::ostream& os) const {
  nlohmann::json header;
  header["dim"] = grid.dim;
  header["origin"] = {grid.origin[0], grid.origin[1], grid.origin[2]};
  header["spacing"] = grid.spacing;
  header["counts"] = {grid.counts[0], grid.counts[1], grid.counts[2]};
  os << header.dump() << "\n";
  for (std::size_t p = 0; p < values.size(); ++p) {
    if (mask[p])
      os << shortest_repr(values[p]) << "\n";
    else
      os << "_\n";
  }
}

void GridFunction::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write(os);
}

GridFunction GridFunction::read(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("missing grid header");
  auto header = nlohmann::json::parse(line);
  CartesianGrid g;
  g.dim = header.at("dim").get<int>();
  auto o = header.at("origin");
  g.origin = {o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>()};
  g.spacing = header.at("spacing").get<double>();
  auto c = header.at("counts");
  g.counts = {c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>()};
  g.validate();

  GridFunction f(g);
  for (std::size_t p = 0; p < f.values.size(); ++p) {
    if (!std::getline(is, line))
      throw std::runtime_error("truncated grid function file");
    if (line == "_") {
      f.mask[p] = 0;
      f.values[p] = std::numeric_limits<double>::quiet_NaN();
    } else {
      f.mask[p] = 1;
      double v;
      auto res = std::from_chars(line.data(), line.data() + line.size(), v);
      if (res.ec != std::errc{})
        throw std::runtime_error("bad node value: " + line);
      f.values[p] = v;
    }
  }
  return f;
}

GridFunction GridFunction::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read(is);
}

}  // namespace soliton
