#include "selpde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace selpde {

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n < 2) throw std::invalid_argument("grid needs at least 2 nodes");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.front() = a;
  v.back() = b;
  return v;
}

void check_same_grid(const DiscreteField& a, const DiscreteField& b) {
  if (a.grid != b.grid || a.values.size() != b.values.size())
    throw std::invalid_argument("fields live on different grids");
}

}  // namespace

bool Grid::uniform() const {
  double h = xs[1] - xs[0];
  for (std::size_t i = 1; i + 1 < xs.size(); ++i)
    if (std::fabs((xs[i + 1] - xs[i]) - h) > 1e-12 * (std::fabs(h) + 1)) return false;
  return true;
}

bool Grid::boundary_node(std::size_t i) const {
  switch (kind) {
    case GridKind::radial:
      return i + 1 == xs.size();
    case GridKind::rect1d:
      return i == 0 || i + 1 == xs.size();
    case GridKind::rect2d: {
      std::size_t n = xs.size();
      std::size_t ix = i % n, iy = i / n;
      return ix == 0 || ix + 1 == n || iy == 0 || iy + 1 == ys.size();
    }
  }
  return false;
}

GridPtr make_radial_grid(double R, std::size_t nodes, int dim, double grading) {
  if (R <= 0) throw std::invalid_argument("radius must be positive");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  auto g = std::make_shared<Grid>();
  g->kind = GridKind::radial;
  g->dim = dim;
  if (grading == 1.0) {
    g->xs = linspace(0.0, R, nodes);
  } else {
    g->xs.resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      double t = static_cast<double>(i) / static_cast<double>(nodes - 1);
      g->xs[i] = R * std::pow(t, grading);
    }
    g->xs.back() = R;
  }
  return g;
}

GridPtr make_interval_grid(double a, double b, std::size_t nodes) {
  if (!(a < b)) throw std::invalid_argument("interval bounds must satisfy a < b");
  auto g = std::make_shared<Grid>();
  g->kind = GridKind::rect1d;
  g->dim = 1;
  g->xs = linspace(a, b, nodes);
  return g;
}

GridPtr make_rect2d_grid(double x0, double x1, double y0, double y1, std::size_t nx,
                         std::size_t ny) {
  if (!(x0 < x1) || !(y0 < y1)) throw std::invalid_argument("rectangle bounds are degenerate");
  auto g = std::make_shared<Grid>();
  g->kind = GridKind::rect2d;
  g->dim = 2;
  g->xs = linspace(x0, x1, nx);
  g->ys = linspace(y0, y1, ny);
  return g;
}

namespace {
void check_increasing(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("grid needs at least 2 nodes");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("grid nodes must strictly increase");
}
}  // namespace

GridPtr make_radial_grid_from_nodes(std::vector<double> xs, int dim) {
  check_increasing(xs);
  if (xs.front() != 0.0) throw std::invalid_argument("radial grid must start at r = 0");
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  auto g = std::make_shared<Grid>();
  g->kind = GridKind::radial;
  g->dim = dim;
  g->xs = std::move(xs);
  return g;
}

GridPtr make_interval_grid_from_nodes(std::vector<double> xs) {
  check_increasing(xs);
  auto g = std::make_shared<Grid>();
  g->kind = GridKind::rect1d;
  g->dim = 1;
  g->xs = std::move(xs);
  return g;
}

GridPtr make_rect2d_grid_from_nodes(std::vector<double> xs, std::vector<double> ys) {
  check_increasing(xs);
  check_increasing(ys);
  auto g = std::make_shared<Grid>();
  g->kind = GridKind::rect2d;
  g->dim = 2;
  g->xs = std::move(xs);
  g->ys = std::move(ys);
  return g;
}

double DiscreteField::inf_norm() const {
  double m = 0;
  for (double v : values) m = std::max(m, std::fabs(v));
  return m;
}

double DiscreteField::min_value() const {
  return *std::min_element(values.begin(), values.end());
}

double DiscreteField::max_value() const {
  return *std::max_element(values.begin(), values.end());
}

std::size_t DiscreteField::argmax() const {
  return static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
}

std::size_t DiscreteField::argmin() const {
  return static_cast<std::size_t>(
      std::min_element(values.begin(), values.end()) - values.begin());
}

DiscreteField operator+(const DiscreteField& a, const DiscreteField& b) {
  check_same_grid(a, b);
  DiscreteField out(a.grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

DiscreteField operator-(const DiscreteField& a, const DiscreteField& b) {
  check_same_grid(a, b);
  DiscreteField out(a.grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

DiscreteField operator+(const DiscreteField& a, double s) {
  DiscreteField out = a;
  for (double& v : out.values) v += s;
  return out;
}

DiscreteField operator*(double s, const DiscreteField& a) {
  DiscreteField out = a;
  for (double& v : out.values) v *= s;
  return out;
}

double sup_distance(const DiscreteField& a, const DiscreteField& b) {
  check_same_grid(a, b);
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

std::size_t project_to_bracket(DiscreteField& u, const DiscreteField& lo,
                               const DiscreteField& hi) {
  check_same_grid(u, lo);
  check_same_grid(u, hi);
  std::size_t moved = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double before = u[i];
    u[i] = std::min(std::max(u[i], lo[i]), hi[i]);
    if (u[i] != before) ++moved;
  }
  return moved;
}

DiscreteField interpolate_linear(const DiscreteField& src, const GridPtr& target) {
  if (src.grid->kind == GridKind::rect2d || target->kind == GridKind::rect2d)
    throw std::invalid_argument("interpolate_linear handles 1d grids only");
  const auto& xs = src.grid->xs;
  DiscreteField out(target);
  for (std::size_t i = 0; i < target->xs.size(); ++i) {
    double x = target->xs[i];
    if (x <= xs.front()) {
      out[i] = src[0];
    } else if (x >= xs.back()) {
      out[i] = src[src.size() - 1];
    } else {
      auto it = std::upper_bound(xs.begin(), xs.end(), x);
      std::size_t j = static_cast<std::size_t>(it - xs.begin());
      double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
      out[i] = (1 - t) * src[j - 1] + t * src[j];
    }
  }
  return out;
}

}  // namespace selpde
