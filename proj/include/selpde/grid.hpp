#pragma once

#include <memory>
#include <vector>

namespace selpde {

enum class GridKind { radial, rect1d, rect2d };

// Node layout:
//   radial  - xs = radii, xs.front() == 0, xs.back() == R, Dirichlet at R
//   rect1d  - xs = axis nodes, Dirichlet at both ends
//   rect2d  - tensor grid xs (x) by ys (y), row-major index j*nx+i,
//             Dirichlet on the whole edge
struct Grid {
  GridKind kind = GridKind::radial;
  int dim = 1;  // ambient dimension N (radial reduction keeps N), 2 for rect2d
  std::vector<double> xs;
  std::vector<double> ys;

  std::size_t size() const {
    return kind == GridKind::rect2d ? xs.size() * ys.size() : xs.size();
  }
  std::size_t nx() const { return xs.size(); }
  std::size_t ny() const { return ys.size(); }
  double radius() const { return xs.back(); }
  double spacing() const { return xs[1] - xs[0]; }  // leading spacing
  bool uniform() const;
  bool boundary_node(std::size_t i) const;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_radial_grid(double R, std::size_t nodes, int dim, double grading = 1.0);
GridPtr make_interval_grid(double a, double b, std::size_t nodes);
GridPtr make_rect2d_grid(double x0, double x1, double y0, double y1, std::size_t nx,
                         std::size_t ny);
// Explicit node lists (file round-trip of possibly graded grids).
GridPtr make_radial_grid_from_nodes(std::vector<double> xs, int dim);
GridPtr make_interval_grid_from_nodes(std::vector<double> xs);
GridPtr make_rect2d_grid_from_nodes(std::vector<double> xs, std::vector<double> ys);

struct DiscreteField {
  GridPtr grid;
  std::vector<double> values;

  DiscreteField() = default;
  explicit DiscreteField(GridPtr g, double fill = 0.0)
      : grid(std::move(g)), values(grid->size(), fill) {}
  DiscreteField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  double inf_norm() const;
  double min_value() const;
  double max_value() const;
  std::size_t argmax() const;
  std::size_t argmin() const;
};

// Pointwise helpers; fields must share a grid object.
DiscreteField operator+(const DiscreteField& a, const DiscreteField& b);
DiscreteField operator-(const DiscreteField& a, const DiscreteField& b);
DiscreteField operator+(const DiscreteField& a, double s);
DiscreteField operator*(double s, const DiscreteField& a);
double sup_distance(const DiscreteField& a, const DiscreteField& b);

// Clamp a into [lo, hi] nodewise; returns the number of nodes that moved.
std::size_t project_to_bracket(DiscreteField& u, const DiscreteField& lo,
                               const DiscreteField& hi);

// Linear interpolation of a radial/1d field onto another radial/1d grid;
// outside the source range the nearest value is extended.
DiscreteField interpolate_linear(const DiscreteField& src, const GridPtr& target);

}  // namespace selpde
