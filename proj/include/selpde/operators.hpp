#pragma once

#include <cstdint>
#include <vector>

#include "selpde/grid.hpp"

namespace selpde {

// Sparse row-compressed operator with Dirichlet rows baked in as identity.
struct LinearOperator {
  GridPtr grid;
  std::vector<std::size_t> ptr;
  std::vector<std::size_t> col;
  std::vector<double> val;
  std::vector<std::uint8_t> dirichlet;  // 1 = boundary (identity) row
  bool symmetric_hint = false;          // safe to hand to conjugate gradients

  std::size_t size() const { return ptr.size() - 1; }
  double inf_norm() const;  // max absolute row sum
};

// -Delta_h.  Radial grids use u'' + (N-1)/r u' with centered differences,
// the origin row is the symmetric limit -N u''(0) via ghost reflection
// (u'(0) = 0); the outer node is a Dirichlet row.  rect1d pins both ends,
// rect2d pins the whole edge (5-point stencil inside).
LinearOperator negative_laplacian(const GridPtr& grid);

// Ball of radius R embedded in a rect2d grid: nodes with |x| > R become
// penalized (Dirichlet) rows, interior nodes keep the 5-point stencil.
LinearOperator negative_laplacian_masked_ball(const GridPtr& grid, double R);

DiscreteField apply(const LinearOperator& op, const DiscreteField& u);

// Solve op*x = rhs with x = bc on Dirichlet rows.  Tridiagonal patterns are
// eliminated directly (Thomas); 2D systems run preconditioned CG when the
// operator is flagged symmetric, BiCGStab otherwise.  The result is checked
// against a backward-stable residual bound and an exception is raised if the
// solve did not reach it.
DiscreteField solve_linear(const LinearOperator& op, const DiscreteField& rhs, double bc);

// Nodewise |grad u|^2: centered differences at interior nodes, second-order
// one-sided stencils on the boundary, exactly zero at a radial origin.
DiscreteField discrete_gradient_sq(const DiscreteField& u);

// Stencil weights of one directional first derivative at a node: the value
// is sum_k w[k] * u[base + k*stride].  Shared by the gradient field and the
// Newton linearization so the two cannot drift apart.  A radial origin gets
// all-zero weights (u'(0) = 0 by symmetry).
struct DerivStencil {
  std::size_t base = 0;
  std::size_t stride = 1;
  double w[3] = {0.0, 0.0, 0.0};
};
// One stencil per space direction (1 for radial/rect1d, 2 for rect2d).
std::vector<DerivStencil> gradient_stencils(const Grid& g, std::size_t i);
DerivStencil gradient_stencil(const Grid& g, std::size_t i);

struct MMatrixReport {
  bool positive_diagonal = false;
  bool nonpositive_offdiagonal = false;
  bool weakly_diagonally_dominant = false;
  bool ok() const {
    return positive_diagonal && nonpositive_offdiagonal && weakly_diagonally_dominant;
  }
};
MMatrixReport m_matrix_report(const LinearOperator& op);

}  // namespace selpde
