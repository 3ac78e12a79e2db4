#include "selpde/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace selpde {
namespace {

struct RowBuilder {
  LinearOperator op;
  explicit RowBuilder(const GridPtr& grid, std::size_t n) {
    op.grid = grid;
    op.ptr.assign(1, 0);
    op.dirichlet.assign(n, 0);
  }
  void add(std::size_t j, double v) {
    op.col.push_back(j);
    op.val.push_back(v);
  }
  void close_row() { op.ptr.push_back(op.col.size()); }
  void identity_row(std::size_t i) {
    add(i, 1.0);
    close_row();
    op.dirichlet[i] = 1;
  }
};

// Weights of d/dt at t for the parabola through (t0,t1,t2); exact for
// quadratics on nonuniform spacing.
void three_point_deriv(double t, double t0, double t1, double t2, double w[3]) {
  w[0] = (2.0 * t - t1 - t2) / ((t0 - t1) * (t0 - t2));
  w[1] = (2.0 * t - t0 - t2) / ((t1 - t0) * (t1 - t2));
  w[2] = (2.0 * t - t0 - t1) / ((t2 - t0) * (t2 - t1));
}

// Weights of d2/dt2 through three points (constant in t).
void three_point_deriv2(double t0, double t1, double t2, double w[3]) {
  w[0] = 2.0 / ((t0 - t1) * (t0 - t2));
  w[1] = 2.0 / ((t1 - t0) * (t1 - t2));
  w[2] = 2.0 / ((t2 - t0) * (t2 - t1));
}

LinearOperator build_radial(const GridPtr& grid) {
  const Grid& g = *grid;
  const std::size_t n = g.size();
  const int N = g.dim;
  RowBuilder b(grid, n);

  // Origin: u'(0) = 0 by symmetry, ghost reflection gives
  // -Delta u(0) = -N u''(0) ~ 2N (u0 - u1) / r1^2.
  {
    const double h1 = g.xs[1] - g.xs[0];
    b.add(0, 2.0 * N / (h1 * h1));
    b.add(1, -2.0 * N / (h1 * h1));
    b.close_row();
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double r = g.xs[i];
    double d1[3], d2[3];
    three_point_deriv(r, g.xs[i - 1], g.xs[i], g.xs[i + 1], d1);
    three_point_deriv2(g.xs[i - 1], g.xs[i], g.xs[i + 1], d2);
    for (int k = 0; k < 3; ++k) b.add(i - 1 + k, -(d2[k] + (N - 1) / r * d1[k]));
    b.close_row();
  }
  b.identity_row(n - 1);
  b.op.symmetric_hint = false;
  return std::move(b.op);
}

LinearOperator build_rect1d(const GridPtr& grid) {
  const Grid& g = *grid;
  const std::size_t n = g.size();
  RowBuilder b(grid, n);
  b.identity_row(0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double d2[3];
    three_point_deriv2(g.xs[i - 1], g.xs[i], g.xs[i + 1], d2);
    for (int k = 0; k < 3; ++k) b.add(i - 1 + k, -d2[k]);
    b.close_row();
  }
  b.identity_row(n - 1);
  b.op.symmetric_hint = g.uniform();
  return std::move(b.op);
}

LinearOperator build_rect2d(const GridPtr& grid, double mask_radius) {
  const Grid& g = *grid;
  const std::size_t nx = g.nx(), ny = g.ny();
  const double hx = g.xs[1] - g.xs[0];
  const double hy = g.ys[1] - g.ys[0];
  RowBuilder b(grid, g.size());
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t idx = j * nx + i;
      bool pinned = (i == 0 || j == 0 || i + 1 == nx || j + 1 == ny);
      if (mask_radius > 0.0) {
        const double x = g.xs[i], y = g.ys[j];
        if (std::sqrt(x * x + y * y) >= mask_radius) pinned = true;
      }
      if (pinned) {
        b.identity_row(idx);
        continue;
      }
      b.add(idx - nx, -1.0 / (hy * hy));
      b.add(idx - 1, -1.0 / (hx * hx));
      b.add(idx, 2.0 / (hx * hx) + 2.0 / (hy * hy));
      b.add(idx + 1, -1.0 / (hx * hx));
      b.add(idx + nx, -1.0 / (hy * hy));
      b.close_row();
    }
  }
  b.op.symmetric_hint = true;
  return std::move(b.op);
}

bool tridiagonal_pattern(const LinearOperator& op) {
  const std::size_t n = op.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = op.ptr[i]; k < op.ptr[i + 1]; ++k) {
      const std::size_t j = op.col[k];
      if (j + 1 < i || j > i + 1) return false;
    }
  }
  return true;
}

std::vector<double> thomas_solve(const LinearOperator& op, const std::vector<double>& rhs) {
  const std::size_t n = op.size();
  std::vector<double> sub(n, 0.0), dia(n, 0.0), sup(n, 0.0), d(rhs);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = op.ptr[i]; k < op.ptr[i + 1]; ++k) {
      const std::size_t j = op.col[k];
      if (j + 1 == i)
        sub[i] = op.val[k];
      else if (j == i)
        dia[i] = op.val[k];
      else
        sup[i] = op.val[k];
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double m = sub[i] / dia[i - 1];
    dia[i] -= m * sup[i - 1];
    d[i] -= m * d[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1] / dia[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - sup[i] * x[i + 1]) / dia[i];
  return x;
}

// Reduced system over free nodes with Dirichlet values moved to the rhs;
// the free block of the 5-point stencil is symmetric, so CG applies.
struct ReducedSystem {
  std::vector<std::size_t> free_of_full, full_of_free;
  std::vector<std::size_t> ptr, col;
  std::vector<double> val, diag;

  ReducedSystem(const LinearOperator& op, const std::vector<double>& rhs, double bc,
                std::vector<double>& b) {
    const std::size_t n = op.size();
    free_of_full.assign(n, static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < n; ++i) {
      if (!op.dirichlet[i]) {
        free_of_full[i] = full_of_free.size();
        full_of_free.push_back(i);
      }
    }
    const std::size_t m = full_of_free.size();
    ptr.assign(1, 0);
    diag.assign(m, 0.0);
    b.assign(m, 0.0);
    for (std::size_t fi = 0; fi < m; ++fi) {
      const std::size_t i = full_of_free[fi];
      b[fi] = rhs[i];
      for (std::size_t k = op.ptr[i]; k < op.ptr[i + 1]; ++k) {
        const std::size_t j = op.col[k];
        if (op.dirichlet[j]) {
          b[fi] -= op.val[k] * bc;
        } else {
          col.push_back(free_of_full[j]);
          val.push_back(op.val[k]);
          if (j == i) diag[fi] = op.val[k];
        }
      }
      ptr.push_back(col.size());
    }
  }

  void mul(const std::vector<double>& x, std::vector<double>& y) const {
    const std::size_t m = ptr.size() - 1;
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) s += val[k] * x[col[k]];
      y[i] = s;
    }
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool cg_solve(const ReducedSystem& S, const std::vector<double>& b, std::vector<double>& x) {
  const std::size_t m = b.size();
  x.assign(m, 0.0);
  std::vector<double> r(b), z(m), p(m), Ap(m);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) return true;
  const double target = 1e-13 * bnorm;
  for (std::size_t i = 0; i < m; ++i) z[i] = r[i] / S.diag[i];
  p = z;
  double rz = dot(r, z);
  for (std::size_t it = 0; it < 20 * m + 100; ++it) {
    S.mul(p, Ap);
    const double alpha = rz / dot(p, Ap);
    for (std::size_t i = 0; i < m; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    if (std::sqrt(dot(r, r)) <= target) return true;
    for (std::size_t i = 0; i < m; ++i) z[i] = r[i] / S.diag[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < m; ++i) p[i] = z[i] + beta * p[i];
  }
  return false;
}

bool bicgstab_solve(const ReducedSystem& S, const std::vector<double>& b, std::vector<double>& x) {
  const std::size_t m = b.size();
  x.assign(m, 0.0);
  std::vector<double> r(b), r0(b), p(m, 0.0), v(m, 0.0), s(m), t(m), y(m), z(m);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) return true;
  const double target = 1e-13 * bnorm;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  for (std::size_t it = 0; it < 20 * m + 100; ++it) {
    const double rho_new = dot(r0, r);
    if (rho_new == 0.0) return false;
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < m; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (std::size_t i = 0; i < m; ++i) y[i] = p[i] / S.diag[i];
    S.mul(y, v);
    alpha = rho / dot(r0, v);
    for (std::size_t i = 0; i < m; ++i) s[i] = r[i] - alpha * v[i];
    for (std::size_t i = 0; i < m; ++i) x[i] += alpha * y[i];
    if (std::sqrt(dot(s, s)) <= target) return true;
    for (std::size_t i = 0; i < m; ++i) z[i] = s[i] / S.diag[i];
    S.mul(z, t);
    omega = dot(t, s) / dot(t, t);
    for (std::size_t i = 0; i < m; ++i) {
      x[i] += omega * z[i];
      r[i] = s[i] - omega * t[i];
    }
    if (std::sqrt(dot(r, r)) <= target) return true;
    if (omega == 0.0) return false;
  }
  return false;
}

}  // namespace

double LinearOperator::inf_norm() const {
  double best = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    double s = 0.0;
    for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) s += std::abs(val[k]);
    best = std::max(best, s);
  }
  return best;
}

LinearOperator negative_laplacian(const GridPtr& grid) {
  switch (grid->kind) {
    case GridKind::radial:
      return build_radial(grid);
    case GridKind::rect1d:
      return build_rect1d(grid);
    case GridKind::rect2d:
      return build_rect2d(grid, 0.0);
  }
  throw std::logic_error("unknown grid kind");
}

LinearOperator negative_laplacian_masked_ball(const GridPtr& grid, double R) {
  if (grid->kind != GridKind::rect2d) throw std::invalid_argument("mask needs a rect2d grid");
  if (R <= 0.0) throw std::invalid_argument("mask radius must be positive");
  return build_rect2d(grid, R);
}

DiscreteField apply(const LinearOperator& op, const DiscreteField& u) {
  if (u.grid.get() != op.grid.get()) throw std::invalid_argument("operator/field grid mismatch");
  DiscreteField out(op.grid, 0.0);
  for (std::size_t i = 0; i < op.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = op.ptr[i]; k < op.ptr[i + 1]; ++k) s += op.val[k] * u.values[op.col[k]];
    out.values[i] = s;
  }
  return out;
}

DiscreteField solve_linear(const LinearOperator& op, const DiscreteField& rhs, double bc) {
  if (rhs.grid.get() != op.grid.get()) throw std::invalid_argument("operator/field grid mismatch");
  const std::size_t n = op.size();
  DiscreteField x(op.grid, 0.0);

  if (tridiagonal_pattern(op)) {
    std::vector<double> d(rhs.values);
    for (std::size_t i = 0; i < n; ++i)
      if (op.dirichlet[i]) d[i] = bc;
    x.values = thomas_solve(op, d);
  } else {
    std::vector<double> b;
    ReducedSystem S(op, rhs.values, bc, b);
    std::vector<double> xf;
    const bool ok = op.symmetric_hint ? cg_solve(S, b, xf) : bicgstab_solve(S, b, xf);
    if (!ok) throw std::runtime_error("iterative linear solve stalled");
    for (std::size_t i = 0; i < n; ++i) x.values[i] = bc;
    for (std::size_t fi = 0; fi < S.full_of_free.size(); ++fi)
      x.values[S.full_of_free[fi]] = xf[fi];
  }

  // Backward-stable acceptance: the residual of a correctly solved system
  // cannot beat rounding of A*x itself, so the bound scales with |A| |x|.
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (op.dirichlet[i]) continue;
    double s = 0.0;
    for (std::size_t k = op.ptr[i]; k < op.ptr[i + 1]; ++k) s += op.val[k] * x.values[op.col[k]];
    res = std::max(res, std::abs(rhs.values[i] - s));
  }
  const double bound =
      1e-12 * (op.inf_norm() * x.inf_norm() + rhs.inf_norm() + 1.0);
  if (!(res <= bound)) throw std::runtime_error("linear solve residual above stability bound");
  return x;
}

DerivStencil gradient_stencil(const Grid& g, std::size_t i) {
  std::vector<DerivStencil> all = gradient_stencils(g, i);
  return all[0];
}

std::vector<DerivStencil> gradient_stencils(const Grid& g, std::size_t i) {
  auto line = [](const std::vector<double>& t, std::size_t k, std::size_t base_scale,
                 std::size_t stride) {
    DerivStencil s{};
    s.stride = stride;
    const std::size_t n = t.size();
    std::size_t lo = (k == 0) ? 0 : (k + 1 == n ? n - 3 : k - 1);
    s.base = base_scale + lo * stride;
    three_point_deriv(t[k], t[lo], t[lo + 1], t[lo + 2], s.w);
    return s;
  };

  switch (g.kind) {
    case GridKind::radial: {
      if (i == 0) {
        DerivStencil s{};
        s.base = 0;
        s.stride = 1;
        s.w[0] = s.w[1] = s.w[2] = 0.0;  // u'(0) = 0 by symmetry
        return {s};
      }
      return {line(g.xs, i, 0, 1)};
    }
    case GridKind::rect1d:
      return {line(g.xs, i, 0, 1)};
    case GridKind::rect2d: {
      const std::size_t nx = g.nx();
      const std::size_t ix = i % nx, iy = i / nx;
      DerivStencil sx = line(g.xs, ix, iy * nx, 1);
      DerivStencil sy = line(g.ys, iy, ix, nx);
      return {sx, sy};
    }
  }
  throw std::logic_error("unknown grid kind");
}

DiscreteField discrete_gradient_sq(const DiscreteField& u) {
  const Grid& g = *u.grid;
  DiscreteField out(u.grid, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double sq = 0.0;
    for (const DerivStencil& s : gradient_stencils(g, i)) {
      double du = 0.0;
      for (int k = 0; k < 3; ++k) du += s.w[k] * u.values[s.base + k * s.stride];
      sq += du * du;
    }
    out.values[i] = sq;
  }
  return out;
}

MMatrixReport m_matrix_report(const LinearOperator& op) {
  MMatrixReport rep;
  rep.positive_diagonal = true;
  rep.nonpositive_offdiagonal = true;
  rep.weakly_diagonally_dominant = true;
  for (std::size_t i = 0; i < op.size(); ++i) {
    if (op.dirichlet[i]) continue;
    double diag = 0.0, off_abs = 0.0, off_max = 0.0;
    for (std::size_t k = op.ptr[i]; k < op.ptr[i + 1]; ++k) {
      if (op.col[k] == i) {
        diag = op.val[k];
      } else {
        off_abs += std::abs(op.val[k]);
        off_max = std::max(off_max, op.val[k]);
      }
    }
    if (!(diag > 0.0)) rep.positive_diagonal = false;
    if (off_max > 1e-14 * diag) rep.nonpositive_offdiagonal = false;
    if (diag < off_abs * (1.0 - 1e-12)) rep.weakly_diagonally_dominant = false;
  }
  return rep;
}

}  // namespace selpde
