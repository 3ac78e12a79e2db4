#include "selpde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace selpde {

namespace {

// 15-point Kronrod extension of 7-point Gauss (QUADPACK dqk15 constants).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel gk15(const Integrand& f, double a, double b) {
  double c = 0.5 * (a + b);
  double h = 0.5 * (b - a);
  double fc = f(c);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double fv1[7], fv2[7];
  for (int j = 0; j < 7; ++j) {
    double dx = h * kXgk[j];
    fv1[j] = f(c - dx);
    fv2[j] = f(c + dx);
    double fsum = fv1[j] + fv2[j];
    if (j % 2 == 1) resg += kWg[j / 2] * fsum;
    resk += kWgk[j] * fsum;
  }
  double reskh = resk * 0.5;
  double resasc = kWgk[7] * std::fabs(fc - reskh);
  for (int j = 0; j < 7; ++j)
    resasc += kWgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));
  resasc *= std::fabs(h);

  Panel p;
  p.a = a;
  p.b = b;
  p.value = resk * h;
  double err = std::fabs((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  p.error = err;
  return p;
}

}  // namespace

QuadResult integrate(const Integrand& f, double a, double b, const QuadOptions& opt) {
  QuadResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<Panel> queue;
  Panel whole = gk15(f, a, b);
  double total = whole.value;
  double total_err = whole.error;
  queue.push(whole);
  int used = 1;
  auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::fabs(total)); };
  while (total_err > target() && used < opt.max_intervals) {
    Panel worst = queue.top();
    queue.pop();
    double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // interval at rounding resolution, keep its estimate
      total_err -= worst.error;
      continue;
    }
    Panel left = gk15(f, worst.a, mid);
    Panel right = gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++used;
  }
  out.value = total;
  out.error = total_err;
  out.intervals = used;
  out.converged = total_err <= target();
  return out;
}

QuadResult integrate_to_infinity(const Integrand& f, double a, const QuadOptions& opt) {
  double t_hi = 1.0 / (1.0 + a);
  auto g = [&f](double t) {
    double x = 1.0 / t - 1.0;
    double v = f(x);
    return v / (t * t);
  };
  return integrate(g, 0.0, t_hi, opt);
}

QuadResult integrate_tail_doubling(const Integrand& f, double a, double initial_window,
                                   double scale_hint, const QuadOptions& opt) {
  QuadResult out;
  double window = std::max(initial_window, 1e-6);
  double left = a;
  double total = 0.0;
  double err = 0.0;
  int small_increments = 0;
  int used = 0;
  for (int step = 0; step < 64; ++step) {
    QuadResult piece = integrate(f, left, left + window, opt);
    total += piece.value;
    err += piece.error;
    used += piece.intervals;
    if (!piece.converged) {
      out.value = total;
      out.error = err + std::fabs(piece.value);
      out.intervals = used;
      out.converged = false;
      return out;
    }
    double tol = opt.rel_tol * (std::fabs(total) + scale_hint);
    if (std::fabs(piece.value) < tol)
      ++small_increments;
    else
      small_increments = 0;
    if (small_increments >= 2) {
      out.value = total;
      out.error = err + tol;
      out.intervals = used;
      out.converged = true;
      return out;
    }
    left += window;
    window *= 2.0;
  }
  out.value = total;
  out.error = err + std::fabs(total) * opt.rel_tol * 100;
  out.intervals = used;
  out.converged = false;
  return out;
}

CumulativeIntegral::CumulativeIntegral(Integrand f, double origin, QuadOptions opt)
    : f_(std::move(f)), origin_(origin), opt_(opt) {
  checkpoints_[origin_] = 0.0;
}

double CumulativeIntegral::operator()(double x) const {
  auto it = checkpoints_.upper_bound(x);
  // nearest checkpoint at or below x; map always holds origin
  if (it == checkpoints_.begin()) {
    QuadResult q = integrate(f_, x, origin_, opt_);
    double v = -q.value;
    checkpoints_[x] = v;
    return v;
  }
  --it;
  if (it->first == x) return it->second;
  QuadResult q = integrate(f_, it->first, x, opt_);
  double v = it->second + q.value;
  checkpoints_[x] = v;
  return v;
}

}  // namespace selpde
