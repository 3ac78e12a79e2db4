#include "selpde/problem.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "selpde/fieldio.hpp"
#include "selpde/quadrature.hpp"

namespace selpde {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string dirname_of(const std::string& path) {
  std::size_t pos = path.find_last_of('/');
  return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

}  // namespace

TableProfile TableProfile::from_data(std::vector<double> knots, std::vector<double> values) {
  if (knots.size() != values.size()) throw std::invalid_argument("table: knot/value mismatch");
  if (knots.size() < 2) throw std::invalid_argument("table: needs at least 2 knots");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1]))
      throw std::invalid_argument("table: knots must strictly increase");

  TableProfile t;
  t.knots = std::move(knots);
  t.values = std::move(values);
  const std::size_t n = t.knots.size();
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = t.knots[i + 1] - t.knots[i];
    d[i] = (t.values[i + 1] - t.values[i]) / h[i];
  }
  t.slopes.assign(n, 0.0);
  t.slopes[0] = d[0];
  t.slopes[n - 1] = d[n - 2];
  // Fritsch-Butland: zero slope at local extrema, otherwise a weighted
  // harmonic mean of the neighbor secants; keeps the cubic monotone.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      t.slopes[i] = 0.0;
    } else {
      t.slopes[i] = 3.0 * (h[i - 1] + h[i]) /
                    ((2.0 * h[i] + h[i - 1]) / d[i - 1] + (h[i] + 2.0 * h[i - 1]) / d[i]);
    }
  }
  return t;
}

TableProfile TableProfile::load(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::vector<double> ks, vs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::istringstream row(line);
    double k = 0, v = 0;
    if (!(row >> k >> v))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'knot value'");
    ks.push_back(k);
    vs.push_back(v);
  }
  return from_data(std::move(ks), std::move(vs));
}

double TableProfile::eval(double r) const {
  if (r <= knots.front()) return values.front();
  if (r >= knots.back()) return values.back();
  auto it = std::upper_bound(knots.begin(), knots.end(), r);
  std::size_t j = static_cast<std::size_t>(it - knots.begin());
  const double h = knots[j] - knots[j - 1];
  const double t = (r - knots[j - 1]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return values[j - 1] * (2 * t3 - 3 * t2 + 1) + slopes[j - 1] * h * (t3 - 2 * t2 + t) +
         values[j] * (-2 * t3 + 3 * t2) + slopes[j] * h * (t3 - t2);
}

CoefficientField CoefficientField::from_expression(const std::string& text) {
  CoefficientField f;
  f.expr = Expr::parse(text);
  return f;
}

CoefficientField CoefficientField::from_table(TableProfile t) {
  CoefficientField f;
  f.table = std::make_shared<TableProfile>(std::move(t));
  return f;
}

bool CoefficientField::radial() const { return table ? true : expr.radial(); }

double CoefficientField::eval(const EvalPoint& p) const {
  if (table) return table->eval(p.r);
  return expr.eval(p);
}

double CoefficientField::eval_radius(double r) const { return eval(EvalPoint::radius(r)); }

std::string CoefficientField::describe() const {
  if (table) return "table(" + std::to_string(table->knots.size()) + " knots)";
  return expr.source();
}

double eval_field(const CoefficientField& f, const EvalPoint& p) {
  const double v = f.eval(p);
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << "field '" << f.describe() << "' evaluated non-finite at r=" << p.r;
    if (p.x) {
      msg << " x=(";
      for (int k = 0; k < p.dim; ++k) msg << (k ? "," : "") << p.x[k];
      msg << ")";
    }
    throw std::runtime_error(msg.str());
  }
  return v;
}

std::string DomainSpec::describe() const {
  std::ostringstream out;
  switch (kind) {
    case DomainKind::ball:
      out << "ball " << radius;
      break;
    case DomainKind::rect:
      out << "rect";
      for (std::size_t k = 0; k < lo.size(); ++k) out << " " << lo[k] << ".." << hi[k];
      break;
    case DomainKind::wholespace:
      out << "wholespace";
      break;
  }
  return out.str();
}

void Problem::validate() const {
  if (dim < 1) throw std::invalid_argument("problem: dim must be >= 1");
  if (a.empty() || c.empty()) throw std::invalid_argument("problem: both a and c are required");
  switch (domain.kind) {
    case DomainKind::ball:
      if (!(domain.radius > 0)) throw std::invalid_argument("problem: ball radius must be > 0");
      break;
    case DomainKind::rect:
      if (domain.lo.size() != static_cast<std::size_t>(dim))
        throw std::invalid_argument("problem: rect bounds count must equal dim");
      if (dim > 2) throw std::invalid_argument("problem: rect domains support dim <= 2");
      for (std::size_t k = 0; k < domain.lo.size(); ++k)
        if (!(domain.lo[k] < domain.hi[k]))
          throw std::invalid_argument("problem: degenerate rect bounds");
      break;
    case DomainKind::wholespace:
      if (dim <= 2) throw std::invalid_argument("problem: whole-space mode requires dim > 2");
      break;
  }
  auto max_coord = [](const CoefficientField& f) {
    return f.table ? 0 : f.expr.max_coordinate();
  };
  const int need = std::max(max_coord(a), max_coord(c));
  if (need > dim)
    throw std::invalid_argument("problem: expression references x" + std::to_string(need) +
                                " beyond dim");
  if (domain.kind == DomainKind::wholespace && (!a.radial() || !c.radial())) {
    // allowed: the envelope handles non-radial a; the solver runs radially,
    // so c must be radial in whole-space mode
    if (!c.radial())
      throw std::invalid_argument("problem: whole-space mode needs radial c");
  }
}

static Problem parse_problem_impl(const std::string& text, const std::string& origin,
                                  const std::string& base_dir) {
  Problem p;
  bool saw_dim = false, saw_domain = false;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) fail("empty value for '" + key + "'");
    try {
      if (key == "dim") {
        p.dim = std::stoi(value);
        saw_dim = true;
      } else if (key == "domain") {
        std::vector<std::string> w = words(value);
        if (w.empty()) fail("empty domain");
        if (w[0] == "ball") {
          if (w.size() != 2) fail("domain ball needs a radius");
          p.domain.kind = DomainKind::ball;
          p.domain.radius = std::stod(w[1]);
        } else if (w[0] == "rect") {
          p.domain.kind = DomainKind::rect;
          for (std::size_t k = 1; k < w.size(); ++k) {
            std::size_t dots = w[k].find("..");
            if (dots == std::string::npos) fail("rect bounds look like lo..hi");
            p.domain.lo.push_back(std::stod(w[k].substr(0, dots)));
            p.domain.hi.push_back(std::stod(w[k].substr(dots + 2)));
          }
          if (p.domain.lo.empty()) fail("rect needs at least one lo..hi pair");
        } else if (w[0] == "wholespace") {
          p.domain.kind = DomainKind::wholespace;
        } else {
          fail("unknown domain '" + w[0] + "'");
        }
        saw_domain = true;
      } else if (key == "a") {
        p.a = CoefficientField::from_expression(value);
      } else if (key == "c") {
        p.c = CoefficientField::from_expression(value);
      } else if (key == "a_table") {
        p.a = CoefficientField::from_table(TableProfile::load(base_dir + "/" + value));
      } else if (key == "c_table") {
        p.c = CoefficientField::from_table(TableProfile::load(base_dir + "/" + value));
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const ParseError& e) {
      fail("in '" + key + "' at column " + std::to_string(e.position() + 1) + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  if (!saw_dim) throw std::runtime_error(origin + ": missing 'dim'");
  if (!saw_domain) throw std::runtime_error(origin + ": missing 'domain'");
  p.validate();
  return p;
}

Problem parse_problem_text(const std::string& text, const std::string& origin) {
  return parse_problem_impl(text, origin, ".");
}

Problem parse_problem_file(const std::string& path) {
  return parse_problem_impl(read_text_file(path), path, dirname_of(path));
}

DiscreteField eval_on_grid(const CoefficientField& f, const GridPtr& grid) {
  DiscreteField out(grid, 0.0);
  switch (grid->kind) {
    case GridKind::radial: {
      if (!f.radial())
        throw std::invalid_argument("non-radial coefficient on a radial grid");
      for (std::size_t i = 0; i < grid->size(); ++i)
        out[i] = eval_field(f, EvalPoint::radius(grid->xs[i]));
      return out;
    }
    case GridKind::rect1d: {
      for (std::size_t i = 0; i < grid->size(); ++i) {
        double x[1] = {grid->xs[i]};
        out[i] = eval_field(f, EvalPoint{std::fabs(x[0]), x, 1});
      }
      return out;
    }
    case GridKind::rect2d: {
      for (std::size_t j = 0; j < grid->ny(); ++j) {
        for (std::size_t i = 0; i < grid->nx(); ++i) {
          double x[2] = {grid->xs[i], grid->ys[j]};
          out[j * grid->nx() + i] = eval_field(f, EvalPoint{std::hypot(x[0], x[1]), x, 2});
        }
      }
      return out;
    }
  }
  throw std::logic_error("unknown grid kind");
}

namespace {

// Deterministic unit directions: exact poles for N=1, equal angles for N=2,
// Fibonacci sphere for N=3, fixed-seed Gaussian directions above.
std::vector<std::vector<double>> sphere_directions(int dim, int count) {
  std::vector<std::vector<double>> dirs;
  if (dim == 1) {
    dirs.push_back({1.0});
    dirs.push_back({-1.0});
    return dirs;
  }
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      double th = 2.0 * M_PI * k / count;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
    return dirs;
  }
  if (dim == 3) {
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      double z = 1.0 - 2.0 * (k + 0.5) / count;
      double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      dirs.push_back({rho * std::cos(golden * k), rho * std::sin(golden * k), z});
    }
    return dirs;
  }
  std::mt19937_64 rng(0x51e9de5eedull);  // fixed seed: envelopes must be reproducible
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < count; ++k) {
    std::vector<double> d(dim);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (int j = 0; j < dim; ++j) {
        d[j] = gauss(rng);
        norm += d[j] * d[j];
      }
      norm = std::sqrt(norm);
    } while (norm < 1e-8);
    for (int j = 0; j < dim; ++j) d[j] /= norm;
    dirs.push_back(std::move(d));
  }
  return dirs;
}

}  // namespace

double phi_envelope(const Problem& p, double r, const EnvelopeOptions& opt) {
  if (r < 0) throw std::invalid_argument("phi_envelope: r must be >= 0");
  if (p.a.radial()) return eval_field(p.a, EvalPoint::radius(r));
  double best = -HUGE_VAL;
  for (const auto& d : sphere_directions(p.dim, opt.sphere_samples)) {
    std::vector<double> x(d.size());
    for (std::size_t j = 0; j < d.size(); ++j) x[j] = r * d[j];
    best = std::max(best, eval_field(p.a, EvalPoint{r, x.data(), p.dim}));
  }
  return best * opt.safety;
}

namespace {

struct WorstSample {
  double value = HUGE_VAL;
  std::string field, where;
  void offer(double v, const std::string& f, const std::string& w) {
    if (v < value) {
      value = v;
      field = f;
      where = w;
    }
  }
};

void sample_point(const Problem& p, const EvalPoint& pt, const std::string& where,
                  WorstSample& worst) {
  worst.offer(eval_field(p.a, pt), "a", where);
  worst.offer(eval_field(p.c, pt), "c", where);
}

std::string radius_label(double r) { return "r=" + format_g17(r); }

}  // namespace

AssumptionReport check_assumptions(const Problem& p, const SamplingSpec& s) {
  p.validate();
  AssumptionReport rep;

  // AC2: strict positivity of a and c, sampled over the domain.
  WorstSample worst;
  const bool radial_pair = p.a.radial() && p.c.radial();
  auto sample_radius = [&](double r) {
    if (radial_pair) {
      sample_point(p, EvalPoint::radius(r), radius_label(r), worst);
      return;
    }
    for (const auto& d : sphere_directions(p.dim, s.sphere_samples)) {
      std::vector<double> x(d.size());
      for (std::size_t j = 0; j < d.size(); ++j) x[j] = r * d[j];
      sample_point(p, EvalPoint{r, x.data(), p.dim}, radius_label(r), worst);
    }
  };

  switch (p.domain.kind) {
    case DomainKind::ball: {
      for (std::size_t i = 0; i < s.radial_samples; ++i)
        sample_radius(p.domain.radius * static_cast<double>(i) /
                      static_cast<double>(s.radial_samples - 1));
      break;
    }
    case DomainKind::rect: {
      if (p.dim == 1) {
        for (std::size_t i = 0; i < s.radial_samples; ++i) {
          double x[1] = {p.domain.lo[0] + (p.domain.hi[0] - p.domain.lo[0]) *
                                              static_cast<double>(i) /
                                              static_cast<double>(s.radial_samples - 1)};
          sample_point(p, EvalPoint{std::fabs(x[0]), x, 1}, "x=" + format_g17(x[0]), worst);
        }
      } else {
        const std::size_t k = 32;
        for (std::size_t j = 0; j < k; ++j) {
          for (std::size_t i = 0; i < k; ++i) {
            double x[2] = {
                p.domain.lo[0] + (p.domain.hi[0] - p.domain.lo[0]) * i / double(k - 1),
                p.domain.lo[1] + (p.domain.hi[1] - p.domain.lo[1]) * j / double(k - 1)};
            sample_point(p, EvalPoint{std::hypot(x[0], x[1]), x, 2},
                         "x=(" + format_g17(x[0]) + "," + format_g17(x[1]) + ")", worst);
          }
        }
      }
      break;
    }
    case DomainKind::wholespace: {
      const std::size_t half = s.radial_samples / 2;
      for (std::size_t i = 0; i < half; ++i)
        sample_radius(10.0 * static_cast<double>(i) / static_cast<double>(half - 1));
      for (std::size_t i = 0; i < half; ++i)
        sample_radius(10.0 * std::pow(s.r_max / 10.0,
                                      static_cast<double>(i) / static_cast<double>(half - 1)));
      break;
    }
  }
  rep.ac2_pass = worst.value > 0.0;
  rep.ac2_worst_value = worst.value;
  rep.ac2_worst_field = worst.field;
  rep.ac2_worst_where = worst.where;

  // A3: integral of r*phi(r) over [0, inf), tail handled by substitution.
  if (p.domain.kind == DomainKind::wholespace) {
    rep.a3_checked = true;
    QuadOptions qopt;
    qopt.rel_tol = 1e-10;
    QuadResult a3 = integrate_to_infinity(
        [&](double r) { return r * phi_envelope(p, r); }, 0.0, qopt);
    rep.a3_value = a3.value;
    rep.a3_finite = a3.converged && std::isfinite(a3.value);

    // mu: least-squares slope of ln phi vs ln r over the last decade.
    const int pts = 32;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    bool usable = true;
    std::vector<double> lx(pts), ly(pts);
    for (int i = 0; i < pts; ++i) {
      double r = (s.r_max / 10.0) * std::pow(10.0, static_cast<double>(i) / (pts - 1));
      double phi = phi_envelope(p, r);
      if (!(phi > 0) || !std::isfinite(phi)) {
        usable = false;
        break;
      }
      lx[i] = std::log(r);
      ly[i] = std::log(phi);
      sx += lx[i];
      sy += ly[i];
      sxx += lx[i] * lx[i];
      sxy += lx[i] * ly[i];
    }
    if (usable) {
      const double slope = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
      const double icept = (sy - slope * sx) / pts;
      double rss = 0;
      for (int i = 0; i < pts; ++i) {
        const double e = ly[i] - (icept + slope * lx[i]);
        rss += e * e;
      }
      rep.mu = -slope;
      rep.mu_fit_rms = std::sqrt(rss / pts);
      rep.mu_available = rep.mu_fit_rms <= s.mu_fit_rms_max;
      rep.mu_admissible = rep.mu_available && rep.mu > 2.0 && rep.mu < p.dim;
    }
  }
  return rep;
}

std::string render_report(const AssumptionReport& r, const Problem& p) {
  std::ostringstream out;
  out << "assumption report\n";
  out << "  ac2 positivity: " << (r.ac2_pass ? "pass" : "FAIL") << " (worst "
      << r.ac2_worst_field << " = " << format_g17(r.ac2_worst_value) << " at "
      << r.ac2_worst_where << ")\n";
  if (r.a3_checked) {
    out << "  a3 integral of r*phi: "
        << (r.a3_finite ? format_g17(r.a3_value) : std::string("divergent/undetermined"))
        << " (" << (r.a3_finite ? "finite" : "FAIL") << ")\n";
    if (r.mu_available) {
      out << "  mu estimate: " << format_g17(r.mu) << " (fit rms "
          << format_g17(r.mu_fit_rms) << "), " << (r.mu_admissible ? "" : "NOT ")
          << "admissible in (2, N=" << p.dim << ")\n";
    } else {
      out << "  mu estimate: unavailable (far field is not a power law)\n";
    }
  } else {
    out << "  a3 integral: not applicable (bounded domain)\n";
  }
  out << "  holder continuity: assumed, not machine-checkable\n";
  return out.str();
}

}  // namespace selpde
