#include "supind/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace supind {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Kronrod 15-point abscissae (positive half) and weights; Gauss 7-point weights
// live on the odd Kronrod nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gauss_kronrod_15(const ScalarFn& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resg = fc * kWg[3];
  double resk = fc * kWgk[7];
  double resabs = std::abs(resk);
  std::array<double, 7> f1{};
  std::array<double, 7> f2{};
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double sum = f1[j] + f2[j];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  }
  const double hl = std::abs(half);
  double err = std::abs((resk - resg) * half);
  resasc *= hl;
  resabs *= hl;
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  if (resabs > std::numeric_limits<double>::min() / (50.0 * kEps)) {
    err = std::max(50.0 * kEps * resabs, err);
  }
  return {a, b, resk * half, err};
}

QuadratureResult adaptive(const ScalarFn& f, double a, double b, const QuadratureSpec& spec) {
  std::priority_queue<Segment> heap;
  Segment first = gauss_kronrod_15(f, a, b);
  double total = first.value;
  double total_err = first.error;
  heap.push(first);
  int subdivisions = 0;
  auto target = [&] { return std::max(spec.abs_tol, spec.rel_tol * std::abs(total)); };
  while (total_err > target()) {
    if (!std::isfinite(total)) {
      throw QuadratureFailure(total, total_err);
    }
    if (subdivisions >= spec.max_subdivisions) {
      throw QuadratureFailure(total, total_err);
    }
    Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b))) {
      // Interval cannot be split further in double precision.
      if (total_err <= 1e3 * target()) break;
      throw QuadratureFailure(total, total_err);
    }
    heap.pop();
    Segment left = gauss_kronrod_15(f, worst.a, mid);
    Segment right = gauss_kronrod_15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }
  // Re-sum to shed accumulated cancellation from the running updates.
  double sum = 0.0;
  double err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {sum, err, subdivisions};
}

}  // namespace

Power::Power(double exponent) : e_(exponent), n_(-1) {
  if (exponent >= 0.0 && exponent <= 12.0 && exponent == std::floor(exponent)) {
    n_ = static_cast<int>(exponent);
  }
}

QuadratureFailure::QuadratureFailure(double estimate, double error_bound)
    : NumericalFailure([&] {
        std::ostringstream os;
        os.precision(6);
        os << "quadrature failure: estimate " << estimate << ", error bound " << error_bound;
        return os.str();
      }()),
      estimate_(estimate),
      error_bound_(error_bound) {}

QuadratureResult integrate_detailed(const ScalarFn& f, double a, double b,
                                    const QuadratureSpec& spec) {
  if (!(a < b)) {
    if (a == b) return {};
    throw InvalidParameter("integrate: requires a < b");
  }
  if (spec.rel_tol <= 0.0 || spec.abs_tol <= 0.0 || spec.max_subdivisions < 1) {
    throw InvalidParameter("integrate: tolerances must be positive and the cap at least 1");
  }
  const bool left = spec.left == EndpointKind::inverse_sqrt;
  const bool right = spec.right == EndpointKind::inverse_sqrt;

  auto from_left = [&](double lo, double hi) {
    // u = lo + w^2, w in [0, sqrt(hi - lo)]
    ScalarFn g = [&f, lo](double w) { return 2.0 * w * f(lo + w * w); };
    return adaptive(g, 0.0, std::sqrt(hi - lo), spec);
  };
  auto from_right = [&](double lo, double hi) {
    // u = hi - w^2
    ScalarFn g = [&f, hi](double w) { return 2.0 * w * f(hi - w * w); };
    return adaptive(g, 0.0, std::sqrt(hi - lo), spec);
  };

  if (left && right) {
    const double mid = 0.5 * (a + b);
    QuadratureResult l = from_left(a, mid);
    QuadratureResult r = from_right(mid, b);
    return {l.value + r.value, l.error + r.error, l.subdivisions + r.subdivisions};
  }
  if (left) return from_left(a, b);
  if (right) return from_right(a, b);
  return adaptive(f, a, b, spec);
}

double integrate(const ScalarFn& f, double a, double b, const QuadratureSpec& spec) {
  return integrate_detailed(f, a, b, spec).value;
}

double integrate_to_infinity(const ScalarFn& f, double a, double decay,
                             const QuadratureSpec& spec) {
  if (!(decay > 0.0) || !(a > 0.0)) {
    throw InvalidParameter("integrate_to_infinity: needs a > 0 and decay > 0");
  }
  const double pivot = 2.0 * a;
  const double head = integrate(f, a, pivot, spec.with_ends(spec.left, EndpointKind::regular));
  // xi = w^(-1/decay): dxi = (1/decay) w^(-1/decay - 1) dw, w in (0, pivot^-decay]
  ScalarFn tail = [&f, decay](double w) {
    if (w <= 0.0) return 0.0;
    const double xi = std::pow(w, -1.0 / decay);
    return f(xi) * xi / (decay * w);
  };
  const double w_max = std::pow(pivot, -decay);
  ScalarFn tail_safe = [&](double w) {
    const double v = tail(w);
    return std::isfinite(v) ? v : 0.0;
  };
  const double rest = integrate(tail_safe, 0.0, w_max,
                                spec.with_ends(EndpointKind::regular, EndpointKind::regular));
  return head + rest;
}

double find_root(const ScalarFn& g, double lo, double hi, double tol) {
  return find_root(g, lo, hi, g(lo), g(hi), tol);
}

double find_root(const ScalarFn& g, double lo, double hi, double g_lo, double g_hi,
                 double tol) {
  double a = lo;
  double b = hi;
  double fa = g_lo;
  double fb = g_hi;
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (!(std::isfinite(fa) || std::isinf(fa)) || !(std::isfinite(fb) || std::isinf(fb)) ||
      std::signbit(fa) == std::signbit(fb)) {
    throw NoSignChange("no sign change");
  }
  // Brent's zeroin. Infinite end values are bisected away first.
  double c = b;
  double fc = fb;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < 400; ++iter) {
    if (std::signbit(fb) == std::signbit(fc)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * kEps * std::abs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    const bool finite_ends = std::isfinite(fa) && std::isfinite(fb) && std::isfinite(fc);
    if (finite_ends && std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double s = fb / fa;
      double pp;
      double q;
      if (a == c) {
        pp = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        pp = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (pp > 0.0) q = -q;
      pp = std::abs(pp);
      if (2.0 * pp < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = pp / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : std::copysign(tol1, xm);
    fb = g(b);
    if (std::isnan(fb)) throw NumericalFailure("find_root: function returned NaN");
  }
  return b;
}

double find_root_newton(const ValueSlopeFn& g, double lo, double hi, double g_lo, double g_hi,
                        double tol) {
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if (std::isnan(g_lo) || std::isnan(g_hi) || std::signbit(g_lo) == std::signbit(g_hi)) {
    throw NoSignChange("no sign change");
  }
  const bool rising = g_lo < 0.0;
  double x;
  if (std::isfinite(g_lo) && std::isfinite(g_hi)) {
    x = lo - g_lo * (hi - lo) / (g_hi - g_lo);
  } else {
    x = 0.5 * (lo + hi);
  }
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  double step_old = hi - lo;
  double step = step_old;
  for (int iter = 0; iter < 200; ++iter) {
    auto [f, df] = g(x);
    if (std::isnan(f)) throw NumericalFailure("find_root_newton: function returned NaN");
    if (f == 0.0) return x;
    const bool below = rising ? (f < 0.0) : (f > 0.0);
    if (below) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= tol) return 0.5 * (lo + hi);
    double next = (std::isfinite(f) && std::isfinite(df) && df != 0.0) ? x - f / df : lo;
    // bisect when Newton leaves the bracket or stops halving the step
    if (!(next > lo && next < hi) || std::abs(next - x) > 0.5 * step_old) next = 0.5 * (lo + hi);
    step_old = step;
    step = std::abs(next - x);
    if (step <= 0.5 * tol) return next;
    x = next;
  }
  return x;
}

std::vector<Bracket> scan_brackets(const ScalarFn& g, double lo, double hi, int n_grid) {
  if (!(lo < hi) || n_grid < 2) throw InvalidParameter("scan_brackets: needs lo < hi, n >= 2");
  std::vector<double> xs(n_grid);
  std::vector<double> values(n_grid);
  for (int i = 0; i < n_grid; ++i) {
    xs[i] = (i == n_grid - 1) ? hi : lo + (hi - lo) * i / (n_grid - 1);
    values[i] = g(xs[i]);
  }
  std::vector<Bracket> out;
  for (std::size_t cell : sign_change_cells(values)) out.emplace_back(xs[cell], xs[cell + 1]);
  return out;
}

std::vector<std::size_t> sign_change_cells(const std::vector<double>& values) {
  std::vector<std::size_t> cells;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double a = values[i];
    const double b = values[i + 1];
    if (std::isnan(a) || std::isnan(b)) continue;
    if (a == 0.0) {
      // A grid point sitting exactly on a root opens the cell to its right only.
      if (b != 0.0) cells.push_back(i);
      continue;
    }
    if (b != 0.0 && std::signbit(a) != std::signbit(b)) cells.push_back(i);
  }
  return cells;
}

std::pair<double, double> minimize_golden(const ScalarFn& f, double lo, double hi, double tol,
                                          int max_iter) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace supind
