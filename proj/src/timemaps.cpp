#include "supind/timemaps.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

namespace supind {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// Roots of e(s) = e0 on the cells of a sorted energy table. The optional
// window [s_min, s_max] restricts the search to part of the curve.
std::vector<double> energy_roots(const GammaCurve& curve, const PhasePortrait& portrait,
                                 const std::vector<CurveEnergySample>& table, double e0,
                                 double rel_tol, double s_min = 0.0, double s_max = kInf) {
  std::vector<CurveEnergySample> rows;
  rows.reserve(table.size() + 2);
  if (e0 < 0.0 && s_min <= 0.0) rows.push_back({0.0, 0.0, 0.0, 0.0});
  for (const auto& r : table) {
    if (r.s >= s_min && r.s <= s_max) rows.push_back(r);
  }
  const bool open_end = s_max == kInf;
  if (open_end) rows.push_back({curve.s_infinity(), kInf, kInf, kInf});
  std::vector<double> f(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) f[i] = rows[i].e - e0;
  auto g = [&](double s) {
    const auto c = curve_energy(curve, portrait, s);
    return std::make_pair(c.e - e0, c.de);
  };
  std::vector<double> out;
  for (std::size_t cell : sign_change_cells(f)) {
    const double lo = rows[cell].s;
    const double hi = rows[cell + 1].s;
    out.push_back(find_root_newton(g, lo, hi, f[cell], f[cell + 1], rel_tol * hi));
  }
  return out;
}

}  // namespace

CurveEnergySample curve_energy(const GammaCurve& curve, const PhasePortrait& portrait, double s) {
  if (s <= 0.0) return {0.0, 0.0, 0.0, 0.0};
  const auto st = curve.shoot_or_escape(s);
  if (!std::isfinite(st.x)) return {s, kInf, kInf, kInf};
  const double e = st.y * st.y + portrait.potential(st.x);
  const double de = 2.0 * st.y * st.y_s + portrait.potential_slope(st.x) * st.x_s;
  return {s, st.x, e, de};
}

CurveGeometry curve_geometry(const GammaCurve& curve, const PhasePortrait& portrait,
                             std::vector<std::string>& warnings) {
  if (!(curve.alpha() > 0.0)) throw InvalidParameter("curve_geometry: alpha must be positive");
  CurveGeometry g;
  const double omega = portrait.omega();
  const double u_h = portrait.u_h();
  const double s_omega = curve.s_of_x(omega);
  const double s_uh = curve.s_of_x(u_h);
  const double s_far = curve.s_of_x(10.0 * u_h);

  auto& table = g.table;
  const int n_a = 160;
  for (int i = 0; i <= n_a; ++i) {
    const double s = s_omega * std::pow(10.0, -7.0 * (n_a - i) / n_a);
    table.push_back(curve_energy(curve, portrait, s));
  }
  const int n_b = 200;
  for (int i = 1; i <= n_b; ++i) table.push_back(curve_energy(curve, portrait, s_omega + (s_uh - s_omega) * i / n_b));
  const int n_c = 40;
  for (int i = 1; i <= n_c; ++i) table.push_back(curve_energy(curve, portrait, s_uh + (s_far - s_uh) * i / n_c));

  // Tangency: zeros of dE/ds with x < Omega.
  std::vector<double> de;
  std::vector<double> ss;
  for (const auto& r : table) {
    if (r.s > s_omega) break;
    de.push_back(r.de);
    ss.push_back(r.s);
  }
  auto de_at = [&](double s) { return curve_energy(curve, portrait, s).de; };
  std::vector<double> tangencies;
  for (std::size_t cell : sign_change_cells(de)) {
    tangencies.push_back(find_root(de_at, ss[cell], ss[cell + 1], de[cell], de[cell + 1], 1e-15 * ss[cell + 1]));
  }
  if (tangencies.empty()) throw NumericalFailure("no tangency: dE/ds keeps its sign on (0, Omega)");
  g.s_t = tangencies.back();
  const auto at_t = curve_energy(curve, portrait, g.s_t);
  g.x_t = at_t.x;
  g.e_t = at_t.e;
  if (tangencies.size() > 1) {
    std::string msg = "several orbits tangent to the shooting curve (alpha=" + fmt(curve.alpha()) + "):";
    for (std::size_t i = 0; i + 1 < tangencies.size(); ++i) {
      const double x = curve_energy(curve, portrait, tangencies[i]).x;
      g.extra_tangencies.push_back(x);
      msg += " x=" + fmt(x);
    }
    msg += "; using the largest x_t=" + fmt(g.x_t);
    warnings.push_back(msg);
  }

  // Homoclinic crossing: first zero of E beyond the tangency.
  std::vector<CurveEnergySample> beyond;
  beyond.push_back(at_t);
  for (const auto& r : table) {
    if (r.s > g.s_t) beyond.push_back(r);
  }
  std::vector<double> ev(beyond.size());
  for (std::size_t i = 0; i < beyond.size(); ++i) ev[i] = beyond[i].e;
  const auto cells = sign_change_cells(ev);
  if (cells.empty()) throw NumericalFailure("no homoclinic crossing found on the shooting curve");
  auto e_at = [&](double s) {
    const auto c = curve_energy(curve, portrait, s);
    return std::make_pair(c.e, c.de);
  };
  std::vector<double> zeros;
  for (std::size_t cell : cells) {
    zeros.push_back(find_root_newton(e_at, beyond[cell].s, beyond[cell + 1].s, ev[cell], ev[cell + 1],
                                     1e-15 * beyond[cell + 1].s));
  }
  g.s_h = zeros.front();
  g.x_h = curve_energy(curve, portrait, g.s_h).x;
  if (zeros.size() > 1) {
    std::string msg = "shooting curve meets the homoclinic level more than once (alpha=" + fmt(curve.alpha()) + "):";
    for (std::size_t i = 1; i < zeros.size(); ++i) {
      const double x = curve_energy(curve, portrait, zeros[i]).x;
      g.extra_homoclinic.push_back(x);
      msg += " x=" + fmt(x);
    }
    warnings.push_back(msg);
  }

  table.push_back(at_t);
  table.push_back(curve_energy(curve, portrait, g.s_h));
  std::sort(table.begin(), table.end(), [](const auto& a, const auto& b) { return a.s < b.s; });
  return g;
}

double tangency_x(const GammaCurve& curve, const PhasePortrait& portrait) {
  std::vector<std::string> warnings;
  const auto g = curve_geometry(curve, portrait, warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return g.x_t;
}

double homoclinic_crossing_x(const GammaCurve& curve, const PhasePortrait& portrait) {
  std::vector<std::string> warnings;
  const auto g = curve_geometry(curve, portrait, warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return g.x_h;
}

std::vector<double> partner_point(double x, const GammaCurve& start, const GammaCurve& target,
                                  const PhasePortrait& portrait) {
  std::vector<std::string> warnings;
  const auto g = curve_geometry(target, portrait, warnings);
  const auto pt = start.at_x(x);
  const double e0 = pt.y * pt.y + portrait.potential(x);
  std::vector<double> out;
  for (double s : energy_roots(target, portrait, g.table, e0, 1e-14)) {
    out.push_back(curve_energy(target, portrait, s).x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double CrossingSchedule::tau_j(int j) const {
  if (j < 1) throw InvalidParameter("tau_j: j must be positive");
  if (crossings.empty()) return kUndefined;
  if (slice.kind != OrbitKind::closed) {
    return j == 1 ? start_time + crossing_times.front() : kUndefined;
  }
  // a lone crossing leaves every second arrival undefined
  const int per_lap = std::max(2, static_cast<int>(crossings.size()));
  const int lap = (j - 1) / per_lap;
  const int r = (j - 1) % per_lap;
  if (r >= static_cast<int>(crossings.size())) return kUndefined;
  return start_time + crossing_times[r] + lap * period;
}

double CrossingSchedule::theta(int k) const {
  if (k < 0) throw InvalidParameter("theta: k must be nonnegative");
  switch (domain) {
    case DomainTag::d1: return tau_j(2 * k + 2);
    case DomainTag::d2:
    case DomainTag::tangency: return tau_j(2 * k + 1);
    case DomainTag::d3: return k == 0 ? tau_j(1) : kUndefined;
    default: return kUndefined;
  }
}

double CrossingSchedule::theta_tilde(int k) const {
  if (k < 0) throw InvalidParameter("theta_tilde: k must be nonnegative");
  switch (domain) {
    case DomainTag::d1:
    case DomainTag::tangency: return tau_j(2 * k + 1);
    case DomainTag::d2: return tau_j(2 * k + 2);
    default: return kUndefined;
  }
}

TimeMaps::TimeMaps(const ProblemParams& params, const TimeMapOptions& opt)
    : params_(params), opt_(opt), portrait_(params), gamma0_(GammaCurve::left_of(params)),
      gamma1_(params.is_symmetric() ? gamma0_.reflected() : GammaCurve::right_of(params)),
      symmetric_route_(params.is_symmetric() && !opt.force_general) {
  if (!(params.alpha() > 0.0)) throw InvalidParameter("TimeMaps: alpha must be positive");
  geom_.departure = curve_geometry(gamma0_, portrait_, geom_.warnings);
  if (params.is_symmetric()) {
    geom_.arrival = geom_.departure;
  } else {
    geom_.arrival = curve_geometry(gamma1_, portrait_, geom_.warnings);
  }
}

CurveEnergySample TimeMaps::arrival_energy(double s) const { return curve_energy(gamma1_, portrait_, s); }

CurveEnergySample TimeMaps::departure_energy(double s) const { return curve_energy(gamma0_, portrait_, s); }

DomainTag TimeMaps::domain_of_s(double s) const {
  const auto& d = geom_.departure;
  if (s >= d.s_h) return DomainTag::d3;
  if (s < d.s_t) return DomainTag::d1;
  if (s == d.s_t) return DomainTag::tangency;
  return DomainTag::d2;
}

std::vector<double> TimeMaps::crossing_parameters(double e0, double s_departure) const {
  const auto& a = geom_.arrival;
  const double tol = opt_.root_rel_tol;
  if (!symmetric_route_) {
    return energy_roots(gamma1_, portrait_, a.table, e0, tol);
  }
  // The departure point is itself a crossing; only its partner is searched.
  if (e0 >= 0.0) return {s_departure};
  std::vector<double> other;
  if (s_departure < a.s_t) {
    other = energy_roots(gamma1_, portrait_, a.table, e0, tol, a.s_t, a.s_h);
  } else if (s_departure > a.s_t) {
    other = energy_roots(gamma1_, portrait_, a.table, e0, tol, 0.0, a.s_t);
  }
  // Energy at or below the tangent level up to rounding: the two crossings merge.
  const double partner = other.empty() ? a.s_t : other.front();
  std::vector<double> out = {s_departure, partner};
  std::sort(out.begin(), out.end());
  return out;
}

CrossingSchedule TimeMaps::build_schedule(const GammaCurve::Point& pt) const {
  CrossingSchedule sc;
  sc.s = pt.s;
  sc.x = pt.x;
  sc.y = pt.y;
  sc.e0 = pt.y * pt.y + portrait_.potential(pt.x);
  const auto& d = geom_.departure;
  if (sc.e0 >= 0.0 || pt.s >= d.s_h) {
    sc.domain = DomainTag::d3;
  } else if (pt.s < d.s_t) {
    sc.domain = DomainTag::d1;
  } else if (pt.s == d.s_t) {
    sc.domain = DomainTag::tangency;
  } else {
    sc.domain = DomainTag::d2;
  }
  // Points on D3 carry nonnegative energy by construction; rounding at x_h is clipped.
  if (sc.domain == DomainTag::d3) sc.e0 = std::max(sc.e0, 0.0);
  if (sc.domain != DomainTag::d3) sc.e0 = std::min(sc.e0, -std::numeric_limits<double>::min());

  sc.slice = portrait_.turning_points(std::max(sc.e0, portrait_.constants().omega_energy));
  const double lo = sc.slice.m.value_or(0.0);
  const double M = sc.slice.M;
  auto clamp = [&](double u) { return std::min(std::max(u, lo), M); };
  const auto& quad = opt_.quad;
  sc.start_time = portrait_.arc_time(sc.slice, clamp(sc.x), M, quad);

  const auto params = crossing_parameters(sc.e0, pt.s);
  std::vector<double> xs;
  for (double s : params) {
    if (symmetric_route_ && s == pt.s) {
      xs.push_back(pt.x);
    } else {
      xs.push_back(arrival_energy(s).x);
    }
  }
  std::sort(xs.begin(), xs.end(), std::greater<>());
  sc.crossings = xs;
  for (double z : xs) sc.crossing_times.push_back(portrait_.arc_time(sc.slice, clamp(z), M, quad));
  if (sc.slice.kind == OrbitKind::closed) {
    sc.period = 2.0 * portrait_.arc_time(sc.slice, *sc.slice.m, M, quad);
  }
  return sc;
}

CrossingSchedule TimeMaps::schedule_at_s(double s) const {
  if (!(s > 0.0 && s < gamma0_.s_infinity())) throw InvalidParameter("schedule_at_s: s outside (0, s_inf)");
  auto pt = gamma0_.at_s(s);
  return build_schedule(pt);
}

CrossingSchedule TimeMaps::schedule(double x) const {
  if (!(x > 0.0)) throw InvalidParameter("schedule: x must be positive");
  auto pt = gamma0_.at_x(x);
  // keep the tangency and homoclinic parameters exact when x hits them
  if (x == geom_.departure.x_t) pt.s = geom_.departure.s_t;
  if (x == geom_.departure.x_h) pt.s = geom_.departure.s_h;
  return build_schedule(pt);
}

std::vector<double> TimeMaps::partner_points(double x) const {
  const auto sc = schedule(x);
  std::vector<double> out = sc.crossings;
  std::sort(out.begin(), out.end());
  return out;
}

double TimeMaps::tau(double x) const {
  const auto sc = schedule(x);
  if (sc.slice.kind != OrbitKind::closed) throw InvalidParameter("tau: orbit is not periodic");
  return sc.period;
}

double TimeMaps::tau_j(int j, double x) const {
  const auto sc = schedule(x);
  if (sc.domain == DomainTag::d3 && j != 1) throw InvalidParameter("tau_j: only j = 1 is defined on D3");
  return sc.tau_j(j);
}

double TimeMaps::theta(int k, double x) const {
  const auto sc = schedule(x);
  if (sc.domain == DomainTag::d3 && k != 0) throw InvalidParameter("theta: x outside (0, x_h)");
  return sc.theta(k);
}

double TimeMaps::theta_tilde(int k, double x) const {
  const auto sc = schedule(x);
  if (sc.domain == DomainTag::d3) throw InvalidParameter("theta_tilde: x outside (0, x_h)");
  return sc.theta_tilde(k);
}

}  // namespace supind
