#include "supind/superlinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "supind/ivp.hpp"

namespace supind {

std::string to_string(DomainTag tag) {
  switch (tag) {
    case DomainTag::d1: return "D1";
    case DomainTag::d2: return "D2";
    case DomainTag::d3: return "D3";
    case DomainTag::tangency: return "tangency";
    case DomainTag::center: return "center";
    case DomainTag::below_center: return "below_center";
    case DomainTag::above_center: return "above_center";
  }
  return "unknown";
}

bool passes_residuals(const SolutionRecord& rec, const ValidationTolerances& tol) {
  const auto& r = rec.residuals;
  const double scale = r.max_u;
  return r.min_u > 0.0 && r.neumann_left <= tol.neumann * scale &&
         r.neumann_right <= tol.neumann * scale && r.oracle_terminal <= tol.oracle * scale &&
         r.energy_drift <= tol.energy &&
         r.interface_u <= tol.interface * std::max(1.0, scale) &&
         r.interface_v <= tol.interface * std::max(1.0, scale);
}

PhasePortrait::PhasePortrait(double lambda, double p, double b)
    : lambda_(lambda), p_(p), b_(b), kcoef_(2.0 * b / (p + 1.0)), pow_p_(p),
      k_(derive_constants(lambda, p, b)) {}

PhasePortrait::PhasePortrait(const ProblemParams& params)
    : PhasePortrait(params.lambda(), params.p(), params.b()) {}

double PhasePortrait::potential(double u) const {
  return lambda_ * u * u + kcoef_ * pow_p_(u) * u;
}

double PhasePortrait::potential_slope(double u) const {
  return 2.0 * lambda_ * u + 2.0 * b_ * pow_p_(u);
}

double PhasePortrait::energy(double u, double v) const { return v * v + potential(u); }

double PhasePortrait::speed_squared(double e0, double u) const { return e0 - potential(u); }

double PhasePortrait::homoclinic_v(double u) const {
  if (!(u >= 0.0 && u <= k_.u_h)) throw InvalidParameter("homoclinic_v: u outside [0, u_h]");
  return std::sqrt(std::max(0.0, -potential(u)));
}

double PhasePortrait::acceleration(double u) const { return -lambda_ * u - b_ * pow_p_(u); }

double PhasePortrait::speed_squared_near(double r, double d) const {
  // E(r) - E(r + d) with r^{p+1} - (r+d)^{p+1} = -r^{p+1} expm1((p+1) log1p(d/r))
  return -lambda_ * d * (2.0 * r + d) -
         kcoef_ * pow_p_(r) * r * std::expm1((p_ + 1.0) * std::log1p(d / r));
}

double PhasePortrait::polish_root(double e0, double u, double lo, double hi) const {
  for (int i = 0; i < 3; ++i) {
    const double q = e0 - potential(u);
    const double dq = -potential_slope(u);
    if (q == 0.0 || dq == 0.0) break;
    const double next = u - q / dq;
    if (!(next > lo && next < hi)) break;
    if (std::abs(e0 - potential(next)) >= std::abs(q)) break;
    u = next;
  }
  return u;
}

OrbitSlice PhasePortrait::turning_points(double e0) const {
  const double e_center = k_.omega_energy;
  const double omega = k_.omega;
  if (!(e0 >= e_center)) throw EmptyOrbit("turning_points: energy below the center level");
  OrbitSlice s;
  s.e0 = e0;
  auto q = [&](double u) { return e0 - potential(u); };
  const double tol = 4e-16 * k_.u_h;
  if (e0 == e_center) {
    s.m = omega;
    s.M = omega;
    s.kind = OrbitKind::center;
    return s;
  }
  if (e0 < 0.0) {
    s.kind = OrbitKind::closed;
    const double m = find_root(q, 0.0, omega, e0, e0 - e_center, tol);
    const double M = find_root(q, omega, k_.u_h, e0 - e_center, e0, tol);
    s.m = polish_root(e0, m, 0.0, omega);
    s.M = polish_root(e0, M, omega, k_.u_h);
    return s;
  }
  if (e0 == 0.0) {
    s.kind = OrbitKind::homoclinic;
    s.M = k_.u_h;
    return s;
  }
  s.kind = OrbitKind::exterior;
  double hi = 2.0 * k_.u_h;
  while (q(hi) > 0.0) hi *= 2.0;
  const double M = find_root(q, k_.u_h, hi, e0, q(hi), 4e-16 * hi);
  s.M = polish_root(e0, M, k_.u_h, hi);
  return s;
}

OrbitSlice PhasePortrait::slice_through(double x) const {
  if (!(x > 0.0)) throw InvalidParameter("slice_through: x must be positive");
  const double omega = k_.omega;
  if (x == omega) return turning_points(k_.omega_energy);
  OrbitSlice s;
  s.e0 = potential(x);
  auto q = [&](double u) { return s.e0 - potential(u); };
  if (x < omega) {
    s.kind = OrbitKind::closed;
    s.m = x;
    const double M = find_root(q, omega, k_.u_h, s.e0 - k_.omega_energy, s.e0, 4e-16 * k_.u_h);
    s.M = polish_root(s.e0, M, omega, k_.u_h);
    return s;
  }
  if (x < k_.u_h && s.e0 < 0.0) {
    s.kind = OrbitKind::closed;
    s.M = x;
    const double m = find_root(q, 0.0, omega, s.e0, s.e0 - k_.omega_energy, 4e-16 * omega);
    s.m = polish_root(s.e0, m, 0.0, omega);
    return s;
  }
  s.kind = s.e0 == 0.0 ? OrbitKind::homoclinic : OrbitKind::exterior;
  s.M = x;
  return s;
}

double PhasePortrait::arc_half(const OrbitSlice&, double anchor, bool from_below, double u1,
                               double u2, const QuadratureSpec& spec) const {
  // u = anchor + w^2 (from below) or anchor - w^2, integrand 2w / sqrt(Q)
  const double w1 = std::sqrt(std::abs(u1 - anchor));
  const double w2 = std::sqrt(std::abs(u2 - anchor));
  const double sign = from_below ? 1.0 : -1.0;
  auto g = [&](double w) {
    if (w == 0.0) return 0.0;
    const double q = speed_squared_near(anchor, sign * w * w);
    return 2.0 * w / std::sqrt(q);
  };
  const double lo = std::min(w1, w2);
  const double hi = std::max(w1, w2);
  if (hi <= lo) return 0.0;
  return integrate(g, lo, hi, spec.with_ends(EndpointKind::regular, EndpointKind::regular));
}

double PhasePortrait::arc_time(const OrbitSlice& slice, double u_from, double u_to,
                               const QuadratureSpec& spec) const {
  if (u_from == u_to) return 0.0;
  if (!(u_from < u_to)) throw InvalidParameter("arc_time: requires u_from <= u_to");
  const double slack = 1e-12 * std::max(slice.M, 1.0);
  const double low = slice.m.value_or(0.0);
  if (u_from < low - slack || u_to > slice.M + slack || u_from < 0.0) {
    throw InvalidParameter("arc_time: endpoints outside the orbit slice");
  }
  u_from = std::max(u_from, low);
  u_to = std::min(u_to, slice.M);
  if (slice.kind == OrbitKind::center) return center_half_period();

  const double omega = k_.omega;
  double total = 0.0;
  if (slice.kind == OrbitKind::closed) {
    const double m = *slice.m;
    if (u_from < omega) total += arc_half(slice, m, true, u_from, std::min(u_to, omega), spec);
    if (u_to > omega) total += arc_half(slice, slice.M, false, std::max(u_from, omega), u_to, spec);
    return total;
  }
  if (u_from < omega) {
    const double e0 = slice.e0;
    auto f = [&](double u) { return 1.0 / std::sqrt(e0 - potential(u)); };
    total += integrate(f, u_from, std::min(u_to, omega), spec.with_ends(EndpointKind::regular, EndpointKind::regular));
  }
  if (u_to > omega) total += arc_half(slice, slice.M, false, std::max(u_from, omega), u_to, spec);
  return total;
}

double PhasePortrait::t1_map(double x) const {
  if (!(x > 0.0 && x < k_.u_h)) throw InvalidParameter("t1_map: x outside (0, u_h)");
  const double omega = k_.omega;
  const double t_center = center_half_period();
  const double delta = 1e-4 * omega;
  auto quad = [&](double z) {
    const auto s = slice_through(z);
    return arc_time(s, *s.m, s.M);
  };
  if (x == omega) return t_center;
  if (std::abs(x - omega) <= delta) {
    const double side = x < omega ? -1.0 : 1.0;
    const double edge = quad(omega + side * delta);
    const double r = (x - omega) / delta;
    return t_center + (edge - t_center) * r * r;
  }
  return quad(x);
}

double PhasePortrait::tn_map(int n, double x) const {
  if (n < 1) throw InvalidParameter("tn_map: n must be positive");
  return n * t1_map(x);
}

SolutionRecord alpha0_profile(const PhasePortrait& portrait, double x, int j, DomainTag tag,
                              const ProfileOptions& opt) {
  if (opt.grid_size < 2) throw InvalidParameter("alpha0_profile: grid needs at least 2 points");
  SolutionRecord rec;
  rec.x = x;
  rec.j = j;
  rec.domain = tag;
  auto field = [&](double, const State<2>& y) { return State<2>(y[1], portrait.acceleration(y[0])); };
  IvpOptions io;
  io.rel_tol = opt.rel_tol;
  io.abs_tol = opt.rel_tol * 1e-2 * portrait.omega();
  io.record_steps = false;
  io.blow_up_cap = 1e8 * std::max(1.0, portrait.omega());
  io.guarded_components = 1;
  const int n = opt.grid_size;
  io.sample_times.resize(n);
  for (int i = 0; i < n; ++i) io.sample_times[i] = (i == n - 1) ? 1.0 : static_cast<double>(i) / (n - 1);
  const auto res = integrate_ivp<double, 2>(field, 0.0, 1.0, State<2>(x, 0.0), io);
  if (res.reason != Termination::end_of_interval || res.times.size() != static_cast<std::size_t>(n)) {
    throw NumericalFailure("alpha0_profile: integration did not reach t = 1");
  }
  const double e0 = portrait.potential(x);
  const double e_scale = std::max(std::abs(e0), std::abs(portrait.constants().omega_energy));
  rec.profile.reserve(n);
  rec.residuals.min_u = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const auto& s = res.states[i];
    rec.profile.push_back({res.times[i], s[0], s[1]});
    rec.residuals.max_u = std::max(rec.residuals.max_u, std::abs(s[0]));
    rec.residuals.min_u = std::min(rec.residuals.min_u, s[0]);
    rec.residuals.energy_drift =
        std::max(rec.residuals.energy_drift, std::abs(portrait.energy(s[0], s[1]) - e0) / e_scale);
  }
  rec.residuals.neumann_left = 0.0;
  rec.residuals.neumann_right = std::abs(res.terminal[1]);
  rec.residuals.oracle_terminal = rec.residuals.neumann_right;
  return rec;
}

std::vector<SolutionRecord> solve_alpha0(const ProblemParams& params, const ProfileOptions& opt) {
  if (params.alpha() != 0.0) throw InvalidParameter("solve_alpha0: alpha must be 0");
  const PhasePortrait portrait(params);
  const int n = band_index(params.lambda(), params.p());
  const double omega = portrait.omega();
  const double u_h = portrait.u_h();
  std::vector<SolutionRecord> out;

  SolutionRecord constant;
  constant.x = omega;
  constant.j = 0;
  constant.domain = DomainTag::center;
  for (int i = 0; i < opt.grid_size; ++i) {
    const double t = (i == opt.grid_size - 1) ? 1.0 : static_cast<double>(i) / (opt.grid_size - 1);
    constant.profile.push_back({t, omega, 0.0});
  }
  constant.residuals.max_u = omega;
  constant.residuals.min_u = omega;
  out.push_back(constant);

  for (int j = 1; j <= n; ++j) {
    auto g = [&](double x) { return portrait.tn_map(j, x) - 1.0; };
    const double g_center = j * portrait.center_half_period() - 1.0;
    if (!(g_center < 0.0)) continue;
    // below the center: T_j decreases from +inf to j T(Omega)
    double lo = 0.5 * omega;
    while (g(lo) <= 0.0) lo *= 0.5;
    const double x_minus = find_root(g, lo, omega, g(lo), g_center, 1e-14 * omega);
    // above the center: T_j increases to +inf at u_h
    double hi = omega + 0.5 * (u_h - omega);
    while (g(hi) <= 0.0) hi = u_h - 0.5 * (u_h - hi);
    const double x_plus = find_root(g, omega, hi, g_center, g(hi), 1e-14 * omega);
    out.push_back(alpha0_profile(portrait, x_minus, j, DomainTag::below_center, opt));
    out.push_back(alpha0_profile(portrait, x_plus, j, DomainTag::above_center, opt));
  }
  std::sort(out.begin(), out.end(), [](const SolutionRecord& a, const SolutionRecord& b) { return a.x < b.x; });
  return out;
}

}  // namespace supind
