#include "supind/sublinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "supind/ivp.hpp"

namespace supind {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_field(const SublinearField& f) {
  if (!(f.lambda < 0.0) || !(f.p > 1.0) || !(f.c > 0.0)) {
    throw InvalidParameter("sublinear field needs lambda < 0, p > 1, c > 0");
  }
}

}  // namespace

double sublinear_energy(const SublinearField& f, double u, double s) {
  const double k = 2.0 * f.c / (f.p + 1.0);
  return -f.lambda * (u * u - s * s) + k * (std::pow(u, f.p + 1.0) - std::pow(s, f.p + 1.0));
}

double blowup_time(const SublinearField& f, double s, const QuadratureSpec& spec) {
  check_field(f);
  if (!(s > 0.0)) throw InvalidParameter("blowup_time: s must be positive");
  const double a = -f.lambda;
  const double bcoef = 2.0 * f.c / (f.p + 1.0) * std::pow(s, f.p - 1.0);
  const double q = f.p + 1.0;
  const auto integrand = [=](double xi) {
    const double d = xi - 1.0;
    // xi^{p+1} - 1 without cancellation near xi = 1
    const double rad = a * d * (xi + 1.0) + bcoef * std::expm1(q * std::log1p(d));
    return 1.0 / std::sqrt(rad);
  };
  return integrate_to_infinity(integrand, 1.0, 0.5 * (f.p - 1.0),
                               spec.with_ends(EndpointKind::inverse_sqrt, EndpointKind::regular));
}

double s_infinity(const SublinearField& f, double alpha) {
  check_field(f);
  if (!(alpha >= 0.0)) throw InvalidParameter("s_infinity: alpha must be nonnegative");
  if (alpha == 0.0) return kInf;
  const double log_alpha = std::log(alpha);
  const auto g = [&](double ls) { return std::log(blowup_time(f, std::exp(ls))) - log_alpha; };
  double lo = 0.0;
  double g_lo = g(lo);
  double hi = lo;
  double g_hi = g_lo;
  // T decreases in s: walk until the sign flips.
  if (g_lo > 0.0) {
    while (g_hi > 0.0) {
      lo = hi;
      g_lo = g_hi;
      hi += std::log(4.0);
      g_hi = g(hi);
    }
  } else {
    while (g_lo < 0.0) {
      hi = lo;
      g_hi = g_lo;
      lo -= std::log(4.0);
      g_lo = g(lo);
    }
  }
  if (g_lo == 0.0) return std::exp(lo);
  if (g_hi == 0.0) return std::exp(hi);
  return std::exp(find_root(g, lo, hi, g_lo, g_hi, 1e-14));
}

ShotState shoot(const SublinearField& f, double s, double alpha, const ShootOptions& opt) {
  check_field(f);
  if (!(s > 0.0)) throw InvalidParameter("shoot: s must be positive");
  if (!(alpha >= 0.0)) throw InvalidParameter("shoot: alpha must be nonnegative");
  if (alpha == 0.0) return {s, s, 0.0, 1.0, 0.0};

  const Power pm1(f.p - 1.0);
  const double lambda = f.lambda;
  const double c = f.c;
  const double p = f.p;
  auto field = [=](double, const State<4>& y) {
    const double up1 = pm1(y[0]);
    return State<4>(y[1], (-lambda + c * up1) * y[0], y[3], (-lambda + c * p * up1) * y[2]);
  };
  IvpOptions io;
  io.rel_tol = opt.rel_tol;
  io.abs_tol = opt.rel_tol * 1e-2 * std::min(1.0, s);
  io.blow_up_cap = opt.blow_up_cap;
  io.guarded_components = 1;
  io.record_steps = false;
  const auto res = integrate_ivp<double, 4>(field, 0.0, alpha, State<4>(s, 0.0, 1.0, 0.0), io);
  if (res.reason == Termination::blow_up_guard) {
    throw BeyondBlowUp("shoot: beyond blow-up threshold");
  }
  ShotState out{s, res.terminal[0], res.terminal[1], res.terminal[2], res.terminal[3]};

  const double k = 2.0 * c / (p + 1.0);
  const double xp1 = std::pow(out.x, p + 1.0);
  const double f_val = sublinear_energy(f, out.x, s);
  const double scale = std::max({out.y * out.y, -lambda * out.x * out.x, k * xp1});
  if (std::abs(out.y * out.y - f_val) > opt.energy_check * scale) {
    throw NumericalFailure("shoot: energy identity violated along the sublinear orbit");
  }
  return out;
}

struct GammaCurve::Table {
  std::once_flag once;
  std::vector<ShotState> rows;
};

GammaCurve::GammaCurve(SublinearField field, double alpha, Orientation orientation, double scale)
    : field_(field), alpha_(alpha), orientation_(orientation), scale_(scale),
      table_(std::make_shared<Table>()) {
  check_field(field_);
  if (!(alpha >= 0.0 && alpha < 0.5)) throw InvalidParameter("GammaCurve: alpha must lie in [0, 1/2)");
  if (!(scale > 0.0)) throw InvalidParameter("GammaCurve: scale must be positive");
  s_inf_ = supind::s_infinity(field_, alpha_);
  shoot_opt_.blow_up_cap = 1e8 * std::max(1.0, scale_);
}

GammaCurve GammaCurve::left_of(const ProblemParams& params) {
  const auto d = derive_constants(params);
  return GammaCurve({params.lambda(), params.p(), params.c_left()}, params.alpha(), Orientation::left,
                    d.omega);
}

GammaCurve GammaCurve::right_of(const ProblemParams& params) {
  const auto d = derive_constants(params);
  return GammaCurve({params.lambda(), params.p(), params.c_right()}, params.alpha(), Orientation::right,
                    d.omega);
}

GammaCurve GammaCurve::reflected() const {
  GammaCurve out = *this;
  out.orientation_ = orientation_ == Orientation::left ? Orientation::right : Orientation::left;
  return out;
}

double GammaCurve::slope_at_zero() const {
  const double r = std::sqrt(-field_.lambda);
  const double m = r * std::tanh(r * alpha_);
  return orientation_ == Orientation::left ? m : -m;
}

ShotState GammaCurve::shoot(double s) const {
  if (!(s < s_inf_)) throw BeyondBlowUp("GammaCurve::shoot: s at or beyond the blow-up threshold");
  return supind::shoot(field_, s, alpha_, shoot_opt_);
}

ShotState GammaCurve::shoot_or_escape(double s) const {
  if (s >= s_inf_) return {s, kInf, kInf, kInf, kInf};
  try {
    return supind::shoot(field_, s, alpha_, shoot_opt_);
  } catch (const BeyondBlowUp&) {
    return {s, kInf, kInf, kInf, kInf};
  }
}

const std::vector<ShotState>& GammaCurve::table() const {
  std::call_once(table_->once, [this] {
    if (alpha_ == 0.0) return;
    auto& rows = table_->rows;
    for (int i = 0; i <= 16; ++i) {
      const double q = std::pow(10.0, -8.0 + 7.7 * i / 16.0);  // 1e-8 .. 0.5
      const auto st = shoot_or_escape(q * s_inf_);
      if (!std::isfinite(st.x)) return;
      rows.push_back(st);
    }
    for (int k = 2; k <= 48; ++k) {
      const auto st = shoot_or_escape(s_inf_ * (1.0 - std::ldexp(1.0, -k)));
      if (!std::isfinite(st.x)) return;
      if (st.s > rows.back().s) rows.push_back(st);
    }
  });
  return table_->rows;
}

std::vector<ShotState> GammaCurve::samples() const { return table(); }

double GammaCurve::linear_cutoff() const { return 1e-8 * std::max(1.0, scale_); }

double GammaCurve::s_of_x(double x) const { return at_x(x).s; }

GammaCurve::Point GammaCurve::at_s(double s) const {
  const auto st = shoot(s);
  const double sign = orientation_ == Orientation::left ? 1.0 : -1.0;
  return {s, st.x, sign * st.y, sign * st.y_s / st.x_s};
}

GammaCurve::Point GammaCurve::at_x(double x) const {
  if (!(x >= 0.0)) throw InvalidParameter("GammaCurve: x must be nonnegative");
  const double sign = orientation_ == Orientation::left ? 1.0 : -1.0;
  if (alpha_ == 0.0) return {x, x, 0.0, 0.0};
  if (x < linear_cutoff()) {
    const double m = std::abs(slope_at_zero());
    const double s = x / std::cosh(std::sqrt(-field_.lambda) * alpha_);
    return {s, x, sign * m * x, sign * m};
  }
  if (x > shoot_opt_.blow_up_cap) throw InvalidParameter("GammaCurve: x beyond the blow-up cap");

  const auto& rows = table();
  // Bracket [lo, hi] with x(lo) < x < x(hi) from the monotone sample table.
  auto it = std::upper_bound(rows.begin(), rows.end(), x,
                             [](double v, const ShotState& r) { return v < r.x; });
  double lo;
  double hi;
  double guess;
  if (it == rows.begin()) {
    hi = rows.empty() ? s_inf_ : it->s;
    lo = hi;
    double x_lo = kInf;
    while (!(x_lo < x)) {
      lo *= 0.5;
      x_lo = shoot_or_escape(lo).x;
    }
    guess = x / std::cosh(std::sqrt(-field_.lambda) * alpha_);
  } else if (it == rows.end()) {
    lo = std::prev(it)->s;
    hi = s_inf_;
    guess = 0.5 * (lo + hi);
  } else {
    const auto& a = *std::prev(it);
    const auto& b = *it;
    lo = a.s;
    hi = b.s;
    const double w = (std::log(x) - std::log(a.x)) / (std::log(b.x) - std::log(a.x));
    guess = std::exp(std::log(a.s) + w * (std::log(b.s) - std::log(a.s)));
  }
  if (!(guess > lo && guess < hi)) guess = 0.5 * (lo + hi);

  // Safeguarded Newton on log x(s) - log x.
  const double log_x = std::log(x);
  double s = guess;
  ShotState best{};
  bool have = false;
  for (int iter = 0; iter < 200; ++iter) {
    const auto st = shoot_or_escape(s);
    double s_next;
    if (!std::isfinite(st.x)) {
      hi = s;
      s_next = 0.5 * (lo + hi);
    } else {
      best = st;
      have = true;
      const double f = std::log(st.x) - log_x;
      if (f == 0.0) break;
      if (f < 0.0) {
        lo = s;
      } else {
        hi = s;
      }
      if (std::abs(f) < 4e-16) break;
      s_next = s - f * st.x / st.x_s;
      if (!(s_next > lo && s_next < hi)) s_next = 0.5 * (lo + hi);
      if (std::abs(s_next - s) <= 2e-16 * s) break;
    }
    if (hi - lo <= 4e-16 * hi) break;
    s = s_next;
  }
  if (!have) throw NumericalFailure("GammaCurve: inversion of x(s) failed");
  const double dy_dx = best.y_s / best.x_s;
  // first-order correction for the residual mismatch x(s) - x
  const double y = best.y + dy_dx * (x - best.x);
  const double s_corr = best.s + (x - best.x) / best.x_s;
  return {s_corr, x, sign * y, sign * dy_dx};
}

double GammaCurve::eval_y(double x) const { return at_x(x).y; }

double GammaCurve::eval_dy_dx(double x) const { return at_x(x).dy_dx; }

}  // namespace supind
