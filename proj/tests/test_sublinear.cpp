#include "doctest.h"

#include <cmath>
#include <vector>

#include "supind/ivp.hpp"
#include "supind/sublinear.hpp"

using namespace supind;

namespace {

const SublinearField kUnit{-1.0, 3.0, 1.0};

// Direct RK of u'' = -lambda u + c u^p from (s, 0) with the u-cap guard.
IvpResult<2> raw_shot(const SublinearField& f, double s, double t1) {
  auto field = [&](double, const State<2>& y) {
    return State<2>(y[1], -f.lambda * y[0] + f.c * std::pow(y[0], f.p));
  };
  IvpOptions opt;
  opt.blow_up_cap = 1e8;
  opt.guarded_components = 1;
  opt.record_steps = false;
  return integrate_ivp<double, 2>(field, 0.0, t1, State<2>(s, 0.0), opt);
}

// Time to climb from s to x along v = sqrt(F(u; s)); independent of the RK route.
double climb_time(const SublinearField& f, double s, double x) {
  QuadratureSpec spec;
  spec.rel_tol = 1e-12;
  spec.abs_tol = 1e-15;
  const double k = 2.0 * f.c / (f.p + 1.0);
  auto integrand = [&](double u) {
    const double d = u - s;
    const double rad = -f.lambda * d * (u + s) + k * std::pow(s, f.p + 1.0) * std::expm1((f.p + 1.0) * std::log1p(d / s));
    return 1.0 / std::sqrt(rad);
  };
  return integrate(integrand, s, x, spec.with_ends(EndpointKind::inverse_sqrt, EndpointKind::regular));
}

}  // namespace

TEST_CASE("blow-up time is decreasing and matches the integrator") {
  const double t05 = blowup_time(kUnit, 0.5);
  const double t1 = blowup_time(kUnit, 1.0);
  const double t2 = blowup_time(kUnit, 2.0);
  CHECK(t05 > t1);
  CHECK(t1 > t2);

  const auto res = raw_shot(kUnit, 1.0, 10.0);
  REQUIRE(res.reason == Termination::blow_up_guard);
  CHECK(std::abs(res.terminal_time - t1) <= 1e-3 * t1);

  // large s: T ~ K s^{-(p-1)/2}
  const double ratio = blowup_time(kUnit, 10.0) / blowup_time(kUnit, 40.0);
  CHECK(std::abs(ratio - 4.0) <= 0.05 * 4.0);
}

TEST_CASE("blow-up threshold") {
  const double s03 = s_infinity(kUnit, 0.3);
  CHECK(std::abs(blowup_time(kUnit, s03) - 0.3) < 1e-9);
  CHECK(s_infinity(kUnit, 0.1) > s03);
  CHECK(std::isinf(s_infinity(kUnit, 0.0)));

  const auto below = raw_shot(kUnit, 0.99 * s03, 0.3);
  CHECK(below.reason == Termination::end_of_interval);
  CHECK(std::isfinite(below.terminal[0]));
  const auto above = raw_shot(kUnit, 1.01 * s03, 0.3);
  CHECK(above.reason == Termination::blow_up_guard);
  CHECK(above.terminal_time < 0.3);
}

TEST_CASE("shooting endpoints") {
  const auto tiny = shoot(kUnit, 1e-6, 0.3);
  CHECK(std::abs(tiny.x / 1e-6 - std::cosh(0.3)) < 1e-3);
  CHECK(std::abs(tiny.y / 1e-6 - std::sinh(0.3)) < 1e-3);
  CHECK(std::abs(tiny.x / 1e-6 - 1.045339) < 1e-3);
  CHECK(std::abs(tiny.y / 1e-6 - 0.304520) < 1e-3);

  const auto a = shoot(kUnit, 0.5, 0.3);
  const auto b = shoot(kUnit, 0.8, 0.3);
  CHECK(a.x < b.x);
  CHECK(a.y < b.y);

  const auto one = shoot(kUnit, 1.0, 0.3);
  const double f = sublinear_energy(kUnit, one.x, 1.0);
  CHECK(std::abs(one.y * one.y - f) / std::max(1.0, one.y * one.y) < 1e-8);

  CHECK_THROWS_AS(shoot(kUnit, 1.01 * s_infinity(kUnit, 0.3), 0.3), BeyondBlowUp);
}

TEST_CASE("shooting agrees with the climb-time quadrature") {
  for (double s : {0.05, 0.4, 1.0, 1.5}) {
    const auto st = shoot(kUnit, s, 0.3);
    CHECK(std::abs(climb_time(kUnit, s, st.x) - 0.3) < 1e-9);
    // comparison with the linear flow
    CHECK(st.x >= s * std::cosh(0.3));
  }
  const SublinearField g{-30.0, 2.5, 1.7};
  for (double s : {0.3, 2.0}) {
    const auto st = shoot(g, s, 0.05);
    CHECK(std::abs(climb_time(g, s, st.x) - 0.05) < 1e-10);
  }
}

TEST_CASE("variational derivatives match finite differences in s") {
  const double s = 0.9;
  const double h = 1e-5;
  const auto mid = shoot(kUnit, s, 0.3);
  const auto up = shoot(kUnit, s + h, 0.3);
  const auto dn = shoot(kUnit, s - h, 0.3);
  CHECK(std::abs(mid.x_s - (up.x - dn.x) / (2 * h)) < 1e-7 * std::abs(mid.x_s));
  CHECK(std::abs(mid.y_s - (up.y - dn.y) / (2 * h)) < 1e-7 * std::abs(mid.y_s));
}

TEST_CASE("curve values and slope at the origin") {
  const GammaCurve curve(kUnit, 0.3);
  CHECK(curve.eval_y(0.0) == 0.0);
  const double h = 1e-5;
  const double fd = (curve.eval_y(h) - curve.eval_y(0.0)) / h;
  CHECK(std::abs(fd - std::tanh(0.3)) <= 1e-4 * std::tanh(0.3));
  CHECK(std::abs(std::tanh(0.3) - 0.291313) < 1e-6);
  CHECK(curve.eval_y(50.0) / 50.0 > curve.eval_y(5.0) / 5.0);
}

TEST_CASE("curve slope") {
  const GammaCurve curve(kUnit, 0.3);
  for (double x : {0.1, 1.0, 5.0}) CHECK(curve.eval_dy_dx(x) > 0.0);
  const double h = 1e-4;
  const double fd = (curve.eval_y(1.0 + h) - curve.eval_y(1.0 - h)) / (2 * h);
  CHECK(std::abs(curve.eval_dy_dx(1.0) - fd) <= 1e-6 * std::abs(fd));

  const double alpha = 1e-3;
  const GammaCurve thin(kUnit, alpha);
  const double ratio = thin.eval_dy_dx(1.0) / alpha;
  CHECK(std::abs(ratio - 4.0) <= 0.01 * 4.0);
}

TEST_CASE("small alpha asymptotics") {
  for (double x : {0.5, 1.0, 2.0}) {
    const double limit = -kUnit.lambda * x + kUnit.c * std::pow(x, kUnit.p);
    const double e2 = std::abs(GammaCurve(kUnit, 1e-2).eval_y(x) / 1e-2 - limit);
    const double e3 = std::abs(GammaCurve(kUnit, 1e-3).eval_y(x) / 1e-3 - limit);
    CHECK(e3 < e2);
    CHECK(e3 <= 0.01 * limit);
  }
  // uniform collapse on [0, 3]: max y <= C alpha
  double worst = 0.0;
  for (double alpha : {1e-2, 1e-3}) {
    const GammaCurve curve(kUnit, alpha);
    double m = 0.0;
    for (int i = 0; i <= 30; ++i) m = std::max(m, curve.eval_y(0.1 * i));
    worst = std::max(worst, m / alpha);
  }
  CHECK(worst < 31.0);  // -lambda X + c X^p = 30 at X = 3, plus higher-order slack
}

TEST_CASE("convexity for small alpha") {
  const GammaCurve curve(kUnit, 1e-2);
  const int n = 40;
  const double top = 2.0;  // 2 Omega for b = 1
  const double h = top / n;
  std::vector<double> ys(n + 1);
  for (int i = 0; i <= n; ++i) ys[i] = curve.eval_y(h * i);
  for (int i = 1; i < n; ++i) CHECK(ys[i + 1] - 2 * ys[i] + ys[i - 1] > 0.0);
}

TEST_CASE("orientation and round trip") {
  const GammaCurve left(kUnit, 0.3);
  const GammaCurve right = left.reflected();
  for (double x : {0.0, 1e-9, 0.3, 2.0, 7.0}) CHECK(right.eval_y(x) == -left.eval_y(x));
  CHECK(right.slope_at_zero() == -left.slope_at_zero());
  for (double q : {0.2, 0.7}) {
    const auto st = left.shoot(q * left.s_infinity());
    CHECK(std::abs(left.eval_y(st.x) - st.y) <= 1e-9 * std::max(1.0, st.y));
    CHECK(std::abs(left.s_of_x(st.x) - st.s) <= 1e-12 * st.s);
  }
  CHECK(left.eval_y(0.0) == 0.0);
  for (int i = 1; i < 40; ++i) CHECK(left.eval_y(0.25 * i) > left.eval_y(0.25 * (i - 1)));
}

TEST_CASE("problem factories use each side's coefficient") {
  const auto params = ProblemParams::asymmetric(-30.0, 3.0, 1.0, 1.0, 1.3, 0.1);
  const auto g0 = GammaCurve::left_of(params);
  const auto g1 = GammaCurve::right_of(params);
  CHECK(g0.orientation() == Orientation::left);
  CHECK(g1.orientation() == Orientation::right);
  CHECK(g1.field().c == 1.3);
  CHECK(g1.eval_y(2.0) < -g0.eval_y(2.0));  // larger c gives a steeper curve
}
