#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "supind/ivp.hpp"
#include "supind/timemaps.hpp"

using namespace supind;

namespace {

const ProblemParams kBase = ProblemParams::symmetric(-30.0, 3.0, 1.0, 1.0, 0.1);

const TimeMaps& base_maps() {
  static const TimeMaps tm(kBase);
  return tm;
}

IvpOptions tight() {
  IvpOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-15;
  opt.record_steps = false;
  return opt;
}

// First time the flow from (x, y(x)) meets Gamma_1, by event detection.
double rk_first_crossing(const TimeMaps& tm, double x) {
  const auto& pp = tm.portrait();
  const auto& g1 = tm.gamma1();
  const double y = tm.gamma0().eval_y(x);
  auto field = [&](double, const State<2>& s) { return State<2>(s[1], pp.acceleration(s[0])); };
  std::vector<Event<2>> ev = {{[&g1](double, const State<2>& s) { return s[1] - g1.eval_y(std::max(s[0], 0.0)); }, true}};
  const auto res = integrate_ivp<double, 2>(field, 0.0, 50.0, State<2>(x, y), tight(), ev);
  REQUIRE(res.reason == Termination::event);
  return res.terminal_time;
}

// Period from successive maxima of u.
double rk_period(const TimeMaps& tm, double x) {
  const auto& pp = tm.portrait();
  const double y = tm.gamma0().eval_y(x);
  auto field = [&](double, const State<2>& s) { return State<2>(s[1], pp.acceleration(s[0])); };
  std::vector<Event<2>> ev = {{[](double, const State<2>& s) { return s[1]; }, false}};
  const auto res = integrate_ivp<double, 2>(field, 0.0, 10.0, State<2>(x, y), tight(), ev);
  std::vector<double> tops;
  for (const auto& h : res.events) {
    if (h.state[0] > pp.omega()) tops.push_back(h.time);
  }
  REQUIRE(tops.size() >= 2);
  return tops[1] - tops[0];
}

}  // namespace

TEST_CASE("tangency and homoclinic crossing") {
  const auto& tm = base_maps();
  const auto& g = tm.geometry();
  const auto& pp = tm.portrait();
  CHECK(g.x_t() > 0.0);
  CHECK(g.x_t() < pp.omega());
  CHECK(g.x_t() < g.x_h());
  CHECK(g.x_h() < pp.u_h());
  const double scale = std::abs(pp.constants().omega_energy);
  const double y_h = tm.gamma0().eval_y(g.x_h());
  CHECK(std::abs(pp.energy(g.x_h(), y_h)) < 1e-9 * scale);
  CHECK(g.warnings.empty());

  // tangency: dy/dx * y = -lambda x - b x^p
  const auto pt = tm.gamma0().at_x(g.x_t());
  CHECK(std::abs(pt.dy_dx * pt.y - pp.acceleration(g.x_t())) < 1e-8 * std::abs(pp.acceleration(g.x_t())));

  const auto pp_at = [&](double alpha) {
    const auto curve = GammaCurve::left_of(kBase.with_alpha(alpha));
    return std::pair{tangency_x(curve, pp), homoclinic_crossing_x(curve, pp)};
  };
  const auto [t2, h2] = pp_at(1e-2);
  const auto [t3, h3] = pp_at(1e-3);
  CHECK(t2 < pp.omega());
  CHECK(t3 < pp.omega());
  CHECK(std::abs(t3 - pp.omega()) < std::abs(t2 - pp.omega()));
  CHECK(std::abs(t3 - pp.omega()) / 1e-3 < std::abs(t2 - pp.omega()) / 1e-2);
  CHECK(std::abs(h3 - pp.u_h()) < std::abs(h2 - pp.u_h()));
  CHECK(tangency_x(GammaCurve::left_of(kBase.with_alpha(0.05)), pp) < pp.omega());
  CHECK(tangency_x(GammaCurve::left_of(kBase.with_alpha(0.2)), pp) < pp.omega());
}

TEST_CASE("partner points") {
  const auto& tm = base_maps();
  const auto& pp = tm.portrait();
  const double x_t = tm.geometry().x_t();
  const double scale = std::abs(pp.constants().omega_energy);

  const auto at_t = tm.partner_points(x_t);
  REQUIRE(at_t.size() == 2);
  CHECK(at_t[0] == at_t[1]);
  CHECK(at_t[0] == x_t);

  const double x = 0.5 * x_t;
  const auto pr = tm.partner_points(x);
  REQUIRE(pr.size() == 2);
  CHECK(pr[0] == x);
  const double partner = pr[1];
  CHECK(partner > x_t);
  const auto back = tm.partner_points(partner);
  REQUIRE(back.size() == 2);
  CHECK(std::abs(back[0] - x) < 1e-9);
  const auto& g0 = tm.gamma0();
  CHECK(std::abs(pp.energy(partner, g0.eval_y(partner)) - pp.energy(x, g0.eval_y(x))) < 1e-10 * scale);

  // the free function runs the two-curve search and finds the same pair
  const auto free = partner_point(x, g0, tm.gamma1(), pp);
  REQUIRE(free.size() == 2);
  CHECK(std::abs(free[0] - x) < 1e-10);
  CHECK(std::abs(free[1] - partner) < 1e-10);
}

TEST_CASE("period") {
  const auto& tm = base_maps();
  const double x_t = tm.geometry().x_t();
  const double x = 0.8 * x_t;
  const double partner = tm.partner_points(x)[1];
  CHECK(std::abs(tm.tau(x) - tm.tau(partner)) < 1e-9);
  CHECK(std::abs(tm.tau(x) - rk_period(tm, x)) < 1e-6);
  CHECK_THROWS_AS(tm.tau(1.01 * tm.geometry().x_h()), InvalidParameter);

  const TimeMaps small(kBase.with_alpha(1e-3));
  CHECK(std::abs(small.tau(small.geometry().x_t()) - 2.0 * std::numbers::pi / std::sqrt(60.0)) < 1e-2);
}

TEST_CASE("time map algebra") {
  const auto& tm = base_maps();
  const double x_t = tm.geometry().x_t();
  const double x_h = tm.geometry().x_h();
  for (double x : {0.5 * x_t, 0.9 * x_t, x_t + 0.3 * (x_h - x_t)}) {
    const auto sc = tm.schedule(x);
    CHECK(sc.tau_j(2) > sc.tau_j(1));
    CHECK(std::abs(sc.tau_j(3) - sc.tau_j(1) - sc.period) < 1e-9);
    CHECK(std::abs(sc.tau_j(4) - sc.tau_j(2) - sc.period) < 1e-9);
    CHECK(std::abs(sc.tau_j(7) - sc.tau_j(1) - 3.0 * sc.period) < 1e-9);
    CHECK(tm.tau_j(1, x) == sc.tau_j(1));
  }
  const auto at_t = tm.schedule(x_t);
  CHECK(at_t.domain == DomainTag::tangency);
  CHECK(std::abs(at_t.tau_j(1) - at_t.tau_j(2)) < 1e-6);

  // mid-arc identity and symmetry between partners
  for (double q : {0.2, 0.6, 0.95}) {
    const double x = q * x_t;
    const double partner = tm.partner_points(x)[1];
    const auto a = tm.schedule(x);
    const auto b = tm.schedule(partner);
    CHECK(std::abs(a.tau_j(1) - 0.5 * (a.tau_j(2) + b.tau_j(1))) < 1e-9);
    CHECK(std::abs(a.tau_j(1) - b.tau_j(2)) < 1e-9);
  }

  CHECK_THROWS_AS(tm.tau_j(2, 1.5 * x_h), InvalidParameter);
  CHECK_THROWS_AS(tm.tau_j(0, 0.5 * x_t), InvalidParameter);
  CHECK(std::isfinite(tm.tau_j(1, 1.5 * x_h)));
}

TEST_CASE("first crossing agrees with event detection") {
  const auto& tm = base_maps();
  const double x_h = tm.geometry().x_h();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(0.02, 1.0);
  for (int i = 0; i < 12; ++i) {
    const double x = (i < 10 ? unit(rng) : 1.0 + unit(rng)) * x_h;
    CHECK(std::abs(tm.tau_j(1, x) - rk_first_crossing(tm, x)) < 1e-6);
  }
}

TEST_CASE("glued selectors") {
  const auto& tm = base_maps();
  const auto& pp = tm.portrait();
  const double x_t = tm.geometry().x_t();
  const double x_h = tm.geometry().x_h();
  for (int k : {0, 1}) {
    double prev = 1.0;
    for (double eps : {1e-4, 1e-5}) {
      const double jump = std::abs(tm.theta(k, x_t * (1 - eps)) - tm.theta(k, x_t * (1 + eps)));
      CHECK(jump < prev);
      prev = jump;
    }
    CHECK(prev < 1e-2);
  }
  const double x = 0.4 * x_t;
  CHECK(tm.theta_tilde(0, x) == tm.tau_j(1, x));
  CHECK(tm.theta(0, x) == tm.tau_j(2, x));
  const double x2 = 0.5 * (x_t + x_h);
  CHECK(tm.theta(1, x2) == tm.tau_j(3, x2));
  CHECK(tm.theta_tilde(1, x2) == tm.tau_j(4, x2));

  // on D3 theta_0 is the single sweep 2 arc(x, M)
  const double x3 = 1.3 * x_h;
  const auto sc = tm.schedule(x3);
  CHECK(sc.slice.kind == OrbitKind::exterior);
  const double sweep = 2.0 * pp.arc_time(sc.slice, x3, sc.slice.M);
  CHECK(std::abs(tm.theta(0, x3) - sweep) < 1e-9 * sweep);
  CHECK(std::isnan(sc.theta(1)));
}

TEST_CASE("boundary behavior") {
  const auto& tm = base_maps();
  const auto& pp = tm.portrait();
  const double x_t = tm.geometry().x_t();
  const double x_h = tm.geometry().x_h();
  double prev = 0.0;
  for (double q : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double t = tm.tau_j(1, q * x_t);
    CHECK(t > prev);
    prev = t;
  }
  prev = 0.0;
  for (double q : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double t = tm.tau_j(2, x_h - q * (x_h - x_t));
    CHECK(t > prev);
    prev = t;
  }
  for (double m : {4.0, 8.0, 16.0}) {
    const double x = m * pp.u_h();
    CHECK(tm.tau_j(1, x) < tm.tau_j(1, 0.5 * x));
  }
}

TEST_CASE("small alpha limits") {
  const PhasePortrait pp(-30.0, 3.0, 1.0);
  const double target = pp.center_half_period();
  double prev = 1.0;
  std::vector<double> ratio;
  for (double alpha : {1e-2, 1e-3, 1e-4}) {
    const TimeMaps tm(kBase.with_alpha(alpha));
    const auto sc = tm.schedule(tm.geometry().x_t());
    const double err = std::abs(sc.tau_j(1) - target);
    CHECK(err < prev);
    prev = err;
    ratio.push_back((sc.slice.M - pp.omega()) / alpha);
  }
  CHECK(prev / target < 1e-2);
  CHECK(ratio[0] > 0.0);
  CHECK(std::abs(ratio[1] / ratio[0] - 1.0) < 0.2);
  const double omega = pp.omega();
  const double expected = (30.0 * omega + std::pow(omega, 3)) / std::sqrt(60.0);
  CHECK(std::abs(ratio[2] / expected - 1.0) < 0.05);
}

TEST_CASE("two-curve route reproduces the symmetric one") {
  TimeMapOptions opt;
  opt.force_general = true;
  const TimeMaps general(kBase, opt);
  const auto& tm = base_maps();
  CHECK_FALSE(general.symmetric_route());
  const double x_t = tm.geometry().x_t();
  const double x_h = tm.geometry().x_h();
  for (double x : {0.1 * x_t, 0.7 * x_t, 0.5 * (x_t + x_h), 0.99 * x_h, 2.0 * x_h}) {
    const auto a = tm.schedule(x);
    const auto b = general.schedule(x);
    for (int j = 1; j <= 4; ++j) {
      const double ta = a.tau_j(j);
      const double tb = b.tau_j(j);
      if (std::isnan(ta)) {
        CHECK(std::isnan(tb));
      } else {
        CHECK(std::abs(ta - tb) < 1e-12);
      }
    }
  }
}

TEST_CASE("asymmetric weight") {
  const auto params = ProblemParams::asymmetric(-30.0, 3.0, 1.0, 1.0, 2.0, 0.1);
  const TimeMaps tm(params);
  CHECK_FALSE(tm.symmetric_route());
  const auto& g = tm.geometry();
  CHECK(g.arrival.x_t != g.departure.x_t);
  for (double q : {0.3, 0.8}) {
    const double x = q * g.x_h();
    const auto sc = tm.schedule(x);
    if (sc.crossings.empty()) continue;
    CHECK(std::abs(sc.tau_j(1) - rk_first_crossing(tm, x)) < 1e-6);
  }
  const double x = 2.0 * g.x_h();
  CHECK(std::abs(tm.tau_j(1, x) - rk_first_crossing(tm, x)) < 1e-6);
}
