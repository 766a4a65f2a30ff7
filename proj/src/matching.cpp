#include "supind/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "supind/ivp.hpp"

namespace supind {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Grid on [a, b]: uniform inside, geometric runs into the clustered ends
// (eight times the uniform density within 1% of the end, down to 1e-10).
std::vector<double> domain_grid(double a, double b, int n, bool cluster_a, bool cluster_b, bool keep_a,
                                bool keep_b) {
  const double w = 0.01 * (b - a);
  const int m = std::max(8, (8 * n) / 100);
  std::vector<double> g;
  if (keep_a) g.push_back(a);
  if (cluster_a) {
    for (int k = m; k >= 1; --k) g.push_back(a + w * std::pow(10.0, -10.0 * k / m));
  }
  const double lo = cluster_a ? a + w : a;
  const double hi = cluster_b ? b - w : b;
  for (int i = 0; i <= n; ++i) {
    if ((i == 0 && !cluster_a) || (i == n && !cluster_b)) continue;
    g.push_back(lo + (hi - lo) * i / n);
  }
  if (cluster_b) {
    for (int k = 1; k <= m; ++k) g.push_back(b - w * std::pow(10.0, -10.0 * k / m));
  }
  if (keep_b) g.push_back(b);
  return g;
}

double power_signed(double u, double p) { return std::copysign(std::pow(std::abs(u), p), u); }

IvpOptions leg_options(double rel_tol, double scale) {
  IvpOptions io;
  io.rel_tol = rel_tol;
  io.abs_tol = rel_tol * 1e-2 * scale;
  io.record_steps = false;
  io.blow_up_cap = 1e8 * std::max(1.0, scale);
  io.guarded_components = 1;
  return io;
}

}  // namespace

int scan_j_max(const ProblemParams& params) { return 2 * (band_index(params.lambda(), params.p()) + 2); }

std::vector<MatchingRoot> matching_roots(const TimeMaps& maps, int scan_points, int density) {
  const auto& params = maps.params();
  const double target = 1.0 - 2.0 * params.alpha();
  const int j_max = scan_j_max(params);
  const int n = scan_points * density;
  const auto& geo = maps.geometry().departure;
  const double omega = maps.portrait().omega();

  struct Row {
    double s;
    std::vector<double> tau;
  };
  auto row_at = [&](double s, int jn) {
    const auto sc = maps.schedule_at_s(s);
    Row r{s, std::vector<double>(jn)};
    for (int j = 1; j <= jn; ++j) r.tau[j - 1] = sc.tau_j(j);
    return r;
  };
  auto defined = [](const Row& r) {
    std::vector<bool> m(r.tau.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = std::isfinite(r.tau[k]);
    return m;
  };
  auto evaluate = [&](const std::vector<double>& grid, int jn) {
    std::vector<Row> rows;
    rows.reserve(grid.size());
    for (double s : grid) {
      Row r = row_at(s, jn);
      // where crossings appear or vanish (unequal weights), close in on the
      // boundary from both sides so roots next to it keep a bracket
      if (!rows.empty() && defined(rows.back()) != defined(r)) {
        Row lo = rows.back();
        Row hi = r;
        const auto m_lo = defined(lo);
        for (int it = 0; it < 200 && hi.s - lo.s > 1e-15 * hi.s; ++it) {
          Row mid = row_at(0.5 * (lo.s + hi.s), jn);
          (defined(mid) == m_lo ? lo : hi) = std::move(mid);
        }
        if (lo.s != rows.back().s) rows.push_back(std::move(lo));
        if (hi.s != r.s) rows.push_back(std::move(hi));
      }
      rows.push_back(std::move(r));
    }
    return rows;
  };

  std::vector<MatchingRoot> roots;
  auto refine = [&](const std::vector<Row>& rows, int jn) {
    for (int j = 1; j <= jn; ++j) {
      auto g = [&](double s) { return maps.schedule_at_s(s).tau_j(j) - target; };
      for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        const double a = rows[i].tau[j - 1] - target;
        const double b = rows[i + 1].tau[j - 1] - target;
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        if ((a < 0.0) == (b < 0.0)) continue;
        const double s = find_root(g, rows[i].s, rows[i + 1].s, a, b, 1e-14 * rows[i + 1].s);
        const auto sc = maps.schedule_at_s(s);
        MatchingRoot r{s, sc.x, j, sc.domain};
        if (r.domain != DomainTag::d3 && std::abs(sc.x - geo.x_t) <= 1e-6 * omega) r.domain = DomainTag::tangency;
        roots.push_back(r);
      }
    }
  };

  const auto d1 = evaluate(domain_grid(0.0, geo.s_t, n, true, true, false, true), j_max);
  const auto d2 = evaluate(domain_grid(geo.s_t, geo.s_h, n, true, true, true, false), j_max);
  double min_last = kInf;
  for (const auto* rows : {&d1, &d2}) {
    for (const auto& r : *rows) {
      if (std::isfinite(r.tau[j_max - 1])) min_last = std::min(min_last, r.tau[j_max - 1]);
    }
  }
  if (!(min_last > target)) {
    throw NumericalFailure("matching_roots: tau_" + std::to_string(j_max) + " reaches 1 - 2 alpha; j_max too small");
  }
  refine(d1, j_max);
  refine(d2, j_max);

  // D3: tau_1 only, up to a cutoff where it has dropped well below the target
  double x_cut = 2.0 * maps.portrait().u_h();
  while (maps.schedule(x_cut).tau_j(1) >= 0.25 * target) {
    x_cut *= 2.0;
    if (x_cut > 1e6 * maps.portrait().u_h()) throw NumericalFailure("matching_roots: no D3 cutoff");
  }
  const double s_cut = maps.gamma0().s_of_x(x_cut);
  refine(evaluate(domain_grid(geo.s_h, s_cut, n, true, false, true, true), 1), 1);

  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    return a.x != b.x ? a.x < b.x : a.j < b.j;
  });
  // one record per tangency root, with the lower crossing index
  std::vector<MatchingRoot> out;
  for (const auto& r : roots) {
    if (!out.empty() && r.domain == DomainTag::tangency && out.back().domain == DomainTag::tangency &&
        std::abs(r.x - out.back().x) <= 1e-6 * omega) {
      out.back().j = std::min(out.back().j, r.j);
      continue;
    }
    out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.x != b.x ? a.x < b.x : a.j < b.j;
  });
  return out;
}

SolutionRecord build_profile(const TimeMaps& maps, double x, int j, DomainTag domain, const ProfileOptions& opt) {
  const auto& params = maps.params();
  const auto& pp = maps.portrait();
  const double alpha = params.alpha();
  if (alpha == 0.0) return alpha0_profile(pp, x, j, domain, opt);
  if (opt.grid_size < 2) throw InvalidParameter("build_profile: grid needs at least 2 points");
  const double lambda = params.lambda();
  const double p = params.p();
  const double t_a = alpha;
  const double t_b = 1.0 - alpha;
  const double scale = std::max(1.0, pp.omega());

  std::vector<double> grid;
  const int n = opt.grid_size;
  for (int i = 0; i < n; ++i) grid.push_back(i == n - 1 ? 1.0 : static_cast<double>(i) / (n - 1));
  grid.push_back(t_a);
  grid.push_back(t_b);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  SolutionRecord rec;
  rec.x = x;
  rec.j = j;
  rec.domain = domain;
  const double y = maps.gamma0().eval_y(x);

  // left leg, backward from t = alpha
  auto left_field = [&, c = params.c_left()](double, const State<2>& s) {
    return State<2>(s[1], -lambda * s[0] + c * power_signed(s[0], p));
  };
  auto io = leg_options(opt.rel_tol, scale);
  for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
    if (*it < t_a) io.sample_times.push_back(*it);
  }
  io.sample_times.push_back(0.0);
  io.sample_times.erase(std::unique(io.sample_times.begin(), io.sample_times.end()), io.sample_times.end());
  const auto left = integrate_ivp<double, 2>(left_field, t_a, 0.0, State<2>(x, y), io);
  if (left.reason != Termination::end_of_interval) throw NumericalFailure("build_profile: left leg did not reach t = 0");

  // center part with the Gamma_1 crossings logged
  const auto& g1 = maps.gamma1();
  auto center_field = [&](double, const State<2>& s) { return State<2>(s[1], pp.acceleration(s[0])); };
  std::vector<Event<2>> ev = {
      {[&g1](double, const State<2>& s) { return s[0] > 0.0 ? s[1] - g1.eval_y(s[0]) : s[1]; }, false}};
  io = leg_options(opt.rel_tol, scale);
  io.max_step = 1e-3;
  for (double t : grid) {
    if (t >= t_a && t <= t_b) io.sample_times.push_back(t);
  }
  const double t_over = t_b + 0.25 * alpha;
  const auto center = integrate_ivp<double, 2>(center_field, t_a, t_over, State<2>(x, y), io, ev);
  if (center.reason != Termination::end_of_interval) throw NumericalFailure("build_profile: center part did not reach 1 - alpha");
  std::vector<double> crossing_times;
  for (const auto& h : center.events) {
    if (h.time <= t_b + 1e-6) crossing_times.push_back(h.time);
  }
  if (domain != DomainTag::tangency) {
    if (static_cast<int>(crossing_times.size()) != j || std::abs(crossing_times.back() - t_b) > 1e-6) {
      throw StaleRoot("build_profile: center trajectory crosses Gamma_1 " + std::to_string(crossing_times.size()) +
                      " times before 1 - alpha, expected " + std::to_string(j));
    }
  }
  const State<2> at_b = center.states.back();

  // right leg
  auto right_field = [&, c = params.c_right()](double, const State<2>& s) {
    return State<2>(s[1], -lambda * s[0] + c * power_signed(s[0], p));
  };
  io = leg_options(opt.rel_tol, scale);
  for (double t : grid) {
    if (t > t_b) io.sample_times.push_back(t);
  }
  const auto right = integrate_ivp<double, 2>(right_field, t_b, 1.0, at_b, io);
  if (right.reason != Termination::end_of_interval) throw NumericalFailure("build_profile: right leg did not reach t = 1");

  for (std::size_t i = left.times.size(); i-- > 0;) rec.profile.push_back({left.times[i], left.states[i][0], left.states[i][1]});
  for (std::size_t i = 0; i < center.times.size(); ++i) {
    rec.profile.push_back({center.times[i], center.states[i][0], center.states[i][1]});
  }
  for (std::size_t i = 0; i < right.times.size(); ++i) {
    rec.profile.push_back({right.times[i], right.states[i][0], right.states[i][1]});
  }

  auto& res = rec.residuals;
  res.min_u = kInf;
  for (const auto& s : rec.profile) {
    res.max_u = std::max(res.max_u, std::abs(s.u));
    res.min_u = std::min(res.min_u, s.u);
  }
  const double e0 = pp.energy(x, y);
  const double e_scale = std::max(std::abs(e0), std::abs(pp.constants().omega_energy));
  for (std::size_t i = 0; i < center.times.size(); ++i) {
    const auto& s = center.states[i];
    res.energy_drift = std::max(res.energy_drift, std::abs(pp.energy(s[0], s[1]) - e0) / e_scale);
  }
  res.neumann_left = std::abs(left.terminal[1]);
  res.neumann_right = std::abs(right.terminal[1]);
  // the legs are started from each other's end states, so these only record the hand-over
  const State<2> start_a(x, y);
  res.interface_u = std::abs(start_a[0] - center.states.front()[0]);
  res.interface_v = std::abs(start_a[1] - center.states.front()[1]);
  res.oracle_terminal = std::abs(single_shot(params, left.terminal[0], opt.rel_tol).second);
  return rec;
}

SolutionRecord build_profile(double x, int j, const ProblemParams& params, int grid_size) {
  ProfileOptions opt;
  opt.grid_size = grid_size;
  if (params.alpha() == 0.0) {
    const PhasePortrait pp(params);
    DomainTag tag = DomainTag::center;
    if (x < pp.omega()) tag = DomainTag::below_center;
    if (x > pp.omega()) tag = DomainTag::above_center;
    return alpha0_profile(pp, x, j, tag, opt);
  }
  const TimeMaps maps(params);
  const auto sc = maps.schedule(x);
  DomainTag tag = sc.domain;
  if (tag != DomainTag::d3 && std::abs(x - maps.geometry().x_t()) <= 1e-6 * maps.portrait().omega()) {
    tag = DomainTag::tangency;
  }
  return build_profile(maps, x, j, tag, opt);
}

std::pair<double, double> single_shot(const ProblemParams& params, double u0, double rel_tol) {
  const double lambda = params.lambda();
  const double p = params.p();
  const double b = params.b();
  const double alpha = params.alpha();
  auto io = leg_options(rel_tol, std::max(1.0, u0));
  auto leg = [&](double t0, double t1, const State<2>& y0, double weight) {
    auto field = [&](double, const State<2>& s) {
      return State<2>(s[1], -lambda * s[0] - weight * power_signed(s[0], p));
    };
    return integrate_ivp<double, 2>(field, t0, t1, y0, io);
  };
  State<2> y(u0, 0.0);
  const std::vector<std::tuple<double, double, double>> pieces = {
      {0.0, alpha, -params.c_left()}, {alpha, 1.0 - alpha, b}, {1.0 - alpha, 1.0, -params.c_right()}};
  for (const auto& [t0, t1, w] : pieces) {
    if (t1 <= t0) continue;
    const auto r = leg(t0, t1, y, w);
    if (r.reason != Termination::end_of_interval) return {kInf, kInf};
    y = r.terminal;
  }
  return {y[0], y[1]};
}

std::vector<SolutionRecord> enumerate_solutions(const ProblemParams& params, const EnumerateOptions& opt) {
  if (params.alpha() == 0.0) return solve_alpha0(params, opt.profile);
  const TimeMaps maps(params, opt.maps);
  for (int density = 1;; density *= 2) {
    const auto roots = matching_roots(maps, opt.scan_points, density);
    std::vector<SolutionRecord> out;
    try {
      for (const auto& r : roots) {
        if (opt.build_profiles) {
          out.push_back(build_profile(maps, r.x, r.j, r.domain, opt.profile));
        } else {
          SolutionRecord rec;
          rec.x = r.x;
          rec.j = r.j;
          rec.domain = r.domain;
          out.push_back(std::move(rec));
        }
      }
    } catch (const StaleRoot&) {
      if (density >= 2) throw;
      continue;
    }
    return out;
  }
}

MultiplicitySummary count_and_classify(const ProblemParams& params, std::optional<double> alpha_star,
                                       const EnumerateOptions& opt) {
  MultiplicitySummary sum;
  sum.records = enumerate_solutions(params, opt);
  sum.total = sum.records.size();
  for (const auto& r : sum.records) {
    ++sum.per_j[r.j];
    ++sum.per_domain[r.domain];
  }
  sum.band = band_index(params.lambda(), params.p());
  sum.lower_bound = 1;
  if (params.alpha() == 0.0) {
    sum.lower_bound = 2 * sum.band + 1;
  } else if (alpha_star && params.alpha() < *alpha_star) {
    sum.lower_bound = 2 * sum.band + 1;
  }
  sum.shortfall = static_cast<int>(sum.total) < sum.lower_bound;
  return sum;
}

}  // namespace supind
