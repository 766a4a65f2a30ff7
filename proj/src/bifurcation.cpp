#include "supind/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "supind/numerics.hpp"

namespace supind {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Departure parameters on (0, s_h): uniform, with geometric runs into both ends.
std::vector<double> open_s_grid(double s_h, int n) {
  std::vector<double> g;
  const int m = std::max(8, n / 10);
  for (int k = m; k >= 1; --k) g.push_back(0.01 * s_h * std::pow(10.0, -8.0 * k / m));
  for (int i = 1; i < n; ++i) g.push_back(0.01 * s_h + 0.98 * s_h * i / n);
  for (int k = 1; k <= m; ++k) g.push_back(s_h - 0.01 * s_h * std::pow(10.0, -8.0 * k / m));
  return g;
}

double theta_at(int j, const TimeMaps& maps, double s) {
  const double v = maps.schedule_at_s(s).theta(j);
  return std::isfinite(v) ? v : kInf;
}

int odd_count(int n) { return n >= 1 ? (n - 1) / 2 + 1 : 0; }
int even_count(int n) { return n / 2; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Scan of one critical function over the alpha grid and refinement of its
// first crossing from below.
template <class F>
CriticalValue resolve_critical(int index, const std::vector<double>& alphas, const std::vector<double>& values,
                               const F& eval_at) {
  if (values.empty() || !(values.front() < 0.0)) {
    throw CriticalNotPresent("critical alpha_" + std::to_string(index) + " absent: defining function is " +
                             (values.empty() ? std::string("unsampled") : fmt(values.front())) +
                             " at the first grid point");
  }
  std::size_t first = values.size();
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (std::isfinite(values[i]) && values[i] >= 0.0) {
      first = i;
      break;
    }
  }
  if (first == values.size()) {
    throw CriticalNotPresent("critical alpha_" + std::to_string(index) + " absent: no sign change up to alpha = " +
                             fmt(alphas.back()));
  }
  CriticalValue cv;
  cv.index = index;
  auto g = [&](double a) { return eval_at(a).first; };
  cv.alpha = values[first] == 0.0
                 ? alphas[first]
                 : find_root(g, alphas[first - 1], alphas[first], values[first - 1], values[first], 1e-13);
  const auto at = eval_at(cv.alpha);
  cv.residual = at.first;
  cv.x = at.second;
  for (std::size_t i = first + 1; i < values.size(); ++i) {
    if (std::isfinite(values[i]) && std::isfinite(values[i - 1]) && (values[i] >= 0.0) != (values[i - 1] >= 0.0)) {
      cv.other_crossings.push_back(0.5 * (alphas[i - 1] + alphas[i]));
    }
  }
  return cv;
}

std::vector<double> scan_grid(const CriticalScanOptions& opt) {
  std::vector<double> a(opt.points);
  for (int i = 0; i < opt.points; ++i) a[i] = opt.lo + (opt.hi - opt.lo) * i / (opt.points - 1);
  return a;
}

std::pair<double, double> odd_eval(int j, const ProblemParams& params, double alpha, const TimeMapOptions& mo) {
  const TimeMaps maps(params.with_alpha(alpha), mo);
  return {odd_critical_function(j, maps), maps.geometry().x_t()};
}

std::pair<double, double> even_eval(int j, const ProblemParams& params, double alpha, int theta_points,
                                    const TimeMapOptions& mo) {
  const TimeMaps maps(params.with_alpha(alpha), mo);
  return even_critical_function(j, maps, theta_points);
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Continuous families of roots. In the symmetric case a root moving through
// x_t switches from tau_j to tau_{j -/+ 1} and stays a root of the same glued
// selector: even keys are Theta_k, odd keys the companion selector. With
// unequal weights a root switches between tau_{2k+1} and tau_{2k+2} where the
// two crossings of lap k merge, so the lap is the key.
int family_key(const BranchSample& s, bool symmetric) {
  if (!symmetric) return (s.j + 1) / 2;
  switch (s.domain) {
    case DomainTag::d1:
      return s.j % 2 == 0 ? s.j - 2 : s.j;
    case DomainTag::d2:
      return s.j - 1;
    case DomainTag::d3:
      return 0;
    default:
      return -1;  // tangency: decided by proximity
  }
}

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Linking coordinate; the principal branch grows like 1 / (1 - 2 alpha).
double xi(double x, double alpha) { return x * (1.0 - 2.0 * alpha); }

}  // namespace

double odd_critical_function(int j, const TimeMaps& maps) {
  const auto sc = maps.schedule_at_s(maps.geometry().departure.s_t);
  return sc.tau_j(2 * j + 1) - (1.0 - 2.0 * maps.params().alpha());
}

std::pair<double, double> even_critical_function(int j, const TimeMaps& maps, int theta_points) {
  const double s_h = maps.geometry().departure.s_h;
  const auto grid = open_s_grid(s_h, theta_points);
  std::size_t best = 0;
  double best_v = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = theta_at(j, maps, grid[i]);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  const double target = 1.0 - 2.0 * maps.params().alpha();
  if (!std::isfinite(best_v)) return {kInf, kUndefined};
  const double lo = best > 0 ? grid[best - 1] : 0.5 * grid[0];
  const double hi = best + 1 < grid.size() ? grid[best + 1] : 0.5 * (grid[best] + s_h);
  const auto [s_min, v_min] = minimize_golden([&](double s) { return theta_at(j, maps, s); }, lo, hi, 1e-12 * s_h);
  double s_best = s_min;
  double v_best = v_min;
  if (best_v < v_best) {
    s_best = grid[best];
    v_best = best_v;
  }
  return {v_best - target, maps.schedule_at_s(s_best).x};
}

CriticalValue detect_odd_critical(int j, const ProblemParams& params, const CriticalScanOptions& opt) {
  const auto alphas = scan_grid(opt);
  std::vector<double> values;
  values.reserve(alphas.size());
  for (double a : alphas) values.push_back(odd_eval(j, params, a, opt.maps).first);
  return resolve_critical(2 * j + 1, alphas, values, [&](double a) { return odd_eval(j, params, a, opt.maps); });
}

CriticalValue detect_even_critical(int j, const ProblemParams& params, const CriticalScanOptions& opt) {
  const auto alphas = scan_grid(opt);
  std::vector<double> values;
  values.reserve(alphas.size());
  for (double a : alphas) values.push_back(even_eval(j, params, a, opt.theta_points, opt.maps).first);
  return resolve_critical(2 * j, alphas, values,
                          [&](double a) { return even_eval(j, params, a, opt.theta_points, opt.maps); });
}

CriticalAlphas detect_criticals(const ProblemParams& params, const CriticalScanOptions& opt) {
  const int n = band_index(params.lambda(), params.p());
  const int n_odd = odd_count(n);
  const int n_even = even_count(n);
  const auto alphas = scan_grid(opt);
  // one set of time maps per grid alpha serves every function
  std::vector<std::vector<double>> odd_v(n_odd);
  std::vector<std::vector<double>> even_v(n_even);
  for (double a : alphas) {
    if (n_odd + n_even == 0) break;
    const TimeMaps maps(params.with_alpha(a), opt.maps);
    for (int j = 0; j < n_odd; ++j) odd_v[j].push_back(odd_critical_function(j, maps));
    for (int j = 1; j <= n_even; ++j) even_v[j - 1].push_back(even_critical_function(j, maps, opt.theta_points).first);
  }
  CriticalAlphas out;
  for (int j = 0; j < n_odd; ++j) {
    try {
      out.odd.push_back(resolve_critical(2 * j + 1, alphas, odd_v[j], [&](double a) { return odd_eval(j, params, a, opt.maps); }));
    } catch (const CriticalNotPresent&) {
    }
  }
  for (int j = 1; j <= n_even; ++j) {
    try {
      out.even.push_back(resolve_critical(2 * j, alphas, even_v[j - 1],
                                          [&](double a) { return even_eval(j, params, a, opt.theta_points, opt.maps); }));
    } catch (const CriticalNotPresent&) {
    }
  }
  return out;
}

int theta_root_count(int j, const ProblemParams& params, int theta_points) {
  const TimeMaps maps(params);
  const double target = 1.0 - 2.0 * params.alpha();
  std::vector<double> v;
  for (double s : open_s_grid(maps.geometry().departure.s_h, theta_points)) {
    const double th = maps.schedule_at_s(s).theta(j);
    v.push_back(std::isfinite(th) ? th - target : kUndefined);
  }
  return static_cast<int>(sign_change_cells(v).size());
}

std::string to_string(BranchEnd e) {
  switch (e) {
    case BranchEnd::reaches_alpha0:
      return "reaches_alpha0";
    case BranchEnd::joins_bifurcation:
      return "joins_bifurcation";
    case BranchEnd::turning_point:
      return "turning_point";
    case BranchEnd::principal_tail:
      return "principal_tail";
    case BranchEnd::grid_end:
      return "grid_end";
    case BranchEnd::open:
      return "open";
  }
  return "open";
}

std::string to_string(DiagramCase c) {
  switch (c) {
    case DiagramCase::n0:
      return "n0";
    case DiagramCase::n1:
      return "n1";
    case DiagramCase::odd:
      return "odd";
    case DiagramCase::even:
      return "even";
  }
  return "n0";
}

std::size_t BifurcationDiagram::count_at(std::size_t level) const {
  if (level >= alphas.size()) throw InvalidParameter("level " + std::to_string(level) + " out of range");
  const double a = alphas[level];
  std::size_t c = 0;
  for (const auto& b : branches) {
    for (const auto& s : b.samples) c += s.alpha == a ? 1 : 0;
  }
  return c;
}

std::vector<double> sweep_alphas(const AlphaGridSpec& spec, const CriticalAlphas& criticals) {
  if (spec.points < 2 || !(spec.lo < spec.hi) || spec.lo <= 0.0 || spec.hi >= 0.5) {
    throw InvalidParameter("alpha grid needs points >= 2 and 0 < lo < hi < 1/2");
  }
  std::vector<double> a;
  const double h = (spec.hi - spec.lo) / (spec.points - 1);
  for (int i = 0; i < spec.points; ++i) a.push_back(spec.lo + h * i);
  const double hr = h / std::max(1, spec.refine_factor);
  auto refine = [&](double c) {
    const double lo = std::max(spec.lo, c - spec.window);
    const double hi = std::min(spec.hi, c + spec.window);
    for (double v = lo; v <= hi; v += hr) a.push_back(v);
  };
  for (const auto& c : criticals.odd) refine(c.alpha);
  for (const auto& c : criticals.even) refine(c.alpha);
  for (double v : spec.extra) {
    if (v > 0.0 && v < 0.5) a.push_back(v);
  }
  std::sort(a.begin(), a.end());
  std::vector<double> out;
  for (double v : a) {
    if (out.empty() || v - out.back() > 1e-12) out.push_back(v);
  }
  return out;
}

void link_branches(BifurcationDiagram& d, const std::vector<std::vector<BranchSample>>& levels) {
  if (levels.size() != d.alphas.size()) throw InvalidParameter("one root set per alpha level expected");
  const bool symmetric = d.params.c_left() == d.params.c_right();
  d.branches.clear();
  const std::size_t L = levels.size();

  // family of every sample, and the branch each sample went to
  std::vector<std::vector<int>> fam(L);
  std::vector<std::vector<int>> owner(L);

  auto predict = [&](const Branch& b, double alpha) {
    const auto& last = b.samples.back();
    const double q = xi(last.x, last.alpha);
    if (b.samples.size() < 2) return std::pair{q, 0.25 * std::max(1.0, std::abs(q))};
    const auto& prev = b.samples[b.samples.size() - 2];
    const double slope = (q - xi(prev.x, prev.alpha)) / (last.alpha - prev.alpha);
    const double da = alpha - last.alpha;
    return std::pair{q + slope * da, 5.0 * std::abs(slope) * da + 0.02 * std::max(1.0, std::abs(q))};
  };
  std::vector<int> branch_family;

  for (std::size_t i = 0; i < L; ++i) {
    const auto& lv = levels[i];
    fam[i].assign(lv.size(), 0);
    owner[i].assign(lv.size(), -1);
    std::vector<int> alive;
    if (i > 0) {
      for (std::size_t b = 0; b < d.branches.size(); ++b) {
        if (d.branches[b].samples.back().alpha == d.alphas[i - 1]) alive.push_back(static_cast<int>(b));
      }
    }
    for (std::size_t k = 0; k < lv.size(); ++k) {
      int f = family_key(lv[k], symmetric);
      if (f < 0) {
        // tangency sample: family of the nearest predicted branch
        double best = kInf;
        for (int b : alive) {
          const auto [px, bound] = predict(d.branches[b], d.alphas[i]);
          const double g = std::abs(xi(lv[k].x, d.alphas[i]) - px) / bound;
          if (g < best) {
            best = g;
            f = branch_family[b];
          }
        }
        if (f < 0) f = family_key(BranchSample{0, 0, lv[k].j, DomainTag::d1, false}, symmetric);
      }
      fam[i][k] = f;
    }

    // order preserving assignment inside each family
    std::map<int, std::pair<std::vector<int>, std::vector<int>>> groups;
    for (int b : alive) groups[branch_family[b]].first.push_back(b);
    for (std::size_t k = 0; k < lv.size(); ++k) groups[fam[i][k]].second.push_back(static_cast<int>(k));
    for (auto& [f, g] : groups) {
      auto& A = g.first;
      auto& B = g.second;
      std::vector<std::pair<double, double>> pred;
      std::sort(A.begin(), A.end(), [&](int a, int b) {
        return predict(d.branches[a], d.alphas[i]).first < predict(d.branches[b], d.alphas[i]).first;
      });
      for (int b : A) pred.push_back(predict(d.branches[b], d.alphas[i]));
      std::sort(B.begin(), B.end(), [&](int a, int b) { return lv[a].x < lv[b].x; });
      const std::size_t na = A.size();
      const std::size_t nb = B.size();
      // dp over prefixes: most matches, then least total scaled distance
      struct Cell {
        int matches = 0;
        double cost = 0.0;
        int move = 0;  // 0 skip branch, 1 skip sample, 2 match
      };
      std::vector<std::vector<Cell>> dp(na + 1, std::vector<Cell>(nb + 1));
      auto better = [](const Cell& x, const Cell& y) {
        return x.matches > y.matches || (x.matches == y.matches && x.cost < y.cost);
      };
      for (std::size_t a = 0; a <= na; ++a) {
        for (std::size_t b = 0; b <= nb; ++b) {
          if (a == 0 && b == 0) continue;
          Cell best{-1, kInf, -1};
          if (a > 0) {
            Cell c = dp[a - 1][b];
            c.move = 0;
            if (best.move < 0 || better(c, best)) best = c;
          }
          if (b > 0) {
            Cell c = dp[a][b - 1];
            c.move = 1;
            if (best.move < 0 || better(c, best)) best = c;
          }
          if (a > 0 && b > 0) {
            const double g = std::abs(xi(lv[B[b - 1]].x, d.alphas[i]) - pred[a - 1].first) / pred[a - 1].second;
            if (g <= 1.0) {
              Cell c = dp[a - 1][b - 1];
              c.matches += 1;
              c.cost += g;
              c.move = 2;
              if (better(c, best)) best = c;
            }
          }
          dp[a][b] = best;
        }
      }
      for (std::size_t a = na, b = nb; a > 0 || b > 0;) {
        const int mv = dp[a][b].move;
        if (mv == 2) {
          owner[i][B[b - 1]] = A[a - 1];
          --a;
          --b;
        } else if (mv == 1) {
          --b;
        } else {
          --a;
        }
      }
    }
    for (std::size_t k = 0; k < lv.size(); ++k) {
      if (owner[i][k] >= 0) {
        d.branches[owner[i][k]].samples.push_back(lv[k]);
      } else {
        Branch nb;
        nb.samples.push_back(lv[k]);
        nb.start = i == 0 ? BranchEnd::reaches_alpha0 : BranchEnd::open;
        owner[i][k] = static_cast<int>(d.branches.size());
        d.branches.push_back(std::move(nb));
        branch_family.push_back(fam[i][k]);
      }
    }
  }

  // joins at interior levels: ends (side 0) and starts (side 1)
  UnionFind uf(d.branches.size());
  d.bifurcation_joins = 0;
  d.turning_joins = 0;
  for (std::size_t i = 0; i < L; ++i) {
    const auto& lv = levels[i];
    for (int side = 0; side < 2; ++side) {
      if ((side == 0 && i + 1 == L) || (side == 1 && i == 0)) continue;
      auto is_free = [&](std::size_t k) {
        const auto& b = d.branches[owner[i][k]];
        return side == 0 ? b.samples.back().alpha == d.alphas[i] : b.samples.front().alpha == d.alphas[i];
      };
      auto mark = [&](std::size_t k, BranchEnd e) {
        auto& b = d.branches[owner[i][k]];
        (side == 0 ? b.end : b.start) = e;
      };
      std::vector<std::size_t> order(lv.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lv[a].x < lv[b].x; });
      std::vector<bool> done(lv.size(), false);
      // pairs of free samples adjacent within one family
      std::map<int, std::vector<std::size_t>> by_family;
      for (std::size_t k : order) by_family[fam[i][k]].push_back(k);
      for (auto& [f, ks] : by_family) {
        for (std::size_t q = 0; q + 1 < ks.size(); ++q) {
          const std::size_t a = ks[q];
          const std::size_t b = ks[q + 1];
          if (done[a] || !is_free(a) || !is_free(b)) continue;
          // samples of other families between the pair
          std::size_t mid = lv.size();
          double best = kInf;
          const double centre = 0.5 * (lv[a].x + lv[b].x);
          for (std::size_t k = 0; k < lv.size(); ++k) {
            if (k == a || k == b || lv[k].x <= lv[a].x || lv[k].x >= lv[b].x || is_free(k)) continue;
            if (std::abs(lv[k].x - centre) < best) {
              best = std::abs(lv[k].x - centre);
              mid = k;
            }
          }
          uf.unite(owner[i][a], owner[i][b]);
          if (mid < lv.size()) {
            uf.unite(owner[i][a], owner[i][mid]);
            mark(a, BranchEnd::joins_bifurcation);
            mark(b, BranchEnd::joins_bifurcation);
            ++d.bifurcation_joins;
          } else {
            mark(a, BranchEnd::turning_point);
            mark(b, BranchEnd::turning_point);
            ++d.turning_joins;
          }
          done[a] = done[b] = true;
        }
      }
      // single free samples attach to the nearest sample of their level
      for (std::size_t k = 0; k < lv.size(); ++k) {
        if (done[k] || !is_free(k)) continue;
        std::size_t near = lv.size();
        double best = kInf;
        for (std::size_t q = 0; q < lv.size(); ++q) {
          if (q == k) continue;
          const double g = rel_gap(lv[q].x, lv[k].x);
          if (g < best) {
            best = g;
            near = q;
          }
        }
        if (near < lv.size() && best < 0.25) {
          uf.unite(owner[i][k], owner[i][near]);
          mark(k, BranchEnd::joins_bifurcation);
        } else {
          d.warnings.push_back(std::string(side == 0 ? "branch end" : "branch start") + " at alpha = " +
                               fmt(d.alphas[i]) + ", x = " + fmt(lv[k].x) + " left open");
        }
      }
    }
  }

  // components, principal branch, tails
  std::map<int, int> comp_id;
  for (std::size_t b = 0; b < d.branches.size(); ++b) {
    const int r = uf.find(static_cast<int>(b));
    if (!comp_id.count(r)) comp_id[r] = static_cast<int>(comp_id.size());
    d.branches[b].component = comp_id[r];
  }
  d.components = static_cast<int>(comp_id.size());
  d.principal = -1;
  double top = -kInf;
  for (std::size_t b = 0; b < d.branches.size(); ++b) {
    const auto& s = d.branches[b].samples.back();
    if (L > 0 && s.alpha == d.alphas.back()) {
      d.branches[b].end = BranchEnd::grid_end;
      if (s.x > top) {
        top = s.x;
        d.principal = static_cast<int>(b);
      }
    }
  }
  d.principal_grows = false;
  if (d.principal >= 0) {
    auto& pb = d.branches[d.principal];
    pb.end = BranchEnd::principal_tail;
    auto x_at = [&](double a) {
      for (const auto& s : pb.samples) {
        if (std::abs(s.alpha - a) < 1e-12) return s.x;
      }
      return kUndefined;
    };
    const double x40 = x_at(0.40);
    const double x45 = x_at(0.45);
    const double x49 = x_at(0.49);
    d.principal_grows = std::isfinite(x40) && std::isfinite(x45) && std::isfinite(x49) && x49 > x45 && x45 > x40;
  }
}

BifurcationDiagram sweep_diagram(const ProblemParams& params, const AlphaGridSpec& spec) {
  BifurcationDiagram d(params);
  d.params = params;
  d.band = band_index(params.lambda(), params.p());
  d.diagram_case = d.band == 0   ? DiagramCase::n0
                   : d.band == 1 ? DiagramCase::n1
                   : d.band % 2  ? DiagramCase::odd
                                 : DiagramCase::even;
  d.expected_components = d.band / 2 + 1;

  CriticalScanOptions co;
  co.points = std::max(20, spec.points / 2);
  co.lo = spec.lo;
  co.hi = spec.hi;
  co.maps = spec.maps;
  d.criticals = detect_criticals(params, co);
  if (static_cast<int>(d.criticals.odd.size()) < odd_count(d.band)) {
    d.warnings.push_back("only " + std::to_string(d.criticals.odd.size()) + " odd criticals detected");
  }
  if (static_cast<int>(d.criticals.even.size()) < even_count(d.band)) {
    d.warnings.push_back("only " + std::to_string(d.criticals.even.size()) + " even criticals detected");
  }
  d.alphas = sweep_alphas(spec, d.criticals);

  std::vector<std::vector<BranchSample>> levels;
  levels.reserve(d.alphas.size());
  for (double a : d.alphas) {
    const ProblemParams pa = params.with_alpha(a);
    const TimeMaps maps(pa, spec.maps);
    std::vector<BranchSample> lv;
    for (int density = 1;; density *= 2) {
      lv.clear();
      bool stale = false;
      for (const auto& r : matching_roots(maps, spec.scan_points, density)) {
        BranchSample s{a, r.x, r.j, r.domain, false};
        if (spec.validate) {
          try {
            s.validated = passes_residuals(build_profile(maps, r.x, r.j, r.domain, {spec.profile_grid, 1e-12}));
          } catch (const StaleRoot&) {
            stale = true;
          } catch (const NumericalFailure& e) {
            d.warnings.push_back("alpha = " + fmt(a) + ", x = " + fmt(r.x) + ": " + e.what());
          }
        }
        lv.push_back(s);
      }
      if (!stale || density >= 2) break;
    }
    for (const auto& s : lv) d.unvalidated += (spec.validate && !s.validated) ? 1 : 0;
    levels.push_back(std::move(lv));
  }
  link_branches(d, levels);

  d.pattern_realized = d.components == d.expected_components && d.principal_grows &&
                       static_cast<int>(d.criticals.odd.size()) == odd_count(d.band) &&
                       static_cast<int>(d.criticals.even.size()) == even_count(d.band);
  if (!d.pattern_realized) {
    d.warnings.push_back("observed " + std::to_string(d.components) + " components, minimal pattern has " +
                         std::to_string(d.expected_components));
  }
  return d;
}

BifurcationDiagram asymmetric_sweep(const ProblemParams& params, const AlphaGridSpec& spec) {
  auto d = sweep_diagram(params, spec);
  d.split_from_symmetric = d.bifurcation_joins < odd_count(d.band);
  return d;
}

double restricted_hausdorff(const BifurcationDiagram& a, const BifurcationDiagram& b, double exclude) {
  std::vector<double> crit;
  for (const auto& c : a.criticals.odd) crit.push_back(c.alpha);
  for (const auto& c : a.criticals.even) crit.push_back(c.alpha);
  auto xs = [](const BifurcationDiagram& d, double alpha) {
    std::vector<double> v;
    for (const auto& br : d.branches) {
      for (const auto& s : br.samples) {
        if (std::abs(s.alpha - alpha) < 1e-12) v.push_back(s.x);
      }
    }
    return v;
  };
  auto directed = [](const std::vector<double>& p, const std::vector<double>& q) {
    double h = 0.0;
    for (double x : p) {
      double m = kInf;
      for (double y : q) m = std::min(m, std::abs(x - y) / std::max(1.0, std::abs(x)));
      h = std::max(h, m);
    }
    return h;
  };
  double h = 0.0;
  bool any = false;
  for (double al : a.alphas) {
    if (std::any_of(crit.begin(), crit.end(), [&](double c) { return std::abs(c - al) <= exclude; })) continue;
    if (std::none_of(b.alphas.begin(), b.alphas.end(), [&](double v) { return std::abs(v - al) < 1e-12; })) continue;
    const auto pa = xs(a, al);
    const auto pb = xs(b, al);
    if (pa.empty() && pb.empty()) continue;
    any = true;
    h = std::max({h, directed(pa, pb), directed(pb, pa)});
  }
  if (!any) throw InvalidParameter("no common alpha level outside the excluded windows");
  return h;
}

}  // namespace supind
