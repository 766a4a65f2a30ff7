#include "supind/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "supind/bifurcation.hpp"
#include "supind/matching.hpp"
#include "supind/superlinear.hpp"
#include "supind/timemaps.hpp"

namespace supind::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(format_number(v));
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CliError(kFailure, "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw CliError(kFailure, "write to " + path.string() + " failed");
}

void write_json(const fs::path& path, const json& doc) { write_file(path, doc.dump(2) + "\n"); }

fs::path prepare_out(const RunConfig& cfg) {
  const fs::path out(cfg.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw CliError(kFailure, "cannot create output directory " + cfg.out);
  return out;
}

json params_json(const RunConfig& cfg) {
  return json{{"lambda", num(cfg.lambda)}, {"p", num(cfg.p)},           {"b", num(cfg.b)},
              {"c_left", num(cfg.c_left)}, {"c_right", num(cfg.c_right)}, {"alpha", num(cfg.alpha)}};
}

TimeMapOptions maps_options(const RunConfig& cfg) {
  TimeMapOptions mo;
  mo.quad.rel_tol = cfg.tol_quad;
  mo.root_rel_tol = cfg.tol_root;
  return mo;
}

json residuals_json(const Residuals& r) {
  return json{{"neumann_left", num(r.neumann_left)},   {"neumann_right", num(r.neumann_right)},
              {"energy_drift", num(r.energy_drift)},   {"interface_u", num(r.interface_u)},
              {"interface_v", num(r.interface_v)},     {"oracle_terminal", num(r.oracle_terminal)},
              {"max_u", num(r.max_u)},                 {"min_u", num(r.min_u)}};
}

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::string s;
  for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
  s += "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
    s += "\n";
  }
  return s;
}

// Rows as a JSON table; empty cells become null, numeric cells numbers.
json table_json(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  json out{{"schema", "1"}, {"columns", header}, {"rows", json::array()}};
  for (const auto& r : rows) {
    json row = json::array();
    for (const auto& cell : r) {
      if (cell.empty()) {
        row.push_back(nullptr);
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end && *end == '\0') {
        row.push_back(num(v));
      } else {
        row.push_back(cell);
      }
    }
    out["rows"].push_back(row);
  }
  return out;
}

void write_table(const fs::path& dir, const std::string& stem, const RunConfig& cfg,
                 const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  if (cfg.format == "json") {
    write_json(dir / (stem + ".json"), table_json(header, rows));
  } else {
    write_file(dir / (stem + ".csv"), csv(header, rows));
  }
}

std::string profile_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "profile_%03zu.csv", i);
  return buf;
}

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  const auto params = cfg.params();
  EnumerateOptions eo;
  eo.scan_points = cfg.scan_points;
  eo.profile.grid_size = cfg.grid;
  eo.maps = maps_options(cfg);
  const auto recs = enumerate_solutions(params, eo);
  const auto dir = prepare_out(cfg);

  json doc{{"schema", "1"}, {"command", "solve"}, {"params", params_json(cfg)}, {"count", recs.size()}};
  json list = json::array();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    json item{{"index", i},
              {"x", num(r.x)},
              {"j", r.j},
              {"domain", to_string(r.domain)},
              {"passes", passes_residuals(r)},
              {"residuals", residuals_json(r.residuals)}};
    if (cfg.format == "json") {
      json t = json::array(), u = json::array(), v = json::array();
      for (const auto& s : r.profile) {
        t.push_back(num(s.t));
        u.push_back(num(s.u));
        v.push_back(num(s.v));
      }
      item["profile"] = json{{"t", t}, {"u", u}, {"v", v}};
    } else {
      std::string text = "t,u,v\n";
      for (const auto& s : r.profile) {
        text += format_fixed(s.t) + "," + format_fixed(s.u) + "," + format_fixed(s.v) + "\n";
      }
      write_file(dir / profile_name(i), text);
      item["profile_file"] = profile_name(i);
    }
    list.push_back(item);
  }
  doc["solutions"] = list;
  write_json(dir / "solutions.json", doc);
  if (recs.empty()) {
    log << "solve: no solutions found, although at least one exists for every alpha in [0, 1/2)\n";
    return kEmptyResult;
  }
  log << "solve: " << recs.size() << " solutions written to " << cfg.out << "\n";
  return kOk;
}

int cmd_timemaps(const RunConfig& cfg, std::ostream& log) {
  const auto params = cfg.params();
  const int j_max = scan_j_max(params);
  std::vector<std::string> header{"x", "domain"};
  std::vector<std::vector<std::string>> rows;
  json summary{{"schema", "1"}, {"command", "timemaps"}, {"params", params_json(cfg)}, {"j_max", j_max}};

  if (params.alpha() == 0.0) {
    const PhasePortrait pp(params);
    for (int n = 1; n <= j_max; ++n) header.push_back("T_" + std::to_string(n));
    std::vector<double> xs;
    for (int k = 1; k <= cfg.grid; ++k) xs.push_back(cfg.x_max * k / (cfg.grid + 1));
    xs.push_back(pp.omega());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (double x : xs) {
      const DomainTag tag = x < pp.omega()   ? DomainTag::below_center
                            : x > pp.omega() ? DomainTag::above_center
                                             : DomainTag::center;
      std::vector<std::string> row{format_number(x), to_string(tag)};
      for (int n = 1; n <= j_max; ++n) row.push_back(format_number(pp.tn_map(n, x)));
      rows.push_back(row);
    }
    summary["mode"] = "alpha0";
    summary["omega"] = num(pp.omega());
    summary["u_h"] = num(pp.u_h());
    summary["x_t"] = nullptr;
    summary["x_h"] = nullptr;
    summary["s_infinity"] = nullptr;
  } else {
    const TimeMaps maps(params, maps_options(cfg));
    for (int j = 1; j <= j_max; ++j) header.push_back("tau_" + std::to_string(j));
    header.push_back("tau");
    const auto& geo = maps.geometry();
    std::vector<double> xs;
    for (int k = 1; k <= cfg.grid; ++k) xs.push_back(cfg.x_max * k / cfg.grid);
    xs.push_back(geo.x_t());
    if (geo.x_h() <= cfg.x_max) xs.push_back(geo.x_h());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (double x : xs) {
      const auto sc = maps.schedule(x);
      std::vector<std::string> row{format_number(x), to_string(sc.domain)};
      for (int j = 1; j <= j_max; ++j) row.push_back(format_number(sc.tau_j(j)));
      row.push_back(format_number(sc.period));
      rows.push_back(row);
    }
    summary["mode"] = "alpha";
    summary["omega"] = num(maps.portrait().omega());
    summary["u_h"] = num(maps.portrait().u_h());
    summary["x_t"] = num(geo.x_t());
    summary["x_h"] = num(geo.x_h());
    summary["s_infinity"] = num(maps.gamma0().s_infinity());
    summary["warnings"] = geo.warnings;
  }
  summary["x_max"] = num(cfg.x_max);
  summary["rows"] = rows.size();
  const auto dir = prepare_out(cfg);
  write_table(dir, "timemaps", cfg, header, rows);
  write_json(dir / "timemaps_summary.json", summary);
  log << "timemaps: " << rows.size() << " rows written to " << cfg.out << "\n";
  return kOk;
}

std::vector<std::vector<std::string>> orbit_rows(const PhasePortrait& pp, const OrbitSlice& sl, int n) {
  const double lo = sl.m ? *sl.m : 0.0;
  const double hi = sl.M;
  std::vector<std::vector<std::string>> rows;
  auto speed = [&](double u) { return std::sqrt(std::max(0.0, pp.speed_squared(sl.e0, u))); };
  // clustered at the turning points, upper arc out and lower arc back
  for (int k = 0; k < n; ++k) {
    const double u = k == n - 1 ? hi : lo + (hi - lo) * 0.5 * (1.0 - std::cos(M_PI * k / (n - 1)));
    rows.push_back({format_number(u), format_number(k == n - 1 && sl.m ? 0.0 : speed(u))});
  }
  for (int k = n - 2; k >= 0; --k) {
    const double u = k == 0 ? lo : lo + (hi - lo) * 0.5 * (1.0 - std::cos(M_PI * k / (n - 1)));
    rows.push_back({format_number(u), format_number(-speed(u))});
  }
  return rows;
}

int cmd_phase(const RunConfig& cfg, std::ostream& log) {
  const auto params = cfg.params();
  const PhasePortrait pp(params);
  const int n = cfg.grid;
  json summary{{"schema", "1"}, {"command", "phase"}, {"params", params_json(cfg)}};
  std::vector<std::pair<std::string, std::pair<std::vector<std::string>, std::vector<std::vector<std::string>>>>> tables;

  std::vector<std::vector<std::string>> hom;
  for (int k = 0; k < n; ++k) {
    if (k == n - 1) {
      hom.push_back({format_number(pp.u_h()), format_number(0.0)});
      break;
    }
    const double u = pp.u_h() * std::sin(0.5 * M_PI * k / (n - 1));
    hom.push_back({format_number(u), format_number(pp.homoclinic_v(u))});
  }
  tables.push_back({"homoclinic", {{"u", "v"}, hom}});

  if (params.alpha() > 0.0) {
    const TimeMaps maps(params, maps_options(cfg));
    std::vector<std::vector<std::string>> g0, g1;
    for (int k = 0; k < n; ++k) {
      const double x = cfg.x_max * k / (n - 1);
      g0.push_back({format_number(x), format_number(maps.gamma0().eval_y(x))});
      g1.push_back({format_number(x), format_number(maps.gamma1().eval_y(x))});
    }
    tables.push_back({"gamma0", {{"x", "y"}, g0}});
    tables.push_back({"gamma1", {{"x", "y"}, g1}});
    summary["x_t"] = num(maps.geometry().x_t());
    summary["x_h"] = num(maps.geometry().x_h());
  }
  json orbits = json::array();
  for (std::size_t i = 0; i < cfg.energies.size(); ++i) {
    const auto sl = pp.turning_points(cfg.energies[i]);
    const std::string name = "orbit_" + std::to_string(i);
    tables.push_back({name, {{"u", "v"}, orbit_rows(pp, sl, n)}});
    orbits.push_back(json{{"name", name},
                          {"energy", num(sl.e0)},
                          {"m", sl.m ? num(*sl.m) : json(nullptr)},
                          {"M", num(sl.M)}});
  }
  summary["omega"] = num(pp.omega());
  summary["u_h"] = num(pp.u_h());
  summary["x_max"] = num(cfg.x_max);
  summary["orbits"] = orbits;

  const auto dir = prepare_out(cfg);
  for (const auto& [name, t] : tables) write_table(dir, name, cfg, t.first, t.second);
  write_json(dir / "phase_summary.json", summary);
  log << "phase: " << tables.size() << " polylines written to " << cfg.out << "\n";
  return kOk;
}

json critical_json(const CriticalValue& c) {
  json others = json::array();
  for (double a : c.other_crossings) others.push_back(num(a));
  return json{{"index", c.index},
              {"alpha", num(c.alpha)},
              {"x", num(c.x)},
              {"residual", num(c.residual)},
              {"other_crossings", others}};
}

std::string gnuplot_script(const BifurcationDiagram& d) {
  std::ostringstream gp;
  gp << "set datafile separator ','\n"
     << "set key off\n"
     << "set xlabel 'alpha'\n"
     << "set ylabel 'x = u(alpha)'\n"
     << "set logscale y\n"
     << "set xrange [" << format_number(d.alphas.front()) << ":" << format_number(d.alphas.back()) << "]\n";
  for (const auto* group : {&d.criticals.odd, &d.criticals.even}) {
    for (const auto& c : *group) {
      gp << "set arrow from " << format_number(c.alpha) << ", graph 0 to " << format_number(c.alpha)
         << ", graph 1 nohead dashtype 2\n";
    }
  }
  gp << "plot for [i=0:" << (d.branches.empty() ? 0 : d.branches.size() - 1)
     << "] 'branches.csv' every ::1 using 2:($1 == i ? $3 : 1/0) with lines\n";
  return gp.str();
}

int cmd_diagram(const RunConfig& cfg, std::ostream& log) {
  const auto params = cfg.params();
  AlphaGridSpec spec;
  spec.points = cfg.alpha_steps;
  spec.lo = cfg.alpha_min;
  spec.hi = cfg.alpha_max;
  spec.scan_points = cfg.scan_points;
  spec.validate = cfg.validate;
  spec.profile_grid = cfg.grid;
  spec.maps = maps_options(cfg);
  spec.extra.erase(std::remove_if(spec.extra.begin(), spec.extra.end(),
                                  [&](double a) { return a < spec.lo || a > spec.hi; }),
                   spec.extra.end());
  const bool asym = cfg.c_left != cfg.c_right;
  const auto d = asym ? asymmetric_sweep(params, spec) : sweep_diagram(params, spec);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t b = 0; b < d.branches.size(); ++b) {
    for (const auto& s : d.branches[b].samples) {
      rows.push_back({std::to_string(b), format_number(s.alpha), format_number(s.x), std::to_string(s.j),
                      to_string(s.domain)});
    }
  }
  const std::vector<std::string> header{"branch_id", "alpha", "x", "j", "domain"};

  json crit{{"schema", "1"}, {"params", params_json(cfg)}, {"odd", json::array()}, {"even", json::array()}};
  for (const auto& c : d.criticals.odd) crit["odd"].push_back(critical_json(c));
  for (const auto& c : d.criticals.even) crit["even"].push_back(critical_json(c));

  json branches = json::array();
  for (std::size_t b = 0; b < d.branches.size(); ++b) {
    const auto& br = d.branches[b];
    std::size_t unval = 0;
    for (const auto& s : br.samples) unval += s.validated ? 0 : 1;
    branches.push_back(json{{"branch_id", b},
                            {"component", br.component},
                            {"start", to_string(br.start)},
                            {"end", to_string(br.end)},
                            {"alpha_first", num(br.samples.front().alpha)},
                            {"alpha_last", num(br.samples.back().alpha)},
                            {"samples", br.samples.size()},
                            {"unvalidated", cfg.validate ? json(unval) : json(nullptr)}});
  }
  json comp{{"schema", "1"},
            {"params", params_json(cfg)},
            {"asymmetric", asym},
            {"components", d.components},
            {"band", d.band},
            {"diagram_case", to_string(d.diagram_case)},
            {"expected_components", d.expected_components},
            {"pattern_realized", d.pattern_realized},
            {"principal_branch", d.principal},
            {"principal_grows", d.principal_grows},
            {"bifurcation_joins", d.bifurcation_joins},
            {"turning_joins", d.turning_joins},
            {"split_from_symmetric", asym ? json(d.split_from_symmetric) : json(nullptr)},
            {"levels", d.alphas.size()},
            {"unvalidated", d.unvalidated},
            {"branches", branches},
            {"warnings", d.warnings}};

  const auto dir = prepare_out(cfg);
  write_file(dir / "branches.csv", csv(header, rows));
  if (cfg.format == "json") write_json(dir / "branches.json", table_json(header, rows));
  write_json(dir / "criticals.json", crit);
  write_json(dir / "components.json", comp);
  write_file(dir / "diagram.gp", gnuplot_script(d));
  log << "diagram: " << d.branches.size() << " branches in " << d.components << " components, "
      << d.alphas.size() << " alpha levels, written to " << cfg.out << "\n";
  return kOk;
}

int cmd_multiplicity(const RunConfig& cfg, std::ostream& log) {
  const auto params = cfg.params();
  EnumerateOptions eo;
  eo.scan_points = cfg.scan_points;
  eo.profile.grid_size = cfg.grid;
  eo.maps = maps_options(cfg);
  const auto sum = count_and_classify(params, cfg.alpha_star, eo);
  json per_j = json::object();
  for (const auto& [j, c] : sum.per_j) per_j[std::to_string(j)] = c;
  json per_domain = json::object();
  for (const auto& [t, c] : sum.per_domain) per_domain[to_string(t)] = c;
  json sols = json::array();
  for (const auto& r : sum.records) {
    sols.push_back(json{{"x", num(r.x)}, {"j", r.j}, {"domain", to_string(r.domain)}, {"passes", passes_residuals(r)}});
  }
  json doc{{"schema", "1"},
           {"params", params_json(cfg)},
           {"total", sum.total},
           {"band", sum.band},
           {"lower_bound", sum.lower_bound},
           {"alpha_star", cfg.alpha_star ? num(*cfg.alpha_star) : json(nullptr)},
           {"shortfall", sum.shortfall},
           {"per_j", per_j},
           {"per_domain", per_domain},
           {"solutions", sols}};
  const auto dir = prepare_out(cfg);
  write_json(dir / "multiplicity.json", doc);
  log << "multiplicity: " << sum.total << " solutions, lower bound " << sum.lower_bound << "\n";
  return sum.total == 0 ? kEmptyResult : kOk;
}

template <class T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<T>();
}

}  // namespace

ProblemParams RunConfig::params() const {
  if (c_left == c_right) return ProblemParams::symmetric(lambda, p, b, c_left, alpha);
  return ProblemParams::asymmetric(lambda, p, b, c_left, c_right, alpha);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v == 0.0 ? 0.0 : v);
  return buf;
}

std::string format_fixed(double v) {
  if (!std::isfinite(v)) return format_number(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12f", v);
  std::string s = buf;
  if (s == "-0.000000000000") s = "0.000000000000";
  return s;
}

std::string to_json(const RunConfig& c) {
  json j{{"schema", "1"},
         {"command", c.command},
         {"lambda", num(c.lambda)},
         {"p", num(c.p)},
         {"b", num(c.b)},
         {"c_left", num(c.c_left)},
         {"c_right", num(c.c_right)},
         {"alpha", num(c.alpha)},
         {"alpha_min", num(c.alpha_min)},
         {"alpha_max", num(c.alpha_max)},
         {"alpha_steps", c.alpha_steps},
         {"format", c.format},
         {"out", c.out},
         {"tol_quad", num(c.tol_quad)},
         {"tol_root", num(c.tol_root)},
         {"grid", c.grid},
         {"scan_points", c.scan_points},
         {"x_max", num(c.x_max)},
         {"energies", json::array()},
         {"alpha_star", c.alpha_star ? num(*c.alpha_star) : json(nullptr)},
         {"validate", c.validate}};
  for (double e : c.energies) j["energies"].push_back(num(e));
  return j.dump(2) + "\n";
}

RunConfig overlay_json(const std::string& text, RunConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw CliError(kInvalidInput, std::string("config file: ") + e.what());
  }
  if (!j.is_object()) throw CliError(kInvalidInput, "config file: top level must be an object");
  if (j.contains("schema") && j["schema"] != "1") throw CliError(kInvalidInput, "config file: unsupported schema");
  try {
    take(j, "command", c.command);
    take(j, "lambda", c.lambda);
    take(j, "p", c.p);
    take(j, "b", c.b);
    if (j.contains("c")) {
      c.c_left = c.c_right = j["c"].get<double>();
    }
    take(j, "c_left", c.c_left);
    take(j, "c_right", c.c_right);
    take(j, "alpha", c.alpha);
    take(j, "alpha_min", c.alpha_min);
    take(j, "alpha_max", c.alpha_max);
    take(j, "alpha_steps", c.alpha_steps);
    take(j, "format", c.format);
    take(j, "out", c.out);
    take(j, "tol_quad", c.tol_quad);
    take(j, "tol_root", c.tol_root);
    take(j, "grid", c.grid);
    take(j, "scan_points", c.scan_points);
    take(j, "x_max", c.x_max);
    take(j, "energies", c.energies);
    if (j.contains("alpha_star")) {
      c.alpha_star = j["alpha_star"].is_null() ? std::optional<double>() : j["alpha_star"].get<double>();
    }
    take(j, "validate", c.validate);
  } catch (const json::exception& e) {
    throw CliError(kInvalidInput, std::string("config file: ") + e.what());
  }
  return c;
}

RunConfig parse_args(int argc, const char* const* argv) {
  CLI::App app{"Positive solutions and bifurcation diagrams of -u'' = lambda u + a(t) u^p with Neumann conditions"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig f;
  std::string config_path;
  double c = 1.0;
  double alpha_star = 0.0;
  app.add_option("--config", config_path, "JSON config; flags override its values");
  auto* o_lambda = app.add_option("--lambda", f.lambda, "lambda < 0");
  auto* o_p = app.add_option("--p", f.p, "exponent p > 1");
  auto* o_b = app.add_option("--b", f.b, "weight on the middle interval");
  auto* o_c = app.add_option("--c", c, "weight magnitude on both outer intervals");
  auto* o_cl = app.add_option("--c-left", f.c_left, "weight magnitude on [0, alpha]");
  auto* o_cr = app.add_option("--c-right", f.c_right, "weight magnitude on [1 - alpha, 1]");
  auto* o_alpha = app.add_option("--alpha", f.alpha, "outer interval length, 0 <= alpha < 1/2");
  auto* o_amin = app.add_option("--alpha-min", f.alpha_min, "diagram: smallest alpha");
  auto* o_amax = app.add_option("--alpha-max", f.alpha_max, "diagram: largest alpha");
  auto* o_asteps = app.add_option("--alpha-steps", f.alpha_steps, "diagram: uniform alpha levels");
  auto* o_format = app.add_option("--format", f.format, "table format")->check(CLI::IsMember({"csv", "json"}));
  auto* o_out = app.add_option("--out", f.out, "output directory");
  auto* o_tq = app.add_option("--tol-quad", f.tol_quad, "relative quadrature tolerance");
  auto* o_tr = app.add_option("--tol-root", f.tol_root, "relative tolerance on curve parameters");
  auto* o_grid = app.add_option("--grid", f.grid, "profile / table / polyline points (0: default)");
  auto* o_scan = app.add_option("--scan-points", f.scan_points, "root scan points per domain");
  auto* o_xmax = app.add_option("--x-max", f.x_max, "largest abscissa of tables and curves (0: default)");
  auto* o_energy = app.add_option("--energy", f.energies, "phase: orbit energy levels");
  auto* o_astar = app.add_option("--alpha-star", alpha_star, "multiplicity: threshold below which 2n+1 applies");
  auto* o_noval = app.add_flag("--no-validate", "diagram: skip profile checks");
  for (const char* name : {"solve", "timemaps", "phase", "diagram", "multiplicity"}) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw CliError(kOk, app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw CliError(kOk, app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    throw CliError(kInvalidInput, e.what());
  }

  RunConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw CliError(kInvalidInput, "cannot read config file " + config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    cfg = overlay_json(ss.str(), cfg);
  }
  cfg.command = app.get_subcommands().front()->get_name();
  const std::vector<std::pair<CLI::Option*, std::function<void()>>> flags = {
      {o_lambda, [&] { cfg.lambda = f.lambda; }},
      {o_p, [&] { cfg.p = f.p; }},
      {o_b, [&] { cfg.b = f.b; }},
      {o_c, [&] { cfg.c_left = cfg.c_right = c; }},
      {o_cl, [&] { cfg.c_left = f.c_left; }},
      {o_cr, [&] { cfg.c_right = f.c_right; }},
      {o_alpha, [&] { cfg.alpha = f.alpha; }},
      {o_amin, [&] { cfg.alpha_min = f.alpha_min; }},
      {o_amax, [&] { cfg.alpha_max = f.alpha_max; }},
      {o_asteps, [&] { cfg.alpha_steps = f.alpha_steps; }},
      {o_format, [&] { cfg.format = f.format; }},
      {o_out, [&] { cfg.out = f.out; }},
      {o_tq, [&] { cfg.tol_quad = f.tol_quad; }},
      {o_tr, [&] { cfg.tol_root = f.tol_root; }},
      {o_grid, [&] { cfg.grid = f.grid; }},
      {o_scan, [&] { cfg.scan_points = f.scan_points; }},
      {o_xmax, [&] { cfg.x_max = f.x_max; }},
      {o_energy, [&] { cfg.energies = f.energies; }},
      {o_astar, [&] { cfg.alpha_star = alpha_star; }},
      {o_noval, [&] { cfg.validate = false; }},
  };
  for (const auto& [opt, apply] : flags) {
    if (opt->count() > 0) apply();
  }
  return cfg;
}

RunConfig resolve(RunConfig cfg) {
  static const std::vector<std::string> commands = {"solve", "timemaps", "phase", "diagram", "multiplicity"};
  if (std::find(commands.begin(), commands.end(), cfg.command) == commands.end()) {
    throw CliError(kInvalidInput, "unknown command '" + cfg.command + "'");
  }
  if (cfg.format != "csv" && cfg.format != "json") throw CliError(kInvalidInput, "format must be csv or json");
  if (!(cfg.tol_quad > 0.0) || !(cfg.tol_root > 0.0)) throw CliError(kInvalidInput, "tolerances must be positive");
  if (cfg.scan_points < 10) throw CliError(kInvalidInput, "scan-points must be at least 10");
  if (cfg.out.empty()) throw CliError(kInvalidInput, "output directory must not be empty");
  if (cfg.grid == 0) {
    cfg.grid = cfg.command == "timemaps" || cfg.command == "phase" ? 400 : cfg.command == "diagram" ? 201 : 1001;
  }
  if (cfg.grid < 2) throw CliError(kInvalidInput, "grid must have at least 2 points");
  if (cfg.command == "diagram") {
    if (!(cfg.alpha_min > 0.0 && cfg.alpha_min < cfg.alpha_max && cfg.alpha_max < 0.5) || cfg.alpha_steps < 2) {
      throw CliError(kInvalidInput, "diagram needs 0 < alpha-min < alpha-max < 1/2 and alpha-steps >= 2");
    }
    cfg.alpha = cfg.alpha_min;
  }
  ProblemParams params = ProblemParams::symmetric(-1.0, 3.0, 1.0, 1.0, 0.0);
  try {
    params = cfg.params();
  } catch (const InvalidParameter& e) {
    throw CliError(kInvalidInput, std::string("invalid problem: ") + e.what());
  }
  if (cfg.x_max < 0.0) throw CliError(kInvalidInput, "x-max must be positive");
  if (cfg.x_max == 0.0 && (cfg.command == "timemaps" || cfg.command == "phase")) {
    const PhasePortrait pp(params);
    double x_h = pp.u_h();
    if (params.alpha() > 0.0) x_h = TimeMaps(params).geometry().x_h();
    if (cfg.command == "timemaps") {
      cfg.x_max = params.alpha() > 0.0 ? 2.0 * x_h : pp.u_h();
    } else {
      cfg.x_max = 1.2 * std::max(pp.u_h(), x_h);
    }
  }
  if (cfg.command == "timemaps" && params.alpha() == 0.0 && cfg.x_max > PhasePortrait(params).u_h()) {
    throw CliError(kInvalidInput, "alpha = 0 tables need x-max <= u_h");
  }
  // keep the in-memory values identical to the written ones, so a rerun from
  // the resolved config reproduces the outputs byte for byte
  for (double* v : {&cfg.lambda, &cfg.p, &cfg.b, &cfg.c_left, &cfg.c_right, &cfg.alpha, &cfg.alpha_min, &cfg.alpha_max,
                    &cfg.tol_quad, &cfg.tol_root, &cfg.x_max}) {
    *v = std::stod(format_number(*v));
  }
  for (double& e : cfg.energies) e = std::stod(format_number(e));
  if (cfg.alpha_star) cfg.alpha_star = std::stod(format_number(*cfg.alpha_star));
  return cfg;
}

int run(const RunConfig& cfg, std::ostream& log) {
  int code = kOk;
  if (cfg.command == "solve") code = cmd_solve(cfg, log);
  if (cfg.command == "timemaps") code = cmd_timemaps(cfg, log);
  if (cfg.command == "phase") code = cmd_phase(cfg, log);
  if (cfg.command == "diagram") code = cmd_diagram(cfg, log);
  if (cfg.command == "multiplicity") code = cmd_multiplicity(cfg, log);
  write_file(prepare_out(cfg) / "config.json", to_json(cfg));
  return code;
}

int main_entry(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  try {
    return run(resolve(parse_args(argc, argv)), log);
  } catch (const CliError& e) {
    (e.code() == kOk ? log : err) << e.what() << (e.code() == kOk ? "" : "\n");
    return e.code();
  } catch (const InvalidParameter& e) {
    err << "invalid input: " << e.what() << "\n";
    return kInvalidInput;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace supind::cli
