#pragma once

#include <limits>
#include <string>
#include <vector>

#include "supind/core.hpp"
#include "supind/solution.hpp"
#include "supind/sublinear.hpp"
#include "supind/superlinear.hpp"

namespace supind {

/// Energy E(x, y(x)) of the positive-weight flow sampled along one shooting curve.
struct CurveEnergySample {
  double s;
  double x;
  double e;   ///< E at the curve point
  double de;  ///< dE/ds
};

/// Tangency and homoclinic crossing of one shooting curve with the orbit family.
struct CurveGeometry {
  double s_t = 0.0;
  double x_t = 0.0;   ///< abscissa of the tangent orbit
  double e_t = 0.0;   ///< its energy, the minimum of E along the curve
  double s_h = 0.0;
  double x_h = 0.0;   ///< positive abscissa on the homoclinic level
  std::vector<double> extra_tangencies;  ///< other sign changes of dE/ds on (0, Omega)
  std::vector<double> extra_homoclinic;  ///< other zeros of E up to 10 u_h
  std::vector<CurveEnergySample> table;  ///< sorted by s
};

/// Geometry of the departure curve Gamma_0 and the arrival curve Gamma_1.
struct CurveOrbitGeometry {
  CurveGeometry departure;
  CurveGeometry arrival;
  std::vector<std::string> warnings;

  double x_t() const { return departure.x_t; }
  double x_h() const { return departure.x_h; }
};

constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

/**
 * Timing data for the flow started at a point of Gamma_0. Crossings with
 * Gamma_1 are listed in visiting order (larger abscissa first).
 */
struct CrossingSchedule {
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
  double e0 = 0.0;
  DomainTag domain = DomainTag::d1;
  OrbitSlice slice;
  std::vector<double> crossings;       ///< abscissae on Gamma_1
  std::vector<double> crossing_times;  ///< arc time from M back to each crossing
  double start_time = 0.0;             ///< arc time from x to M
  double period = kUndefined;          ///< closed orbits only

  /// Time of the j-th arrival at Gamma_1; NaN when undefined.
  double tau_j(int j) const;
  /// Selector equal to tau_{2k+2} on D1 and tau_{2k+1} on D2 (tau_1 on D3 for k = 0).
  double theta(int k) const;
  /// Companion selector equal to tau_{2k+1} on D1 and tau_{2k+2} on D2.
  double theta_tilde(int k) const;
};

struct TimeMapOptions {
  QuadratureSpec quad{};
  double root_rel_tol = 1e-14;  ///< relative tolerance on curve parameters
  /// Route the symmetric case through the general two-curve crossing search.
  bool force_general = false;
};

/**
 * Time maps of the alpha > 0 problem: tau_j, the period tau and the glued
 * selectors, for departures on Gamma_0 (c_left) and arrivals on Gamma_1 (c_right).
 */
class TimeMaps {
 public:
  explicit TimeMaps(const ProblemParams& params, const TimeMapOptions& opt = {});

  const ProblemParams& params() const { return params_; }
  const PhasePortrait& portrait() const { return portrait_; }
  const GammaCurve& gamma0() const { return gamma0_; }
  const GammaCurve& gamma1() const { return gamma1_; }
  const CurveOrbitGeometry& geometry() const { return geom_; }
  bool symmetric_route() const { return symmetric_route_; }

  /// Domain tag of a departure parameter s on Gamma_0.
  DomainTag domain_of_s(double s) const;

  CrossingSchedule schedule_at_s(double s) const;
  CrossingSchedule schedule(double x) const;

  /// Abscissae on Gamma_1 with the energy of (x, y(x)), ascending.
  std::vector<double> partner_points(double x) const;
  /// Same at a departure parameter s; curve parameters of the crossings, ascending.
  std::vector<double> crossing_parameters(double e0, double s_departure) const;

  double tau(double x) const;
  double tau_j(int j, double x) const;
  double theta(int k, double x) const;
  double theta_tilde(int k, double x) const;

  /// Energy data of the arrival curve at its parameter s.
  CurveEnergySample arrival_energy(double s) const;
  CurveEnergySample departure_energy(double s) const;

 private:
  CrossingSchedule build_schedule(const GammaCurve::Point& pt) const;

  ProblemParams params_;
  TimeMapOptions opt_;
  PhasePortrait portrait_;
  GammaCurve gamma0_;
  GammaCurve gamma1_;
  bool symmetric_route_;
  CurveOrbitGeometry geom_;
};

/// Energy of the positive-weight flow along a curve at parameter s (x = +inf past blow-up).
CurveEnergySample curve_energy(const GammaCurve& curve, const PhasePortrait& portrait, double s);

/// Tangency and homoclinic data of a curve; warnings are appended to `warnings`.
CurveGeometry curve_geometry(const GammaCurve& curve, const PhasePortrait& portrait,
                             std::vector<std::string>& warnings);

/// Abscissa of the orbit tangent to the curve (largest root when several exist).
double tangency_x(const GammaCurve& curve, const PhasePortrait& portrait);
/// Smallest positive abscissa where the curve meets the homoclinic level.
double homoclinic_crossing_x(const GammaCurve& curve, const PhasePortrait& portrait);
/// Abscissae on `target` sharing the energy of the point of `start` above x, ascending.
std::vector<double> partner_point(double x, const GammaCurve& start, const GammaCurve& target,
                                  const PhasePortrait& portrait);

}  // namespace supind
