#pragma once

#include <optional>
#include <vector>

#include "supind/core.hpp"
#include "supind/numerics.hpp"
#include "supind/solution.hpp"

namespace supind {

enum class OrbitKind { center, closed, homoclinic, exterior };

/// Energy level below the center value: no orbit.
class EmptyOrbit : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

/// One level set E(u, v) = e0 of the positive-weight flow, restricted to u > 0.
struct OrbitSlice {
  double e0 = 0.0;
  std::optional<double> m;  ///< smaller turning abscissa (closed orbits and the center)
  double M = 0.0;           ///< larger turning abscissa
  OrbitKind kind = OrbitKind::closed;
};

/**
 * Phase portrait of  -u'' = lambda u + b u^p  with first integral
 *   E(u, v) = v^2 + lambda u^2 + 2b/(p+1) u^{p+1}.
 */
class PhasePortrait {
 public:
  PhasePortrait(double lambda, double p, double b);
  explicit PhasePortrait(const ProblemParams& params);

  double lambda() const { return lambda_; }
  double p() const { return p_; }
  double b() const { return b_; }
  const DerivedConstants& constants() const { return k_; }
  double omega() const { return k_.omega; }
  double u_h() const { return k_.u_h; }

  double energy(double u, double v) const;
  /// E(u, 0).
  double potential(double u) const;
  /// dE(u, 0)/du.
  double potential_slope(double u) const;
  /// e0 - potential(u), the squared speed on level e0.
  double speed_squared(double e0, double u) const;
  /// v_h(u) on [0, u_h].
  double homoclinic_v(double u) const;
  /// Right-hand side of u'' = -lambda u - b u^p.
  double acceleration(double u) const;

  OrbitSlice turning_points(double e0) const;
  /// Slice of the level through (x, 0); x itself is kept as the exact turning point.
  OrbitSlice slice_through(double x) const;

  /**
   * Traversal time int_{u_from}^{u_to} du / sqrt(e0 - E(u, 0)) along the slice.
   * Each half of [m, M] is integrated in the variable w with u = m + w^2
   * (or M - w^2), so endpoints on or near a turning point stay regular.
   */
  double arc_time(const OrbitSlice& slice, double u_from, double u_to,
                  const QuadratureSpec& spec = {}) const;

  /// Half-lap time from x to the opposite turning point (alpha = 0 time map).
  double t1_map(double x) const;
  double tn_map(int n, double x) const;

  /// Exact linearized half period pi / sqrt(lambda (1 - p)).
  double center_half_period() const { return k_.linear_half_period; }

 private:
  // e0 - E(u, 0) expanded around a turning point r with E(r, 0) = e0.
  double speed_squared_near(double r, double u) const;
  double polish_root(double e0, double u, double lo, double hi) const;
  double arc_half(const OrbitSlice& s, double anchor, bool from_below, double u1, double u2,
                  const QuadratureSpec& spec) const;

  double lambda_;
  double p_;
  double b_;
  double kcoef_;  // 2b/(p+1)
  Power pow_p_;
  DerivedConstants k_;
};

/// Options for profile integration.
struct ProfileOptions {
  int grid_size = 1001;
  double rel_tol = 1e-12;
};

/// Integrates -u'' = lambda u + b u^p from (x, 0) over [0, 1] on a uniform grid.
SolutionRecord alpha0_profile(const PhasePortrait& portrait, double x, int j, DomainTag tag,
                              const ProfileOptions& opt = {});

/**
 * All solutions of the alpha = 0 problem: the constant Omega and, for each
 * j = 1..n, the roots of T_j(x) = 1 below and above Omega. Ordered by x.
 */
std::vector<SolutionRecord> solve_alpha0(const ProblemParams& params, const ProfileOptions& opt = {});

}  // namespace supind
