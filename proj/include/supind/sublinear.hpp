#pragma once

#include <memory>
#include <vector>

#include "supind/core.hpp"
#include "supind/numerics.hpp"

namespace supind {

/// Left: the curve reached at t = alpha from (s, 0). Right: its mirror (x, -y).
enum class Orientation { left, right };

/// Requested shooting height lies at or beyond the blow-up threshold.
class BeyondBlowUp : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

/// Coefficients of  u'' = -lambda u + c u^p  on a negative-weight interval.
struct SublinearField {
  double lambda;
  double p;
  double c;
};

/// F(u; s) = -lambda (u^2 - s^2) + 2c/(p+1) (u^{p+1} - s^{p+1}), so that v^2 = F along the orbit from (s, 0).
double sublinear_energy(const SublinearField& f, double u, double s);

/**
 * Time for the solution from (s, 0) to blow up:
 *   T(s) = int_1^inf dxi / sqrt(-lambda (xi^2 - 1) + 2c/(p+1) s^{p-1} (xi^{p+1} - 1)).
 */
double blowup_time(const SublinearField& f, double s, const QuadratureSpec& spec = {});

/// The s with blowup_time(s) = alpha; +infinity for alpha = 0.
double s_infinity(const SublinearField& f, double alpha);

/// Shooting endpoint (x, y) = (u_s(alpha), u_s'(alpha)) and its s-derivatives.
struct ShotState {
  double s = 0.0;
  double x = 0.0;
  double y = 0.0;
  double x_s = 0.0;
  double y_s = 0.0;
};

struct ShootOptions {
  double rel_tol = 1e-12;
  double blow_up_cap = 1e8;     ///< on u, already scaled
  double energy_check = 1e-8;   ///< relative bound on |y^2 - F(x; s)|
};

/**
 * Integrates u'' = -lambda u + c u^p from (s, 0) over [0, alpha] together with
 * the variational equation for du/ds. Throws BeyondBlowUp when the solution
 * escapes the cap before alpha.
 */
ShotState shoot(const SublinearField& f, double s, double alpha, const ShootOptions& opt = {});

/**
 * Shooting curve {(x, y(x)) : x >= 0} at t = alpha (left orientation), or its
 * reflection {(x, -y(x))} (right orientation).
 *
 * Points are found by inverting the increasing map s -> x(s) on (0, s_inf).
 * Copies share one guarded sample table; the table only seeds brackets.
 */
class GammaCurve {
 public:
  GammaCurve(SublinearField field, double alpha, Orientation orientation = Orientation::left,
             double scale = 1.0);

  /// Curve for the left interval (c_left) of a problem.
  static GammaCurve left_of(const ProblemParams& params);
  /// Reflected curve for the right interval (c_right) of a problem.
  static GammaCurve right_of(const ProblemParams& params);

  const SublinearField& field() const { return field_; }
  double alpha() const { return alpha_; }
  Orientation orientation() const { return orientation_; }
  double scale() const { return scale_; }
  double s_infinity() const { return s_inf_; }
  /// sqrt(-lambda) tanh(sqrt(-lambda) alpha), signed by orientation.
  double slope_at_zero() const;

  GammaCurve reflected() const;

  /// Unsigned shot from height s (always the left-orientation values).
  ShotState shoot(double s) const;
  /// Same as shoot but x = +inf instead of throwing when s is past the threshold.
  ShotState shoot_or_escape(double s) const;
  /// s with x(s) = x.
  double s_of_x(double x) const;

  struct Point {
    double s;
    double x;
    double y;      ///< signed by orientation
    double dy_dx;  ///< signed by orientation
  };
  Point at_x(double x) const;
  /// Point of the curve for the shot from s, signed by orientation.
  Point at_s(double s) const;

  double eval_y(double x) const;
  double eval_dy_dx(double x) const;

  /// Memoized (s, x, y) samples sorted by s, for plotting.
  std::vector<ShotState> samples() const;

 private:
  struct Table;
  const std::vector<ShotState>& table() const;
  double linear_cutoff() const;

  SublinearField field_;
  double alpha_;
  Orientation orientation_;
  double scale_;
  double s_inf_;
  ShootOptions shoot_opt_;
  std::shared_ptr<Table> table_;
};

}  // namespace supind
