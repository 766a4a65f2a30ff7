#pragma once

#include <stdexcept>
#include <string>

namespace supind {

/// Raised when a problem instance or an operation argument is outside its valid range.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by numerical kernels that cannot reach their tolerance.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Neumann problem  -u'' = lambda u + a(t) u^p,  u'(0) = u'(1) = 0,  with the
 * piecewise constant weight
 *
 *   a(t) = -c_left  on (0, alpha),
 *          b        on [alpha, 1 - alpha],
 *          -c_right on (1 - alpha, 1).
 *
 * The symmetric problem has c_left == c_right. Instances are validated on
 * construction and immutable afterwards.
 */
class ProblemParams {
 public:
  static ProblemParams symmetric(double lambda, double p, double b, double c, double alpha);
  static ProblemParams asymmetric(double lambda, double p, double b, double c_left,
                                  double c_right, double alpha);

  double lambda() const { return lambda_; }
  double p() const { return p_; }
  double b() const { return b_; }
  double c_left() const { return c_left_; }
  double c_right() const { return c_right_; }
  double alpha() const { return alpha_; }
  bool is_symmetric() const { return c_left_ == c_right_; }

  /// Same instance with another alpha (validated).
  ProblemParams with_alpha(double alpha) const;

  std::string describe() const;

 private:
  ProblemParams(double lambda, double p, double b, double c_left, double c_right, double alpha);

  double lambda_;
  double p_;
  double b_;
  double c_left_;
  double c_right_;
  double alpha_;
};

/// Closed-form constants of the positive-weight flow  -u'' = lambda u + b u^p.
struct DerivedConstants {
  double omega;               ///< center abscissa (-lambda/b)^(1/(p-1))
  double u_h;                 ///< largest abscissa of the homoclinic loop
  double omega_energy;        ///< E(omega, 0) < 0
  double linear_half_period;  ///< pi / sqrt(lambda (1 - p))
};

DerivedConstants derive_constants(const ProblemParams& params);
DerivedConstants derive_constants(double lambda, double p, double b);

/// Resonance threshold -(n pi)^2 / (p - 1).
double lambda_threshold(int n, double p);

/// The n with lambda in [lambda_threshold(n+1), lambda_threshold(n)).
int band_index(double lambda, double p);

}  // namespace supind
