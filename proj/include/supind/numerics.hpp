#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "supind/core.hpp"

namespace supind {

using ScalarFn = std::function<double(double)>;

/// u^e with a multiplication chain for small integral exponents.
class Power {
 public:
  explicit Power(double exponent);
  double exponent() const { return e_; }
  double operator()(double u) const {
    if (n_ > 0) {
      double r = u;
      for (int i = 1; i < n_; ++i) r *= u;
      return r;
    }
    if (n_ == 0) return 1.0;
    return std::pow(u, e_);
  }

 private:
  double e_;
  int n_;  // -1 when the exponent is not a small nonnegative integer
};

enum class EndpointKind { regular, inverse_sqrt };

/// Tolerances and endpoint behaviour for `integrate`.
struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_subdivisions = 4000;
  EndpointKind left = EndpointKind::regular;
  EndpointKind right = EndpointKind::regular;

  QuadratureSpec with_ends(EndpointKind l, EndpointKind r) const {
    QuadratureSpec s = *this;
    s.left = l;
    s.right = r;
    return s;
  }
};

/// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
class QuadratureFailure : public NumericalFailure {
 public:
  QuadratureFailure(double estimate, double error_bound);
  double estimate() const { return estimate_; }
  double error_bound() const { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

/// Bracketing root finder was handed an interval without a sign change.
class NoSignChange : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
};

/**
 * Adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
 *
 * An endpoint flagged `inverse_sqrt` is regularized with u = a + w^2 (or
 * u = b - w^2), which turns a 1/sqrt(u - a) factor into a bounded integrand.
 * When both ends are flagged the interval is split at its midpoint.
 */
QuadratureResult integrate_detailed(const ScalarFn& f, double a, double b,
                                    const QuadratureSpec& spec = {});

double integrate(const ScalarFn& f, double a, double b, const QuadratureSpec& spec = {});

/**
 * Integral of f over [a, +inf) for integrands decaying like xi^-(1 + decay).
 * Uses xi = w^(-1/decay), which maps the tail onto (0, a^-decay] with a
 * bounded integrand. The left endpoint may be flagged inverse_sqrt.
 */
double integrate_to_infinity(const ScalarFn& f, double a, double decay,
                             const QuadratureSpec& spec = {});

/// Brent's method on a sign-changing bracket. Never leaves [lo, hi].
double find_root(const ScalarFn& g, double lo, double hi, double tol);

/// Same as find_root with already known end values.
double find_root(const ScalarFn& g, double lo, double hi, double g_lo, double g_hi, double tol);

/// Value and slope of a scalar function.
using ValueSlopeFn = std::function<std::pair<double, double>(double)>;

/**
 * Newton iteration kept inside a sign-changing bracket, falling back to
 * bisection when a step leaves the bracket or stalls. A non-finite value is
 * read as +inf or -inf on the side of the bracket end it is closest to.
 */
double find_root_newton(const ValueSlopeFn& g, double lo, double hi, double g_lo, double g_hi,
                        double tol);

using Bracket = std::pair<double, double>;

/// Every cell of a uniform n_grid-point grid on [lo, hi] where g changes sign.
std::vector<Bracket> scan_brackets(const ScalarFn& g, double lo, double hi, int n_grid);

/// Sign-change cells of pre-sampled values. Non-finite samples break brackets.
std::vector<std::size_t> sign_change_cells(const std::vector<double>& values);

/// Golden-section search for a minimum of f on [lo, hi]; returns {argmin, min}.
std::pair<double, double> minimize_golden(const ScalarFn& f, double lo, double hi, double tol,
                                          int max_iter = 200);

}  // namespace supind
