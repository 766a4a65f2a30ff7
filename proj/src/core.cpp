#include "supind/core.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace supind {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidParameter(what);
}

}  // namespace

ProblemParams::ProblemParams(double lambda, double p, double b, double c_left, double c_right,
                             double alpha)
    : lambda_(lambda), p_(p), b_(b), c_left_(c_left), c_right_(c_right), alpha_(alpha) {
  require(std::isfinite(lambda) && lambda < 0.0, "lambda must be finite and negative");
  require(std::isfinite(p) && p > 1.0, "p must be finite and greater than 1");
  require(std::isfinite(b) && b > 0.0, "b must be finite and positive");
  require(std::isfinite(c_left) && c_left > 0.0, "c_left must be finite and positive");
  require(std::isfinite(c_right) && c_right > 0.0, "c_right must be finite and positive");
  require(std::isfinite(alpha) && alpha >= 0.0 && alpha < 0.5, "alpha must lie in [0, 1/2)");
}

ProblemParams ProblemParams::symmetric(double lambda, double p, double b, double c,
                                       double alpha) {
  return {lambda, p, b, c, c, alpha};
}

ProblemParams ProblemParams::asymmetric(double lambda, double p, double b, double c_left,
                                        double c_right, double alpha) {
  return {lambda, p, b, c_left, c_right, alpha};
}

ProblemParams ProblemParams::with_alpha(double alpha) const {
  return {lambda_, p_, b_, c_left_, c_right_, alpha};
}

std::string ProblemParams::describe() const {
  std::ostringstream os;
  os.precision(15);
  os << "lambda=" << lambda_ << " p=" << p_ << " b=" << b_;
  if (is_symmetric()) {
    os << " c=" << c_left_;
  } else {
    os << " c_left=" << c_left_ << " c_right=" << c_right_;
  }
  os << " alpha=" << alpha_;
  return os.str();
}

DerivedConstants derive_constants(double lambda, double p, double b) {
  require(lambda < 0.0 && p > 1.0 && b > 0.0, "derive_constants: invalid lambda, p or b");
  DerivedConstants d{};
  d.omega = std::pow(-lambda / b, 1.0 / (p - 1.0));
  d.u_h = d.omega * std::pow((p + 1.0) / 2.0, 1.0 / (p - 1.0));
  d.omega_energy = lambda * d.omega * d.omega + 2.0 * b / (p + 1.0) * std::pow(d.omega, p + 1.0);
  d.linear_half_period = std::numbers::pi / std::sqrt(lambda * (1.0 - p));
  return d;
}

DerivedConstants derive_constants(const ProblemParams& params) {
  return derive_constants(params.lambda(), params.p(), params.b());
}

double lambda_threshold(int n, double p) {
  require(n >= 0, "lambda_threshold: n must be nonnegative");
  require(p > 1.0, "lambda_threshold: p must exceed 1");
  const double npi = n * std::numbers::pi;
  return -(npi * npi) / (p - 1.0);
}

int band_index(double lambda, double p) {
  require(lambda < 0.0, "band_index: lambda must be negative");
  require(p > 1.0, "band_index: p must exceed 1");
  // lambda in [lambda_{n+1}, lambda_n)  <=>  n < sqrt(-lambda (p-1)) / pi <= n + 1
  int n = static_cast<int>(std::ceil(std::sqrt(-lambda * (p - 1.0)) / std::numbers::pi)) - 1;
  if (n < 0) n = 0;
  // Settle ties against the thresholds exactly as computed by lambda_threshold.
  while (lambda < lambda_threshold(n + 1, p)) ++n;
  while (n > 0 && lambda >= lambda_threshold(n, p)) --n;
  return n;
}

}  // namespace supind
