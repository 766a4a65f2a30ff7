#pragma once

#include <string>
#include <vector>

namespace supind {

/// Where the Gamma_0 abscissa of a solution sits.
enum class DomainTag {
  d1,            ///< (0, x_t)
  d2,            ///< (x_t, x_h)
  d3,            ///< [x_h, inf)
  tangency,      ///< within 1e-6 Omega of x_t
  center,        ///< alpha = 0 constant solution
  below_center,  ///< alpha = 0, x in (0, Omega)
  above_center,  ///< alpha = 0, x in (Omega, u_h)
};

std::string to_string(DomainTag tag);

struct ProfileSample {
  double t;
  double u;
  double v;
};

struct Residuals {
  double neumann_left = 0.0;     ///< |u'(0)|
  double neumann_right = 0.0;    ///< |u'(1)|
  double energy_drift = 0.0;     ///< max relative drift of E on [alpha, 1 - alpha]
  double interface_u = 0.0;      ///< max jump of u at alpha, 1 - alpha
  double interface_v = 0.0;      ///< max jump of u' at alpha, 1 - alpha
  double oracle_terminal = 0.0;  ///< |u'(1)| of one shot over [0, 1] from (u(0), 0)
  double max_u = 0.0;
  double min_u = 0.0;
};

/// One positive solution, identified by its abscissa x = u(alpha) and crossing index j.
struct SolutionRecord {
  double x = 0.0;
  int j = 0;  ///< 0 for the constant alpha = 0 solution
  DomainTag domain = DomainTag::d1;
  std::vector<ProfileSample> profile;
  Residuals residuals;
};

struct ValidationTolerances {
  double neumann = 1e-6;  ///< relative to max |u|
  double oracle = 1e-5;   ///< relative to max |u|
  double energy = 1e-8;
  double interface = 1e-8;  ///< relative to max(1, max |u|)
};

/// True when the record passes the residual battery.
bool passes_residuals(const SolutionRecord& rec, const ValidationTolerances& tol = {});

}  // namespace supind
