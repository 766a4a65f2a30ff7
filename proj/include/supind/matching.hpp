#pragma once

#include <map>
#include <optional>
#include <vector>

#include "supind/core.hpp"
#include "supind/solution.hpp"
#include "supind/superlinear.hpp"
#include "supind/timemaps.hpp"

namespace supind {

/// The center trajectory of a candidate root does not cross Gamma_1 as expected.
class StaleRoot : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

/// A solution of tau_j(x) = 1 - 2 alpha before its profile is built.
struct MatchingRoot {
  double s = 0.0;  ///< departure parameter on Gamma_0
  double x = 0.0;
  int j = 1;
  DomainTag domain = DomainTag::d1;
};

struct EnumerateOptions {
  int scan_points = 400;  ///< uniform points per domain, before endpoint refinement
  ProfileOptions profile{};
  TimeMapOptions maps{};
  bool build_profiles = true;
};

/// Largest crossing index scanned: 2 (band_index + 2).
int scan_j_max(const ProblemParams& params);

/**
 * All roots of tau_j = 1 - 2 alpha, j = 1..j_max, on D1 and D2, and of tau_1 on
 * D3. Sorted by x then j. `density` multiplies the scan grid.
 */
std::vector<MatchingRoot> matching_roots(const TimeMaps& maps, int scan_points, int density = 1);

/**
 * Every solution at fixed alpha with its profile. alpha = 0 is delegated to
 * solve_alpha0.
 */
std::vector<SolutionRecord> enumerate_solutions(const ProblemParams& params, const EnumerateOptions& opt = {});

/**
 * Piecewise profile u_l | u_c | u_r for the root (x, j): the left leg backward
 * from (x, y(x)), the center forward over [alpha, 1 - alpha], the right leg
 * forward to t = 1. Throws StaleRoot when the center part does not reach its
 * j-th Gamma_1 crossing at t = 1 - alpha.
 */
SolutionRecord build_profile(const TimeMaps& maps, double x, int j, DomainTag domain,
                             const ProfileOptions& opt = {});
SolutionRecord build_profile(double x, int j, const ProblemParams& params, int grid_size = 1001);

/// u(1), u'(1) of one shot over [0, 1] with the piecewise weight from (u0, 0).
std::pair<double, double> single_shot(const ProblemParams& params, double u0, double rel_tol = 1e-12);

struct MultiplicitySummary {
  std::size_t total = 0;
  std::map<int, int> per_j;
  std::map<DomainTag, int> per_domain;
  int band = 0;
  int lower_bound = 1;  ///< 2n + 1 below the supplied alpha*, else 1
  bool shortfall = false;
  std::vector<SolutionRecord> records;
};

/**
 * Counts and classifies the solutions at the given alpha and compares with the
 * applicable lower bound. `alpha_star` is the observed multiplicity threshold,
 * when known.
 */
MultiplicitySummary count_and_classify(const ProblemParams& params, std::optional<double> alpha_star = {},
                                       const EnumerateOptions& opt = {});

}  // namespace supind
