#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "supind/core.hpp"
#include "supind/matching.hpp"

namespace supind {

/// The critical value does not exist for these parameters (legitimate absence).
class CriticalNotPresent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * A critical alpha. Odd index 2j+1: bifurcation point, zero of
 * tau_{2j+1}(x_t(alpha), alpha) - (1 - 2 alpha). Even index 2j: turning point,
 * zero of min_x Theta_j(x, alpha) - (1 - 2 alpha).
 */
struct CriticalValue {
  int index = 1;
  double alpha = 0.0;
  double x = 0.0;         ///< x_t(alpha) for odd indices, the minimizer for even ones
  double residual = 0.0;  ///< defining equation at alpha
  std::vector<double> other_crossings;  ///< later sign changes on the scan grid
};

struct CriticalAlphas {
  std::vector<CriticalValue> odd;   ///< alpha_1, alpha_3, ...
  std::vector<CriticalValue> even;  ///< alpha_2, alpha_4, ...
};

struct CriticalScanOptions {
  int points = 200;
  double lo = 0.002;
  double hi = 0.498;
  int theta_points = 200;  ///< x scan for the inner minimum of Theta_j
  TimeMapOptions maps{};
};

/// tau_{2j+1}(x_t(alpha), alpha) - (1 - 2 alpha).
double odd_critical_function(int j, const TimeMaps& maps);
/// min over (0, x_h) of Theta_j - (1 - 2 alpha), with the minimizer.
std::pair<double, double> even_critical_function(int j, const TimeMaps& maps, int theta_points = 200);

CriticalValue detect_odd_critical(int j, const ProblemParams& params, const CriticalScanOptions& opt = {});
CriticalValue detect_even_critical(int j, const ProblemParams& params, const CriticalScanOptions& opt = {});
/// Every odd critical with 2j+1 <= n and every even one with 2j <= n, n = band_index.
CriticalAlphas detect_criticals(const ProblemParams& params, const CriticalScanOptions& opt = {});

/// Number of sign changes of Theta_j - (1 - 2 alpha) over (0, x_h).
int theta_root_count(int j, const ProblemParams& params, int theta_points = 400);

struct BranchSample {
  double alpha = 0.0;
  double x = 0.0;
  int j = 1;
  DomainTag domain = DomainTag::d1;
  bool validated = false;  ///< passed the matching residual battery
};

enum class BranchEnd { reaches_alpha0, joins_bifurcation, turning_point, principal_tail, grid_end, open };

std::string to_string(BranchEnd e);

struct Branch {
  std::vector<BranchSample> samples;  ///< alpha strictly increasing
  BranchEnd start = BranchEnd::open;
  BranchEnd end = BranchEnd::open;
  int component = -1;
};

enum class DiagramCase { n0, n1, odd, even };

std::string to_string(DiagramCase c);

struct AlphaGridSpec {
  int points = 200;
  double lo = 0.002;
  double hi = 0.498;
  int refine_factor = 10;
  double window = 0.01;  ///< half width of the refined window around each critical
  std::vector<double> extra = {0.40, 0.45, 0.49};
  int scan_points = 400;
  bool validate = true;  ///< build and check a profile for every sample
  int profile_grid = 201;
  TimeMapOptions maps{};
};

struct BifurcationDiagram {
  explicit BifurcationDiagram(const ProblemParams& p) : params(p) {}

  ProblemParams params;
  std::vector<double> alphas;
  std::vector<Branch> branches;
  CriticalAlphas criticals;
  int components = 0;
  int principal = -1;  ///< branch index
  bool principal_grows = false;  ///< x(0.49) > x(0.45) > x(0.40) on the principal branch
  int band = 0;
  DiagramCase diagram_case = DiagramCase::n0;
  int expected_components = 1;  ///< minimal pattern
  int bifurcation_joins = 0;
  int turning_joins = 0;
  bool pattern_realized = false;
  bool split_from_symmetric = false;  ///< asymmetric: fewer bifurcation joins than odd criticals of the symmetric case
  std::size_t unvalidated = 0;
  std::vector<std::string> warnings;

  /// Total solution count at grid level i.
  std::size_t count_at(std::size_t level) const;
};

/// Grid of the sweep: uniform points, refined windows, extra points; sorted, unique.
std::vector<double> sweep_alphas(const AlphaGridSpec& spec, const CriticalAlphas& criticals);

/// Links per-level root sets into alpha-monotone branches and groups them into components.
void link_branches(BifurcationDiagram& diagram, const std::vector<std::vector<BranchSample>>& levels);

BifurcationDiagram sweep_diagram(const ProblemParams& params, const AlphaGridSpec& spec = {});
BifurcationDiagram asymmetric_sweep(const ProblemParams& params, const AlphaGridSpec& spec = {});

/**
 * Level-wise Hausdorff distance between the branch samples of two diagrams,
 * in the relative metric |x - x'| / max(1, |x|), over the common alpha levels
 * farther than `exclude` from every critical of `a`.
 */
double restricted_hausdorff(const BifurcationDiagram& a, const BifurcationDiagram& b, double exclude);

}  // namespace supind
