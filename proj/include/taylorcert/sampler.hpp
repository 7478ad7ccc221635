/**
 * @file sampler.hpp
 * @brief Admissible non-uniform sampling sequences.
 *
 * Inter-sample gaps are capped by two closed-form terms built from the
 * aggregate growth constant A (or A_x) and by the first time at which the
 * tracked flows leave a ball of radius rho/2 around their last sampled value.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "taylorcert/ode_core.hpp"

namespace taylorcert {

/// Strictly increasing sampling points t_0 < ... < t_J.
class SamplingSequence {
 public:
  SamplingSequence() = default;

  /// Throws InvalidArgument unless there are at least two strictly increasing finite points.
  static SamplingSequence from_points(std::vector<double> points);
  static SamplingSequence uniform(double t0, double tJ, std::size_t J);

  [[nodiscard]] const std::vector<double>& points() const noexcept { return points_; }
  /// Number of gaps J.
  [[nodiscard]] std::size_t count() const noexcept { return points_.empty() ? 0 : points_.size() - 1; }
  [[nodiscard]] double gap(std::size_t i) const { return points_.at(i + 1) - points_.at(i); }
  [[nodiscard]] std::vector<double> gaps() const;
  [[nodiscard]] double envelope() const;
  [[nodiscard]] double front() const { return points_.front(); }
  [[nodiscard]] double back() const { return points_.back(); }

  friend bool operator==(const SamplingSequence&, const SamplingSequence&) = default;

 private:
  explicit SamplingSequence(std::vector<double> points) : points_(std::move(points)) {}
  std::vector<double> points_;
};

enum class AggregateMode {
  Approx,        ///< A_x: sum over k = 0..ell
  True,          ///< A: sum over k = 0..ell+1
  ApproxZeroK1,  ///< A_x0: sum over k = 0..ell of K^k F0 / k!
};

/// sum_k (1/k!) (K^k F0 + K1 (1 - K^k)/(1 - K)) over the range selected by mode.
/// Throws ConstantsInfeasible for K >= 1 with K1 > 0.
[[nodiscard]] double compute_aggregate(const BoundConstants& constants, int ell, AggregateMode mode);

/// Alternative typesetting of A_x, where K1 enters once as K1 (1 - K^(ell+1)) / (1 - K).
/// Reported next to the canonical value; never used for certification.
[[nodiscard]] double compute_aggregate_alternate(const BoundConstants& constants, int ell);

struct HBound {
  double saturation = 0.0;    ///< (1 - r) / (A G), r = rho/2, G = sum_{k<=ell} r^k
  double accumulation = 0.0;  ///< r / (A G (J - 1 + r))
  double printed = 0.0;       ///< min of the two closed-form terms
  double solved = 0.0;        ///< largest h satisfying the deviation recursion, found by bisection
  double value = 0.0;         ///< min(printed, solved)
};

/// Closed-form cap on the inter-sample gap together with the numerically solved
/// deviation recursion (J-1) h A G / (1 - h A G) <= r, 1 - h A G > 0.
/// Requires rho in (0, 2), A > 0, J >= 1.
[[nodiscard]] HBound closed_form_h_bound_detail(double A_value, int ell, double rho, std::size_t J);
[[nodiscard]] double closed_form_h_bound(double A_value, int ell, double rho, std::size_t J);

inline constexpr std::size_t kExitScanPoints = 10000;
inline constexpr double kExitTolerance = 1e-10;
inline constexpr double kStepCollapse = 1e-12;

/// First t in (t_start, t_max] with |traj(t) - traj(t_start)| >= half_budget, located
/// by a uniform scan followed by bisection. Returns the last time known to be
/// inside the ball, or t_max when the trajectory never leaves it.
[[nodiscard]] double first_exit(const std::function<double(double)>& trajectory, double t_start,
                                double half_budget, double t_max, std::size_t scan_points = kExitScanPoints,
                                double tolerance = kExitTolerance);

struct StepBudget {
  double rho = 0.5;
  double rho_x = 0.5;
  int ell = 0;
  double A_value = 0.0;
  double closed_form_bound = 0.0;
  std::vector<double> exit_thresholds;  ///< c_i recorded by build_sampling
};

/// Budget for J gaps: A from the true-mode aggregate and the matching gap cap.
/// A zero aggregate (zero field) leaves the gap uncapped.
[[nodiscard]] StepBudget make_step_budget(const BoundConstants& constants, int ell, double rho, std::size_t J);

/// Called once per step with (index i, t_i, t_end). Returns d(t) >= 0 on [t_i, t_end],
/// the joint deviation of the tracked flows from their values at t_i. Successive
/// calls always start where the previous accepted gap ended.
using SegmentProbe = std::function<std::function<double(double)>(std::size_t, double, double)>;

/// Greedy forward construction: h_i = min(closed_form_bound, c_i - t_i, tJ - t_i) where
/// c_i is the first exit of the probe deviation from the ball of radius rho/2.
/// The exit thresholds c_i are recorded in budget.exit_thresholds.
/// Throws StepCollapse when a gap falls below 1e-12.
[[nodiscard]] SamplingSequence build_sampling(const OdeProblem& problem, StepBudget& budget,
                                              const SegmentProbe& probe);

/// True iff seq has exactly J gaps, each at most h.
[[nodiscard]] bool class_membership(const SamplingSequence& seq, std::size_t J, double h);

}  // namespace taylorcert
