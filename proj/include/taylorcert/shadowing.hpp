/**
 * @file shadowing.hpp
 * @brief Pseudo-orbits of the truncated integrator and the search for true
 *        solutions that shadow them.
 */
#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "taylorcert/certificates.hpp"
#include "taylorcert/integrator.hpp"
#include "taylorcert/ode_core.hpp"
#include "taylorcert/sampler.hpp"

namespace taylorcert {

struct PseudoOrbit {
  SamplingSequence sampling;
  /// Post-jump values x(t_0..t_J).
  std::vector<double> samples;
  /// Measured max |y - x|; empty until an error measurement is attached.
  std::optional<double> delta;
  bool perturbed = false;
  std::shared_ptr<const Trajectory> source;
};

/// Wraps `approx` as a pseudo-orbit whose delta is its measured distance to `reference`.
[[nodiscard]] PseudoOrbit make_pseudo_orbit(std::shared_ptr<const Trajectory> approx, const Trajectory& reference);

/// True iff the dense-grid max |y(t) - x(t)| is at most delta. Throws DomainMismatch on differing grids.
[[nodiscard]] bool is_pseudo_orbit(const Trajectory& approx, const Trajectory& reference, double delta);

/// Orbits whose sampling lies in C_{Jh} and whose measured delta is at most `delta`.
[[nodiscard]] std::vector<PseudoOrbit> pseudo_orbit_class(const std::vector<PseudoOrbit>& orbits, std::size_t J,
                                                          double h, double delta);

struct ShadowResult {
  bool found = false;
  double y0_star = 0.0;
  double achieved_error = 0.0;
  double epsilon = 0.0;
  std::size_t evaluations = 0;
};

inline constexpr std::size_t kShadowScanPoints = 33;
inline constexpr double kShadowTolerance = 1e-10;
inline constexpr std::size_t kDefaultShadowBudget = 200;

struct ShadowOptions {
  std::size_t scan_points = kShadowScanPoints;
  double tolerance = kShadowTolerance;
  /// Threads used for the coarse scan; results do not depend on it.
  std::size_t workers = 1;
  /// Oracle used for every objective evaluation. Its lambda must match the approximate orbit's forcing.
  ReferenceOptions reference{kReferenceStepsPerUnit, kDenseIntervals, false, {}};
};

/// phi(y0) = max_t |y(t; y0) - x(t)| over the dense grid of `approx` and its post-jump samples.
[[nodiscard]] double shadow_objective(const OdeProblem& problem, const Trajectory& approx, double y0,
                                      const ReferenceOptions& reference = ShadowOptions{}.reference);

/// Minimizes phi over [x(t_0) - halfwidth, x(t_0) + halfwidth]: a uniform scan, then golden-section
/// refinement on the bracket around the best scan point. Ties go to the smaller y0.
/// found is true iff the minimum is at most epsilon and the scan completed within budget_evals.
[[nodiscard]] ShadowResult shadowing_search(const OdeProblem& problem, const Trajectory& approx, double epsilon,
                                            double search_halfwidth, std::size_t budget_evals = kDefaultShadowBudget,
                                            const ShadowOptions& options = {});

struct ShadowConstraintReport {
  bool certificate_feasible = false;
  bool perturbation_sum_ok = false;  ///< sum g_bar_i < epsilon
  bool per_point = false;            ///< |e0| <= min(eps - rho - sum g_bar_i, (1 - S)/S g_bar)
  bool sufficient = false;           ///< |e0| <= min(eps - rho - J g_bar, (1 - S)/S g_bar)
  bool impulsive = false;            ///< |e0| <= eps - rho - J g_bar
  double per_point_limit = 0.0;
  double sufficient_limit = 0.0;
  double impulsive_limit = 0.0;
  bool holds = false;
};

[[nodiscard]] ShadowConstraintReport shadow_constraint_report(const ErrorCertificate& cert, double epsilon,
                                                              double e0);
/// Conjunction of every clause of shadow_constraint_report.
[[nodiscard]] bool verify_shadow_constraints(const ErrorCertificate& cert, double epsilon, double e0);

}  // namespace taylorcert
