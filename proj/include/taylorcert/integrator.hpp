/**
 * @file integrator.hpp
 * @brief Segment-wise solution of the truncated Taylor equation, the reference
 *        solution of the true equation, and error trajectories.
 *
 * On [t_i, t_{i+1}] the truncated equation is
 *
 *   x' = sum_{k=0}^{ell} f^(k)(x(t_i), t_i) / k! * (x - x(t_i))^k  (+ lambda(t) x)
 *
 * with the coefficients frozen at the left sampling point. The frozen
 * polynomial field is solved as an ODE in its own right on each segment.
 * Impulses attach to the right endpoint: x(t_{i+1}+) = x(t_{i+1}-) + g_{i+1},
 * and the next segment starts from the post-jump value.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "taylorcert/ode_core.hpp"
#include "taylorcert/sampler.hpp"

namespace taylorcert {

using TimeFunction = std::function<double(double)>;

struct PerturbationSpec {
  /// impulses[j] is added at t_{j+1}; indices past the end contribute 0.
  std::vector<double> impulses;
  /// Applied at every sampling point t_1..t_J when impulses is empty.
  std::optional<double> uniform_impulse;
  /// Declared cap g-bar; when absent the largest |impulse| is used.
  std::optional<double> impulse_cap;
  /// Continuous multiplicative forcing lambda(t) y. Empty means none.
  TimeFunction lambda_fn;

  [[nodiscard]] double impulse(std::size_t j) const;
  [[nodiscard]] bool has_impulses() const;
  [[nodiscard]] bool has_lambda() const { return static_cast<bool>(lambda_fn); }
  [[nodiscard]] double effective_cap() const;
  /// Per-segment impulse caps g-bar_i = |g_{i+1}| for J segments.
  [[nodiscard]] std::vector<double> impulse_caps(std::size_t J) const;
  /// lambda_i = max of lambda over [t_i, t_{i+1}], sampled on `samples` + 1 points per segment.
  [[nodiscard]] std::vector<double> lambda_caps(const SamplingSequence& seq, std::size_t samples = 1000) const;
  /// Throws InvalidArgument when an impulse exceeds the declared cap.
  void validate() const;
};

/// Dense solution of a scalar ODE on one interval, stored at RK4 nodes with
/// cubic Hermite interpolation in between.
class NodeSolution {
 public:
  NodeSolution() = default;
  NodeSolution(double t_start, double t_end, std::vector<double> values, std::vector<double> slopes);

  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] std::size_t steps() const noexcept { return values_.empty() ? 0 : values_.size() - 1; }
  [[nodiscard]] double node(std::size_t k) const { return values_.at(k); }
  [[nodiscard]] double t_start() const noexcept { return t_start_; }
  [[nodiscard]] double t_end() const noexcept { return t_end_; }

 private:
  double t_start_ = 0.0;
  double t_end_ = 0.0;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

/// Classical fourth-order Runge-Kutta with `steps` equal steps on [t_start, t_end].
/// Throws BlowUp when the state becomes non-finite.
[[nodiscard]] NodeSolution rk4_solve(const std::function<double(double, double)>& rhs, double t_start,
                                     double t_end, double x_start, std::size_t steps);

/// Time of the j-th of `intervals` equal sub-intervals of [t_start, t_end]; j = intervals gives t_end exactly.
[[nodiscard]] double dense_time(double t_start, double t_end, std::size_t j, std::size_t intervals);

inline constexpr std::size_t kDenseIntervals = 1000;
inline constexpr std::size_t kFlowSubsteps = 10000;
inline constexpr std::size_t kReferenceStepsPerUnit = 100000;
inline constexpr double kDegenerateLinearCoefficient = 1e-14;
inline constexpr double kOracleFlagThreshold = 1e-9;
inline constexpr double kOracleFailThreshold = 1e-6;

struct FlowOptions {
  std::size_t substeps = kFlowSubsteps;
  std::size_t dense_intervals = kDenseIntervals;
  TimeFunction lambda;
};

/// Solution of the frozen-coefficient truncated field on one segment.
class LocalFlow {
 public:
  enum class Method { Linear, Exponential, Stepped };

  [[nodiscard]] double operator()(double t) const;
  /// Values at dense_time(t_start, t_end, j, intervals) for j = 0..intervals.
  [[nodiscard]] std::vector<double> sample(std::size_t intervals) const;
  [[nodiscard]] Method method() const noexcept { return method_; }
  [[nodiscard]] double t_start() const noexcept { return t_start_; }
  [[nodiscard]] double t_end() const noexcept { return t_end_; }
  [[nodiscard]] double end_value() const;

 private:
  friend LocalFlow local_flow(const DerivativeStack&, double, const FlowOptions&);

  Method method_ = Method::Linear;
  double t_start_ = 0.0;
  double t_end_ = 0.0;
  double x_start_ = 0.0;
  double a0_ = 0.0;
  double a1_ = 0.0;
  NodeSolution nodes_;
};

/// Solves x' = sum_k coeffs[k]/k! (x - x_i)^k (+ lambda(t) x) from (x_i, t_i) = stack base point.
/// ell = 0 and ell = 1 without forcing use closed forms; everything else is sub-stepped.
[[nodiscard]] LocalFlow local_flow(const DerivativeStack& stack, double t_end, const FlowOptions& options = {});

enum class TrajectoryOrigin { Truncated, Reference, Error };

struct TrajectorySegment {
  std::vector<double> times;
  std::vector<double> values;
};

struct ErrorStats {
  double max_abs = 0.0;                ///< max_t |e(t)|
  double max_sample_increment = 0.0;   ///< max_i |e(t_{i+1}) - e(t_i)|
  double max_drift = 0.0;              ///< max_t |e(t) - e(t_0)|
  double max_segment_deviation = 0.0;  ///< max_i sup_{[t_i, t_{i+1}]} |e(t) - e(t_i)|
};

struct Trajectory {
  TrajectoryOrigin origin = TrajectoryOrigin::Truncated;
  SamplingSequence sampling;
  std::vector<TrajectorySegment> segments;
  /// Values at t_0..t_J after any jump.
  std::vector<double> sample_values;
  /// jumps[i] is the jump applied at t_{i+1}.
  std::vector<double> jumps;
  bool has_jumps = false;

  /// Reference only: Richardson estimate of the relative error at sampling points.
  double oracle_error_estimate = 0.0;
  bool oracle_flagged = false;

  /// Error trajectories only.
  std::optional<ErrorStats> error_stats;

  /// max |value| over the dense grid and the post-jump samples.
  [[nodiscard]] double sup_abs() const;
};

struct IntegrationOptions {
  std::size_t dense_intervals = kDenseIntervals;
  std::size_t substeps = kFlowSubsteps;
};

struct ReferenceOptions {
  std::size_t steps_per_unit = kReferenceStepsPerUnit;
  std::size_t dense_intervals = kDenseIntervals;
  bool richardson = true;
  TimeFunction lambda;
};

[[nodiscard]] Trajectory integrate_truncated(const OdeProblem& problem, const SamplingSequence& seq, int ell,
                                             double x0, const PerturbationSpec* perturbation = nullptr,
                                             const IntegrationOptions& options = {});

/// Reference solution of y' = f(y, t) (+ lambda(t) y) on the dense grid of `seq`.
/// Throws OracleUnreliable when the Richardson estimate exceeds 1e-6.
[[nodiscard]] Trajectory integrate_reference(const OdeProblem& problem, double y0, const SamplingSequence& seq,
                                             const ReferenceOptions& options = {});
/// Single-segment reference on [t0, tJ].
[[nodiscard]] Trajectory integrate_reference(const OdeProblem& problem, double y0,
                                             const ReferenceOptions& options = {});

/// e(t) = y(t) - x(t) on the common grid. Throws DomainMismatch when the grids differ.
[[nodiscard]] Trajectory error_trajectory(const Trajectory& true_traj, const Trajectory& approx_traj);

/// Per segment, max over the dense grid of |v(t) - v(t_i+)|.
[[nodiscard]] std::vector<double> segment_excursions(const Trajectory& trajectory);

/// Stateful probe for build_sampling that advances the truncated flow (with its
/// perturbations) and the true flow together and reports the larger of their
/// deviations from the current sampling point.
class JointFlowProbe {
 public:
  enum class Track { Approximate, True, Joint };

  JointFlowProbe(OdeProblem problem, int ell, double x0, double y0, PerturbationSpec perturbation = {},
                 IntegrationOptions integration = {}, ReferenceOptions reference = {}, Track track = Track::Joint);

  std::function<double(double)> operator()(std::size_t index, double t_start, double t_end) const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

}  // namespace taylorcert
