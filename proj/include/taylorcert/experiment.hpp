/**
 * @file experiment.hpp
 * @brief Config-driven experiments: run, certify, shadow and sweep, with
 *        deterministic JSON reports and CSV exports.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "taylorcert/certificates.hpp"
#include "taylorcert/integrator.hpp"
#include "taylorcert/ode_core.hpp"
#include "taylorcert/sampler.hpp"
#include "taylorcert/shadowing.hpp"

namespace taylorcert {

struct FieldSpec {
  std::string name = "logistic";
  std::vector<double> coeffs;  ///< polynomial only
  double a = -1.0;             ///< affine slope
  double b = 0.0;              ///< affine offset
  double c = 0.0;              ///< constant value
  double q = 1.0;              ///< riccati coefficient
  double damping = 1.0;
  double amplitude = 1.0;
  double frequency = 1.0;
  double scale = 1.0;  ///< bounded_sine

  [[nodiscard]] Field build() const;
};

enum class SamplingMode { Auto, Uniform, Explicit };

struct ExperimentConfig {
  FieldSpec field;
  double t0 = 0.0;
  double tJ = 1.0;
  double y0 = 0.5;
  double theta = 0.5;
  int n = 8;

  int ell = 1;
  double rho = 0.3;
  std::optional<double> rho_x;

  SamplingMode sampling_mode = SamplingMode::Auto;
  std::optional<double> h;
  std::optional<std::size_t> J;
  std::vector<double> points;

  std::optional<double> x0;  ///< defaults to y0

  std::optional<double> impulse;  ///< applied at every t_1..t_J
  std::vector<double> impulses;
  std::optional<double> impulse_cap;
  double lambda = 0.0;  ///< constant continuous forcing

  int grid_density = kDefaultGridDensity;
  std::optional<double> K;
  std::optional<double> K1;
  std::optional<double> F0;

  std::size_t oracle_steps_per_unit = kReferenceStepsPerUnit;
  std::size_t dense_intervals = kDenseIntervals;
  bool richardson = true;

  std::optional<double> shadow_epsilon;
  double shadow_halfwidth = 0.1;
  std::size_t shadow_budget = kDefaultShadowBudget;

  std::vector<int> sweep_ell;
  std::vector<double> sweep_rho;
  std::vector<double> sweep_h;
  std::vector<double> sweep_gbar;
  std::vector<double> sweep_lambda;
  std::size_t sweep_random = 0;

  std::string output_dir = "taylorcert_out";
  std::size_t workers = 1;
  std::uint64_t seed = 0;

  [[nodiscard]] OdeProblem problem() const;
  [[nodiscard]] PerturbationSpec perturbation() const;
  [[nodiscard]] double initial_x() const { return x0.value_or(y0); }
  /// Throws Config for inconsistent settings (ell > n, missing sampling data, bad ranges).
  void validate() const;
};

/// Parses a JSON config document. Unknown keys are rejected. Throws Config.
[[nodiscard]] ExperimentConfig parse_config(const std::string& json_text);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);
/// Resolved config as JSON text (every field, defaults included).
[[nodiscard]] std::string config_to_json(const ExperimentConfig& config, int indent = 2);

struct SamplingPlan {
  SamplingSequence sequence;
  double A_value = 0.0;
  double A_x = 0.0;
  double A_x_alternate = 0.0;
  double A_x0 = 0.0;
  HBound h_bound;
  std::size_t budget_J = 0;  ///< J the closed-form bound was evaluated at
  std::vector<double> exit_thresholds;
  std::size_t rebuilds = 0;
};

struct RunResult {
  ExperimentConfig config;
  OdeProblem problem;
  BoundConstants constants;
  SamplingPlan plan;
  Trajectory truncated;
  Trajectory reference;
  Trajectory error;
  std::vector<double> x_excursions;
  std::vector<double> y_excursions;
};

struct CertifyResult {
  RunResult run;
  ErrorCertificate certificate;
  std::string verdict;  ///< "sound", "unsound" or "not-certified"
  double measured_max_error = 0.0;
  double measured_segment_deviation = 0.0;
};

struct ShadowOutcome {
  CertifyResult certified;
  ShadowResult shadow;
  ShadowConstraintReport constraints;
  double epsilon = 0.0;
  double reevaluated_error = 0.0;
};

/// Estimates constants (or takes the overrides) on the problem box and window.
[[nodiscard]] BoundConstants resolve_constants(const ExperimentConfig& config, const OdeProblem& problem);

/// Sampling for the configured mode. Auto mode grows J until the greedy
/// construction fits inside the closed-form bound evaluated at that J.
[[nodiscard]] SamplingPlan plan_sampling(const ExperimentConfig& config, const OdeProblem& problem,
                                         const BoundConstants& constants);

[[nodiscard]] RunResult run_experiment(const ExperimentConfig& config);
[[nodiscard]] ErrorCertificate certificate_for(const RunResult& run);
[[nodiscard]] CertifyResult certify_experiment(const ExperimentConfig& config);
[[nodiscard]] ShadowOutcome shadow_experiment(const ExperimentConfig& config);

struct SweepRow {
  std::size_t index = 0;
  int ell = 0;
  double rho = 0.0;
  std::optional<double> h;
  double gbar = 0.0;
  double lambda = 0.0;
  std::string status = "ok";  ///< "ok" or the error kind name
  std::string message;
  std::size_t J = 0;
  double envelope = 0.0;
  std::string kind;
  bool feasible = false;
  double certified = 0.0;
  double measured = 0.0;
  std::string verdict;
  bool shadow_found = false;
  double shadow_error = 0.0;
  bool shadow_constraints = false;
};

/// Cartesian grid over (ell, rho, h, gbar, lambda) plus `sweep_random` seeded draws.
[[nodiscard]] std::vector<ExperimentConfig> sweep_points(const ExperimentConfig& config);
[[nodiscard]] std::vector<SweepRow> sweep_experiment(const ExperimentConfig& config);

// Reports. All writers produce byte-identical output for identical inputs.
[[nodiscard]] std::string run_report_json(const RunResult& run);
[[nodiscard]] std::string certify_report_json(const CertifyResult& result);
[[nodiscard]] std::string shadow_report_json(const ShadowOutcome& outcome);
[[nodiscard]] std::string sweep_report_json(const ExperimentConfig& config, const std::vector<SweepRow>& rows);
[[nodiscard]] std::string certificate_json(const ErrorCertificate& cert, int indent = 2);

[[nodiscard]] std::string trajectory_csv(const Trajectory& trajectory);
[[nodiscard]] std::string sampling_csv(const SamplingSequence& sequence);
[[nodiscard]] std::string pseudo_orbit_csv(const Trajectory& trajectory);
[[nodiscard]] std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Writes run_report.json, sampling.csv and trajectories/{truncated,reference,error}.csv.
void write_run_outputs(const RunResult& run, const std::string& report_json, const std::filesystem::path& dir);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace taylorcert
