/**
 * @file certificates.hpp
 * @brief A-priori error certificates for the truncated Taylor integrator.
 *
 * All bounds are functions of (K, K1, F0, ell, rho, J, h) and the declared
 * perturbation caps only; none of them needs the true solution.
 */
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "taylorcert/ode_core.hpp"
#include "taylorcert/integrator.hpp"
#include "taylorcert/sampler.hpp"

namespace taylorcert {

enum class CertificateKind { Unperturbed, Impulsive, Continuous };

[[nodiscard]] std::string to_string(CertificateKind kind);

struct Feasibility {
  bool h_admissible = true;
  bool lambda_contraction = true;
  bool impulse_cap_ok = true;
  /// J h B(h) <= rho. Reported for every kind, required only by perturbed impulsive certificates.
  bool budget_ok = true;

  friend bool operator==(const Feasibility&, const Feasibility&) = default;
};

struct ErrorCertificate {
  CertificateKind kind = CertificateKind::Unperturbed;

  double rho = 0.0;
  double rho_x = 0.0;
  double epsilon1 = 0.0;
  double epsilon = 0.0;
  double e0_bound = 0.0;
  /// Pseudo-orbit level certified by this certificate.
  double delta = 0.0;

  /// Uniform chain: rho_bar = J h B(h), epsilon1_bar = rho_bar + J g_bar, epsilon_bar = epsilon1_bar + |e0|.
  double rho_bar = 0.0;
  double epsilon1_uniform = 0.0;
  double epsilon_uniform = 0.0;
  bool uniform_tighter = false;

  /// Continuous kind: S = sum h_i lambda_i and U = J h lambda, with the four bounds built on them.
  double contraction_sum = 0.0;
  double contraction_uniform = 0.0;
  double sup_bound = 0.0;
  double deviation_bound = 0.0;
  double sup_bound_uniform = 0.0;
  double deviation_bound_uniform = 0.0;

  Feasibility feasibility;

  // Inputs echo.
  double K = 0.0;
  double K1 = 0.0;
  double F0 = 0.0;
  int ell = 0;
  std::size_t J = 0;
  double h = 0.0;
  double h_bound = 0.0;  ///< closed-form gap bound the h check was made against
  double gbar = 0.0;
  double lambda = 0.0;
  std::vector<double> h_list;
  std::vector<double> gbar_list;
  std::vector<double> lambda_list;

  /// All flags the kind depends on are true.
  [[nodiscard]] bool feasible() const;
  /// epsilon, or for the continuous kind the smaller of the per-point and uniform sup bounds.
  [[nodiscard]] double certified_bound() const;
};

/// Equal in every field except kind.
[[nodiscard]] bool same_bounds(const ErrorCertificate& a, const ErrorCertificate& b);

/// Per-step growth B(h) = sum_{k<=ell} (2^(k+1)/k!) [K^(k+1) r + K1 G_k] r^k
///                      + (h 2^ell/ell!) [K^(ell+2) r + K1 G_(ell+1)] r^ell,
/// with r = rho/2 and G_m = (1 - K^m)/(1 - K).
[[nodiscard]] double segment_growth(const BoundConstants& constants, int ell, double rho, double h);

/// Largest h with J h B(h) <= rho, by bisection. Infinite when B vanishes.
[[nodiscard]] double max_impulsive_step(const BoundConstants& constants, int ell, double rho, std::size_t J);

/// rho in (0, 1) required; throws InvalidArgument otherwise.
[[nodiscard]] ErrorCertificate certify_unperturbed(const BoundConstants& constants, int ell, double rho,
                                                   std::size_t J, double h, double e0);

/// gbar_list may be empty (no impulses), hold one value (broadcast) or J values.
/// Throws CapTooSmall when a nonzero cap is below |e0|.
[[nodiscard]] ErrorCertificate certify_impulsive(const BoundConstants& constants, int ell, double rho,
                                                 std::size_t J, double h, const std::vector<double>& gbar_list,
                                                 double e0);

/// h_list and lambda_list hold one value (broadcast) or J values; gbar_list as for certify_impulsive.
[[nodiscard]] ErrorCertificate certify_continuous(const BoundConstants& constants, int ell, double rho,
                                                  std::size_t J, const std::vector<double>& h_list,
                                                  const std::vector<double>& lambda_list,
                                                  const std::vector<double>& gbar_list, double e0);

/// (rho/2)(1 - K (tJ - t0)); throws InfeasibleBudget when K (tJ - t0) >= 1.
[[nodiscard]] double initial_condition_bound(double K, double t0, double tJ, double rho);

/// Per-segment sups of |d^k f/dy^k| around the sampled states, capped by the chained bound.
struct MikTable {
  /// entries[i][k] for segment i and order k = 0..ell+1.
  std::vector<std::vector<double>> entries;

  [[nodiscard]] double at(std::size_t i, int k) const { return entries.at(i).at(static_cast<std::size_t>(k)); }
};

/// Samples each segment's ball of radius rho/2 around x(t_i) (intersected with the problem box)
/// over [t_i, t_{i+1}] and caps the result with K^k F0 + K1 G_k.
[[nodiscard]] MikTable build_mik_table(const OdeProblem& problem, const BoundConstants& constants,
                                       const Trajectory& trajectory, int ell, double rho, int grid_density = 21);

}  // namespace taylorcert
