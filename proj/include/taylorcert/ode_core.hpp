/**
 * @file ode_core.hpp
 * @brief Scalar ODE problems, state-derivative stacks and growth constants.
 *
 * A problem is y' = f(y, t) on the box [y0 - theta, y0 + theta] x [t0, tJ].
 * Derivatives are always partial derivatives in the state argument with the
 * time argument frozen; time only enters through the point of evaluation.
 */
#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace taylorcert {

/// f(y, t) = sum_k coeffs[k] * y^k. Covers the zero, constant, affine,
/// logistic and Riccati built-ins.
struct PolynomialField {
  std::vector<double> coeffs;
};

/// f(y, t) = -damping * y + amplitude * sin(frequency * t).
struct DampedDrivenField {
  double damping = 1.0;
  double amplitude = 1.0;
  double frequency = 1.0;
};

/// f(y, t) = scale * sin(y).
struct BoundedSineField {
  double scale = 1.0;
};

/// Right-hand side of a scalar ODE with analytic state derivatives of every order.
class Field {
 public:
  using Model = std::variant<PolynomialField, DampedDrivenField, BoundedSineField>;

  Field();  // zero field

  static Field zero();
  static Field constant(double c);
  static Field affine(double a, double b);
  static Field logistic();
  static Field riccati(double q = 1.0);
  static Field polynomial(std::vector<double> coeffs);
  static Field damped_driven(double damping = 1.0, double amplitude = 1.0, double frequency = 1.0);
  static Field bounded_sine(double scale);

  [[nodiscard]] double value(double y, double t) const;
  /// k-th partial derivative in y at (y, t); k = 0 is the value itself.
  [[nodiscard]] double derivative(int k, double y, double t) const;

  /// Degree in y when the field is polynomial in the state, -1 otherwise.
  [[nodiscard]] int polynomial_degree() const;

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] const Model& model() const noexcept { return model_; }

 private:
  Field(std::string name, Model model);

  std::string name_;
  Model model_;
};

struct OdeProblem {
  Field field;
  int smoothness_order = 8;
  double t0 = 0.0;
  double tJ = 1.0;
  double y0 = 0.0;
  double theta = 0.5;

  /// Throws InvalidArgument when tJ <= t0, theta < 0, n < 0 or y0 is not finite.
  void validate() const;

  [[nodiscard]] double window() const noexcept { return tJ - t0; }
  [[nodiscard]] double y_min() const noexcept { return y0 - theta; }
  [[nodiscard]] double y_max() const noexcept { return y0 + theta; }
};

struct DerivativeStack {
  double y = 0.0;
  double t = 0.0;
  std::vector<double> coeffs;  // coeffs[k] = d^k f / dy^k at (y, t)

  [[nodiscard]] int order() const noexcept { return static_cast<int>(coeffs.size()) - 1; }
};

/// Growth constants of the field on the problem box.
struct BoundConstants {
  double K = 0.0;
  double K1 = 0.0;
  double F0 = 0.0;
  /// Sampled sup norms S_j of the j-th state derivative, j = 0..k_max.
  std::vector<double> derivative_sups;

  /// K^k F0 + K1 (1 - K^k) / (1 - K): the chained bound on the k-th derivative sup.
  [[nodiscard]] double chained_bound(int k) const;
};

/// sum_{i=0}^{terms-1} ratio^i, well defined at ratio = 1.
[[nodiscard]] double geometric_sum(double ratio, int terms);

[[nodiscard]] double factorial(int k);

/// f(y, t); throws NumericalDomain on a non-finite result.
[[nodiscard]] double eval_field(const OdeProblem& problem, double y, double t);

/// Derivatives 0..k_max of f in the state at (y, t). Throws Order when k_max exceeds
/// the problem's smoothness order.
[[nodiscard]] DerivativeStack eval_derivatives(const OdeProblem& problem, double y, double t, int k_max);

inline constexpr int kDefaultGridDensity = 101;
inline constexpr int kGrowthCandidateCount = 1000;

/// Grid estimate of (K, K1, F0). The sup norms come from a uniform
/// grid_density x grid_density sampling of the box, so the result is heuristic.
///
/// K1 = 0 is preferred whenever it is feasible, with K = max_j S_j / S_{j-1}.
/// Otherwise K is scanned over {0, 1/1000, ..., 999/1000}, K1 is set to
/// max_j (S_j - K S_{j-1})^+ and the candidate with the smallest K1 wins (ties
/// toward the smaller K).
[[nodiscard]] BoundConstants estimate_constants(const OdeProblem& problem, int k_max,
                                                int grid_density = kDefaultGridDensity);

/// Sampled sup of |d^k f/dy^k| for k = 0..k_max over [y_lo, y_hi] x [t_lo, t_hi].
[[nodiscard]] std::vector<double> sample_derivative_sups(const OdeProblem& problem, int k_max, double y_lo,
                                                         double y_hi, double t_lo, double t_hi, int grid_density);

}  // namespace taylorcert
