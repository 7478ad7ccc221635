#include "taylorcert/ode_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "taylorcert/errors.hpp"

namespace taylorcert {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double polynomial_derivative(const std::vector<double>& c, int k, double y) {
  const int degree = static_cast<int>(c.size()) - 1;
  if (k > degree) {
    return 0.0;
  }
  // Horner on sum_{j>=k} c_j * j!/(j-k)! * y^(j-k)
  double acc = 0.0;
  for (int j = degree; j >= k; --j) {
    double falling = 1.0;
    for (int m = 0; m < k; ++m) {
      falling *= static_cast<double>(j - m);
    }
    acc = acc * y + c[static_cast<std::size_t>(j)] * falling;
  }
  return acc;
}

}  // namespace

Field::Field() : Field("zero", PolynomialField{{}}) {}

Field::Field(std::string name, Model model) : name_(std::move(name)), model_(std::move(model)) {}

Field Field::zero() { return Field("zero", PolynomialField{{}}); }
Field Field::constant(double c) { return Field("constant", PolynomialField{{c}}); }
Field Field::affine(double a, double b) { return Field("affine", PolynomialField{{b, a}}); }
Field Field::logistic() { return Field("logistic", PolynomialField{{0.0, 1.0, -1.0}}); }
Field Field::riccati(double q) { return Field("riccati", PolynomialField{{0.0, 0.0, q}}); }
Field Field::polynomial(std::vector<double> coeffs) {
  return Field("polynomial", PolynomialField{std::move(coeffs)});
}
Field Field::damped_driven(double damping, double amplitude, double frequency) {
  return Field("damped_driven", DampedDrivenField{damping, amplitude, frequency});
}
Field Field::bounded_sine(double scale) { return Field("bounded_sine", BoundedSineField{scale}); }

double Field::value(double y, double t) const { return derivative(0, y, t); }

double Field::derivative(int k, double y, double t) const {
  return std::visit(
      Overloaded{
          [&](const PolynomialField& p) { return polynomial_derivative(p.coeffs, k, y); },
          [&](const DampedDrivenField& d) {
            if (k == 0) {
              return -d.damping * y + d.amplitude * std::sin(d.frequency * t);
            }
            return k == 1 ? -d.damping : 0.0;
          },
          [&](const BoundedSineField& s) {
            switch (k % 4) {
              case 0: return s.scale * std::sin(y);
              case 1: return s.scale * std::cos(y);
              case 2: return -s.scale * std::sin(y);
              default: return -s.scale * std::cos(y);
            }
          },
      },
      model_);
}

int Field::polynomial_degree() const {
  return std::visit(Overloaded{
                        [](const PolynomialField& p) {
                          int degree = static_cast<int>(p.coeffs.size()) - 1;
                          while (degree >= 0 && p.coeffs[static_cast<std::size_t>(degree)] == 0.0) {
                            --degree;
                          }
                          return std::max(degree, 0);
                        },
                        [](const DampedDrivenField&) { return 1; },
                        [](const BoundedSineField&) { return -1; },
                    },
                    model_);
}

void OdeProblem::validate() const {
  if (!(tJ > t0) || !std::isfinite(t0) || !std::isfinite(tJ)) {
    throw Error(ErrorKind::InvalidArgument, "time window requires finite t0 < tJ");
  }
  if (!(theta >= 0.0) || !std::isfinite(theta)) {
    throw Error(ErrorKind::InvalidArgument, "box half-width theta must be finite and >= 0");
  }
  if (!std::isfinite(y0)) {
    throw Error(ErrorKind::InvalidArgument, "initial state must be finite");
  }
  if (smoothness_order < 0) {
    throw Error(ErrorKind::InvalidArgument, "smoothness order must be >= 0");
  }
}

double BoundConstants::chained_bound(int k) const {
  return std::pow(K, k) * F0 + K1 * geometric_sum(K, k);
}

double geometric_sum(double ratio, int terms) {
  double sum = 0.0;
  double power = 1.0;
  for (int i = 0; i < terms; ++i) {
    sum += power;
    power *= ratio;
  }
  return sum;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) {
    f *= static_cast<double>(i);
  }
  return f;
}

double eval_field(const OdeProblem& problem, double y, double t) {
  const double v = problem.field.value(y, t);
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::NumericalDomain,
                "field " + problem.field.name() + " is not finite at y=" + std::to_string(y) +
                    ", t=" + std::to_string(t));
  }
  return v;
}

DerivativeStack eval_derivatives(const OdeProblem& problem, double y, double t, int k_max) {
  if (k_max < 0) {
    throw Error(ErrorKind::InvalidArgument, "k_max must be >= 0");
  }
  if (k_max > problem.smoothness_order) {
    throw Error(ErrorKind::Order, "requested derivative order " + std::to_string(k_max) +
                                      " exceeds smoothness order " + std::to_string(problem.smoothness_order));
  }
  DerivativeStack stack{y, t, {}};
  stack.coeffs.reserve(static_cast<std::size_t>(k_max) + 1);
  stack.coeffs.push_back(eval_field(problem, y, t));
  for (int k = 1; k <= k_max; ++k) {
    const double d = problem.field.derivative(k, y, t);
    if (!std::isfinite(d)) {
      throw Error(ErrorKind::NumericalDomain, "derivative " + std::to_string(k) + " is not finite");
    }
    stack.coeffs.push_back(d);
  }
  return stack;
}

std::vector<double> sample_derivative_sups(const OdeProblem& problem, int k_max, double y_lo, double y_hi,
                                           double t_lo, double t_hi, int grid_density) {
  if (grid_density < 2) {
    throw Error(ErrorKind::InvalidArgument, "grid_density must be >= 2");
  }
  if (k_max < 0 || k_max > problem.smoothness_order) {
    throw Error(ErrorKind::Order, "derivative order " + std::to_string(k_max) + " outside [0, n]");
  }
  std::vector<double> sups(static_cast<std::size_t>(k_max) + 1, 0.0);
  const double steps = static_cast<double>(grid_density - 1);
  for (int a = 0; a < grid_density; ++a) {
    const double y = y_lo + (y_hi - y_lo) * (static_cast<double>(a) / steps);
    for (int b = 0; b < grid_density; ++b) {
      const double t = t_lo + (t_hi - t_lo) * (static_cast<double>(b) / steps);
      for (int k = 0; k <= k_max; ++k) {
        const double d = std::abs(problem.field.derivative(k, y, t));
        if (!std::isfinite(d)) {
          throw Error(ErrorKind::NumericalDomain, "derivative sup is not finite on the box");
        }
        auto& s = sups[static_cast<std::size_t>(k)];
        s = std::max(s, d);
      }
    }
  }
  return sups;
}

BoundConstants estimate_constants(const OdeProblem& problem, int k_max, int grid_density) {
  problem.validate();
  BoundConstants out;
  out.derivative_sups = sample_derivative_sups(problem, k_max, problem.y_min(), problem.y_max(), problem.t0,
                                               problem.tJ, grid_density);
  const auto& S = out.derivative_sups;
  out.F0 = S[0];

  bool zero_k1_feasible = true;
  double ratio = 0.0;
  for (std::size_t j = 1; j < S.size(); ++j) {
    if (S[j - 1] > 0.0) {
      ratio = std::max(ratio, S[j] / S[j - 1]);
    } else if (S[j] > 0.0) {
      zero_k1_feasible = false;
    }
  }
  if (zero_k1_feasible) {
    out.K = ratio;
    out.K1 = 0.0;
    return out;
  }

  double best_k = 0.0;
  double best_k1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrowthCandidateCount; ++i) {
    const double k = static_cast<double>(i) / kGrowthCandidateCount;
    double k1 = 0.0;
    for (std::size_t j = 1; j < S.size(); ++j) {
      k1 = std::max(k1, S[j] - k * S[j - 1]);
    }
    if (k1 < best_k1) {
      best_k1 = k1;
      best_k = k;
    }
  }
  if (!std::isfinite(best_k1)) {
    throw Error(ErrorKind::ConstantsInfeasible, "no (K, K1) with K < 1 bounds the sampled derivative chain");
  }
  out.K = best_k;
  out.K1 = best_k1;
  return out;
}

}  // namespace taylorcert
