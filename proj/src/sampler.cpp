#include "taylorcert/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "taylorcert/errors.hpp"

namespace taylorcert {

SamplingSequence SamplingSequence::from_points(std::vector<double> points) {
  if (points.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "a sampling sequence needs at least two points");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i])) {
      throw Error(ErrorKind::InvalidArgument, "sampling points must be finite");
    }
    if (i > 0 && !(points[i] > points[i - 1])) {
      throw Error(ErrorKind::InvalidArgument,
                  "sampling points must be strictly increasing (index " + std::to_string(i) + ")");
    }
  }
  return SamplingSequence(std::move(points));
}

SamplingSequence SamplingSequence::uniform(double t0, double tJ, std::size_t J) {
  if (J == 0) {
    throw Error(ErrorKind::InvalidArgument, "uniform sampling needs J >= 1");
  }
  std::vector<double> pts(J + 1);
  const double span = tJ - t0;
  for (std::size_t i = 0; i <= J; ++i) {
    pts[i] = t0 + span * (static_cast<double>(i) / static_cast<double>(J));
  }
  pts.back() = tJ;
  return from_points(std::move(pts));
}

std::vector<double> SamplingSequence::gaps() const {
  std::vector<double> out;
  out.reserve(count());
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    out.push_back(points_[i + 1] - points_[i]);
  }
  return out;
}

double SamplingSequence::envelope() const {
  double h = 0.0;
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    h = std::max(h, points_[i + 1] - points_[i]);
  }
  return h;
}

double compute_aggregate(const BoundConstants& c, int ell, AggregateMode mode) {
  if (ell < 0) {
    throw Error(ErrorKind::InvalidArgument, "truncation order must be >= 0");
  }
  if (c.K1 > 0.0 && c.K >= 1.0) {
    throw Error(ErrorKind::ConstantsInfeasible, "K1 > 0 requires K < 1");
  }
  const int top = mode == AggregateMode::True ? ell + 1 : ell;
  double sum = 0.0;
  for (int k = 0; k <= top; ++k) {
    double term = std::pow(c.K, k) * c.F0;
    if (mode != AggregateMode::ApproxZeroK1) {
      term += c.K1 * geometric_sum(c.K, k);
    }
    sum += term / factorial(k);
  }
  return sum;
}

double compute_aggregate_alternate(const BoundConstants& c, int ell) {
  if (c.K1 > 0.0 && c.K >= 1.0) {
    throw Error(ErrorKind::ConstantsInfeasible, "K1 > 0 requires K < 1");
  }
  double sum = 0.0;
  for (int k = 0; k <= ell; ++k) {
    sum += std::pow(c.K, k) * c.F0 / factorial(k);
  }
  return sum + c.K1 * geometric_sum(c.K, ell + 1);
}

HBound closed_form_h_bound_detail(double A_value, int ell, double rho, std::size_t J) {
  if (!(rho > 0.0 && rho < 2.0)) {
    throw Error(ErrorKind::InvalidArgument, "rho must lie in (0, 2)");
  }
  if (!(A_value > 0.0) || !std::isfinite(A_value)) {
    throw Error(ErrorKind::InvalidArgument, "aggregate A must be finite and > 0");
  }
  if (J == 0 || ell < 0) {
    throw Error(ErrorKind::InvalidArgument, "J >= 1 and ell >= 0 required");
  }
  const double r = rho / 2.0;
  const double growth = A_value * geometric_sum(r, ell + 1);
  const double lag = static_cast<double>(J - 1);

  HBound b;
  b.saturation = (1.0 - r) / growth;
  b.accumulation = r / (growth * (lag + r));
  b.printed = std::min(b.saturation, b.accumulation);

  // Largest h with 1 - h*growth > 0 and lag*h*growth <= r*(1 - h*growth).
  const auto admissible = [&](double h) {
    const double slack = 1.0 - h * growth;
    return slack > 0.0 && lag * h * growth <= r * slack;
  };
  double lo = 0.0;
  double hi = 1.0 / growth;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    (admissible(mid) ? lo : hi) = mid;
  }
  b.solved = lo;
  b.value = std::min(b.printed, b.solved);
  if (!(b.value > 0.0)) {
    throw Error(ErrorKind::InfeasibleBudget, "closed-form gap bound is not positive");
  }
  return b;
}

double closed_form_h_bound(double A_value, int ell, double rho, std::size_t J) {
  return closed_form_h_bound_detail(A_value, ell, rho, J).value;
}

double first_exit(const std::function<double(double)>& trajectory, double t_start, double half_budget,
                  double t_max, std::size_t scan_points, double tolerance) {
  if (!(half_budget > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "half_budget must be > 0");
  }
  if (!(t_max > t_start) || scan_points == 0) {
    throw Error(ErrorKind::InvalidArgument, "first_exit needs t_max > t_start");
  }
  const double base = trajectory(t_start);
  const auto deviation = [&](double t) {
    const double v = trajectory(t);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NumericalDomain, "trajectory evaluator returned a non-finite value");
    }
    return std::abs(v - base);
  };
  if (!std::isfinite(base)) {
    throw Error(ErrorKind::NumericalDomain, "trajectory evaluator returned a non-finite value");
  }

  const double span = t_max - t_start;
  double prev = t_start;
  for (std::size_t k = 1; k <= scan_points; ++k) {
    const double t = k == scan_points ? t_max
                                      : t_start + span * (static_cast<double>(k) / static_cast<double>(scan_points));
    if (deviation(t) >= half_budget) {
      double lo = prev;
      double hi = t;
      while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
          break;
        }
        (deviation(mid) >= half_budget ? hi : lo) = mid;
      }
      return lo;
    }
    prev = t;
  }
  return t_max;
}

StepBudget make_step_budget(const BoundConstants& constants, int ell, double rho, std::size_t J) {
  StepBudget budget;
  budget.rho = rho;
  budget.rho_x = rho;
  budget.ell = ell;
  budget.A_value = compute_aggregate(constants, ell, AggregateMode::True);
  budget.closed_form_bound = budget.A_value > 0.0 ? closed_form_h_bound(budget.A_value, ell, rho, J)
                                                  : std::numeric_limits<double>::infinity();
  return budget;
}

SamplingSequence build_sampling(const OdeProblem& problem, StepBudget& budget, const SegmentProbe& probe) {
  problem.validate();
  if (!(budget.rho > 0.0 && budget.rho < 2.0)) {
    throw Error(ErrorKind::InvalidArgument, "budget rho must lie in (0, 2)");
  }
  if (!(budget.closed_form_bound > 0.0)) {
    throw Error(ErrorKind::InfeasibleBudget, "budget has no positive gap bound");
  }
  const double half = budget.rho / 2.0;
  const double snap = 1e-12 * std::max(1.0, std::abs(problem.tJ));
  budget.exit_thresholds.clear();

  std::vector<double> points{problem.t0};
  double t = problem.t0;
  for (std::size_t i = 0; t < problem.tJ; ++i) {
    if (i > 10'000'000) {
      throw Error(ErrorKind::StepCollapse, "sampling did not reach tJ");
    }
    const double remaining = problem.tJ - t;
    const double t_max = t + std::min(budget.closed_form_bound, remaining);
    const auto deviation = probe(i, t, t_max);
    const double exit = first_exit(deviation, t, half, t_max);
    budget.exit_thresholds.push_back(exit);

    const double h = std::min({budget.closed_form_bound, exit - t, remaining});
    if (!(h >= kStepCollapse)) {
      throw Error(ErrorKind::StepCollapse, "gap " + std::to_string(i) + " collapsed to " + std::to_string(h) +
                                               " at t=" + std::to_string(t));
    }
    double next = t + h;
    if (problem.tJ - next <= snap) {
      next = problem.tJ;
    }
    points.push_back(next);
    t = next;
  }
  return SamplingSequence::from_points(std::move(points));
}

bool class_membership(const SamplingSequence& seq, std::size_t J, double h) {
  if (seq.count() != J) {
    return false;
  }
  const auto& p = seq.points();
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    if (p[i + 1] - p[i] > h) {
      return false;
    }
  }
  return true;
}

}  // namespace taylorcert
