#include "taylorcert/shadowing.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "taylorcert/errors.hpp"

namespace taylorcert {

namespace {

constexpr double kConstraintSlack = 1e-12;

OdeProblem problem_for(const OdeProblem& problem, double y0) {
  OdeProblem p = problem;
  p.y0 = y0;
  return p;
}

}  // namespace

PseudoOrbit make_pseudo_orbit(std::shared_ptr<const Trajectory> approx, const Trajectory& reference) {
  if (!approx) {
    throw Error(ErrorKind::InvalidArgument, "pseudo-orbit needs a trajectory");
  }
  PseudoOrbit orbit;
  orbit.sampling = approx->sampling;
  orbit.samples = approx->sample_values;
  orbit.perturbed = approx->has_jumps;
  orbit.delta = error_trajectory(reference, *approx).error_stats->max_abs;
  orbit.source = std::move(approx);
  return orbit;
}

bool is_pseudo_orbit(const Trajectory& approx, const Trajectory& reference, double delta) {
  return error_trajectory(reference, approx).error_stats->max_abs <= delta;
}

std::vector<PseudoOrbit> pseudo_orbit_class(const std::vector<PseudoOrbit>& orbits, std::size_t J, double h,
                                            double delta) {
  std::vector<PseudoOrbit> out;
  for (const auto& orbit : orbits) {
    if (orbit.delta && *orbit.delta <= delta && class_membership(orbit.sampling, J, h)) {
      out.push_back(orbit);
    }
  }
  return out;
}

double shadow_objective(const OdeProblem& problem, const Trajectory& approx, double y0,
                        const ReferenceOptions& reference) {
  ReferenceOptions opts = reference;
  if (!approx.segments.empty()) {
    opts.dense_intervals = approx.segments.front().times.size() - 1;
  }
  const auto y = integrate_reference(problem_for(problem, y0), y0, approx.sampling, opts);
  return error_trajectory(y, approx).error_stats->max_abs;
}

ShadowResult shadowing_search(const OdeProblem& problem, const Trajectory& approx, double epsilon,
                              double search_halfwidth, std::size_t budget_evals, const ShadowOptions& options) {
  if (!(epsilon > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "epsilon must be > 0");
  }
  if (!(search_halfwidth >= 0.0) || approx.sample_values.empty()) {
    throw Error(ErrorKind::InvalidArgument, "search needs a halfwidth >= 0 and a non-empty orbit");
  }
  if (approx.sampling.front() != problem.t0 || approx.sampling.back() != problem.tJ) {
    throw Error(ErrorKind::DomainMismatch, "approximate orbit does not cover [t0, tJ]");
  }
  const std::size_t n_scan = std::max<std::size_t>(options.scan_points, 2);
  const double center = approx.sample_values.front();
  const double lo = center - search_halfwidth;
  const double hi = center + search_halfwidth;
  const auto phi = [&](double y0) { return shadow_objective(problem, approx, y0, options.reference); };

  ShadowResult result;
  result.epsilon = epsilon;
  result.achieved_error = std::numeric_limits<double>::infinity();
  result.y0_star = center;
  const auto consider = [&](double y0, double value) {
    ++result.evaluations;
    if (value < result.achieved_error || (value == result.achieved_error && y0 < result.y0_star)) {
      result.achieved_error = value;
      result.y0_star = y0;
    }
  };

  const std::size_t scan_count = std::min(n_scan, budget_evals);
  std::vector<double> ys(scan_count);
  std::vector<double> values(scan_count);
  for (std::size_t j = 0; j < scan_count; ++j) {
    ys[j] = lo + (hi - lo) * (static_cast<double>(j) / static_cast<double>(n_scan - 1));
  }
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, scan_count == 0 ? 1 : scan_count);
  if (workers <= 1) {
    for (std::size_t j = 0; j < scan_count; ++j) {
      values[j] = phi(ys[j]);
    }
  } else {
    std::vector<std::exception_ptr> failures(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t j = w; j < scan_count; j += workers) {
            values[j] = phi(ys[j]);
          }
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) {
      t.join();
    }
    for (const auto& f : failures) {
      if (f) {
        std::rethrow_exception(f);
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t j = 0; j < scan_count; ++j) {
    consider(ys[j], values[j]);
    if (values[j] < values[best]) {
      best = j;
    }
  }
  if (scan_count < n_scan) {
    result.found = false;
    return result;
  }

  // Golden-section refinement on the bracket around the best scan point.
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = ys[best == 0 ? 0 : best - 1];
  double b = ys[std::min(best + 1, n_scan - 1)];
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = 0.0;
  double fd = 0.0;
  bool have_c = false;
  bool have_d = false;
  while (b - a > options.tolerance && result.evaluations < budget_evals) {
    if (!have_c) {
      fc = phi(c);
      consider(c, fc);
      have_c = true;
      continue;
    }
    if (!have_d) {
      fd = phi(d);
      consider(d, fd);
      have_d = true;
      continue;
    }
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      have_c = false;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      have_d = false;
    }
  }
  result.found = result.achieved_error <= epsilon;
  return result;
}

ShadowConstraintReport shadow_constraint_report(const ErrorCertificate& cert, double epsilon, double e0) {
  ShadowConstraintReport report;
  report.certificate_feasible = cert.feasible();
  const double abs_e0 = std::abs(e0);
  const double g_sum = std::accumulate(cert.gbar_list.begin(), cert.gbar_list.end(), 0.0);
  const double j_gbar = static_cast<double>(cert.J) * cert.gbar;
  const double S = cert.kind == CertificateKind::Continuous ? cert.contraction_sum : 0.0;
  const double cap_limit =
      S > 0.0 ? (S < 1.0 ? (1.0 - S) / S * cert.gbar : -std::numeric_limits<double>::infinity())
              : std::numeric_limits<double>::infinity();

  report.per_point_limit = std::min(epsilon - cert.rho - g_sum, cap_limit);
  report.sufficient_limit = std::min(epsilon - cert.rho - j_gbar, cap_limit);
  report.impulsive_limit = epsilon - cert.rho - j_gbar;
  report.perturbation_sum_ok = g_sum < epsilon;
  report.per_point = abs_e0 <= report.per_point_limit + kConstraintSlack;
  report.sufficient = abs_e0 <= report.sufficient_limit + kConstraintSlack;
  report.impulsive = abs_e0 <= report.impulsive_limit + kConstraintSlack;
  report.holds = report.certificate_feasible && report.perturbation_sum_ok && report.per_point &&
                 report.sufficient && report.impulsive;
  return report;
}

bool verify_shadow_constraints(const ErrorCertificate& cert, double epsilon, double e0) {
  return shadow_constraint_report(cert, epsilon, e0).holds;
}

}  // namespace taylorcert
