#include "taylorcert/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "taylorcert/errors.hpp"

namespace taylorcert {

namespace {

constexpr double kAdmissibleSlack = 1e-12;

std::vector<double> broadcast(const std::vector<double>& values, std::size_t J, const char* what) {
  if (values.empty()) {
    return std::vector<double>(J, 0.0);
  }
  if (values.size() == 1) {
    return std::vector<double>(J, values.front());
  }
  if (values.size() != J) {
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + " must hold 1 or J = " + std::to_string(J) + " entries");
  }
  return values;
}

void check_common(int ell, double rho, std::size_t J) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "rho must lie in (0, 1)");
  }
  if (ell < 0) {
    throw Error(ErrorKind::InvalidArgument, "truncation order must be >= 0");
  }
  if (J == 0) {
    throw Error(ErrorKind::InvalidArgument, "J must be >= 1");
  }
}

void check_nonnegative(const std::vector<double>& values, const char* what) {
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::InvalidArgument, std::string(what) + " entries must be finite and >= 0");
    }
  }
}

double gap_bound(const BoundConstants& c, int ell, double rho, std::size_t J) {
  const double A = compute_aggregate(c, ell, AggregateMode::True);
  return A > 0.0 ? closed_form_h_bound(A, ell, rho, J) : std::numeric_limits<double>::infinity();
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

double max_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

ErrorCertificate base_certificate(const BoundConstants& c, int ell, double rho, std::size_t J, double h,
                                  double e0) {
  ErrorCertificate cert;
  cert.K = c.K;
  cert.K1 = c.K1;
  cert.F0 = c.F0;
  cert.ell = ell;
  cert.J = J;
  cert.h = h;
  cert.rho = rho;
  cert.rho_x = rho;
  cert.e0_bound = std::abs(e0);
  cert.h_bound = gap_bound(c, ell, rho, J);
  cert.feasibility.h_admissible = h <= cert.h_bound * (1.0 + kAdmissibleSlack);
  cert.rho_bar = static_cast<double>(J) * h * segment_growth(c, ell, rho, h);
  cert.feasibility.budget_ok = cert.rho_bar <= rho;
  return cert;
}

}  // namespace

std::string to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::Unperturbed: return "unperturbed";
    case CertificateKind::Impulsive: return "impulsive";
    case CertificateKind::Continuous: return "continuous";
  }
  return "unknown";
}

bool ErrorCertificate::feasible() const {
  const auto& f = feasibility;
  switch (kind) {
    case CertificateKind::Unperturbed: return f.h_admissible;
    case CertificateKind::Impulsive: return f.h_admissible && f.impulse_cap_ok && (gbar == 0.0 || f.budget_ok);
    case CertificateKind::Continuous: return f.h_admissible && f.lambda_contraction && f.impulse_cap_ok;
  }
  return false;
}

double ErrorCertificate::certified_bound() const {
  if (kind == CertificateKind::Continuous) {
    return std::min(sup_bound, sup_bound_uniform);
  }
  return epsilon;
}

bool same_bounds(const ErrorCertificate& a, const ErrorCertificate& b) {
  return a.rho == b.rho && a.rho_x == b.rho_x && a.epsilon1 == b.epsilon1 && a.epsilon == b.epsilon &&
         a.e0_bound == b.e0_bound && a.delta == b.delta && a.rho_bar == b.rho_bar &&
         a.epsilon1_uniform == b.epsilon1_uniform && a.epsilon_uniform == b.epsilon_uniform &&
         a.uniform_tighter == b.uniform_tighter && a.contraction_sum == b.contraction_sum &&
         a.contraction_uniform == b.contraction_uniform && a.sup_bound == b.sup_bound &&
         a.deviation_bound == b.deviation_bound && a.sup_bound_uniform == b.sup_bound_uniform &&
         a.deviation_bound_uniform == b.deviation_bound_uniform && a.feasibility == b.feasibility &&
         a.feasible() == b.feasible() && a.K == b.K && a.K1 == b.K1 && a.F0 == b.F0 && a.ell == b.ell &&
         a.J == b.J && a.h == b.h && a.h_bound == b.h_bound && a.gbar == b.gbar && a.lambda == b.lambda;
}

double segment_growth(const BoundConstants& c, int ell, double rho, double h) {
  const double r = rho / 2.0;
  double b = 0.0;
  for (int k = 0; k <= ell; ++k) {
    b += std::pow(2.0, k + 1) / factorial(k) * (std::pow(c.K, k + 1) * r + c.K1 * geometric_sum(c.K, k)) *
         std::pow(r, k);
  }
  b += h * std::pow(2.0, ell) / factorial(ell) *
       (std::pow(c.K, ell + 2) * r + c.K1 * geometric_sum(c.K, ell + 1)) * std::pow(r, ell);
  return b;
}

double max_impulsive_step(const BoundConstants& c, int ell, double rho, std::size_t J) {
  if (J == 0) {
    throw Error(ErrorKind::InvalidArgument, "J must be >= 1");
  }
  const double Jd = static_cast<double>(J);
  const auto fits = [&](double h) { return Jd * h * segment_growth(c, ell, rho, h) <= rho; };
  if (segment_growth(c, ell, rho, 1.0) == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  double lo = 0.0;
  double hi = 1.0;
  while (fits(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    (fits(mid) ? lo : hi) = mid;
  }
  return lo;
}

ErrorCertificate certify_unperturbed(const BoundConstants& constants, int ell, double rho, std::size_t J, double h,
                                     double e0) {
  check_common(ell, rho, J);
  if (!(h > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "h must be > 0");
  }
  ErrorCertificate cert = base_certificate(constants, ell, rho, J, h, e0);
  cert.kind = CertificateKind::Unperturbed;
  cert.epsilon1 = rho;
  cert.epsilon = cert.e0_bound + rho;
  cert.epsilon1_uniform = cert.rho_bar;
  cert.epsilon_uniform = cert.rho_bar + cert.e0_bound;
  cert.uniform_tighter = cert.epsilon_uniform < cert.epsilon;
  cert.sup_bound = cert.epsilon;
  cert.sup_bound_uniform = cert.epsilon;
  cert.delta = cert.epsilon;
  cert.h_list.assign(J, h);
  cert.gbar_list.assign(J, 0.0);
  cert.lambda_list.assign(J, 0.0);
  return cert;
}

ErrorCertificate certify_impulsive(const BoundConstants& constants, int ell, double rho, std::size_t J, double h,
                                   const std::vector<double>& gbar_list, double e0) {
  check_common(ell, rho, J);
  if (!(h > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "h must be > 0");
  }
  const auto gbars = broadcast(gbar_list, J, "gbar_list");
  check_nonnegative(gbars, "gbar_list");
  const double gbar = max_of(gbars);
  if (gbar > 0.0 && gbar < std::abs(e0)) {
    throw Error(ErrorKind::CapTooSmall,
                "impulse cap " + std::to_string(gbar) + " is below |e0| = " + std::to_string(std::abs(e0)));
  }

  ErrorCertificate cert = certify_unperturbed(constants, ell, rho, J, h, e0);
  cert.kind = CertificateKind::Impulsive;
  if (gbar == 0.0) {
    return cert;
  }
  const double Jd = static_cast<double>(J);
  cert.gbar = gbar;
  cert.gbar_list = gbars;
  cert.epsilon1 = rho + sum(gbars);
  cert.epsilon = cert.epsilon1 + cert.e0_bound;
  cert.epsilon1_uniform = cert.rho_bar + Jd * gbar;
  cert.epsilon_uniform = cert.epsilon1_uniform + cert.e0_bound;
  cert.uniform_tighter = cert.epsilon_uniform < cert.epsilon;
  cert.sup_bound = cert.epsilon;
  cert.sup_bound_uniform = cert.epsilon;
  cert.delta = cert.epsilon;
  return cert;
}

ErrorCertificate certify_continuous(const BoundConstants& constants, int ell, double rho, std::size_t J,
                                    const std::vector<double>& h_list, const std::vector<double>& lambda_list,
                                    const std::vector<double>& gbar_list, double e0) {
  check_common(ell, rho, J);
  const auto hs = broadcast(h_list, J, "h_list");
  const auto lambdas = broadcast(lambda_list, J, "lambda_list");
  const auto gbars = broadcast(gbar_list, J, "gbar_list");
  check_nonnegative(lambdas, "lambda_list");
  check_nonnegative(gbars, "gbar_list");
  for (double hi : hs) {
    if (!(hi > 0.0) || !std::isfinite(hi)) {
      throw Error(ErrorKind::InvalidArgument, "h_list entries must be finite and > 0");
    }
  }
  const double h = max_of(hs);
  const double lambda = max_of(lambdas);
  const double gbar = max_of(gbars);
  const double Jd = static_cast<double>(J);

  ErrorCertificate cert = base_certificate(constants, ell, rho, J, h, e0);
  cert.kind = CertificateKind::Continuous;
  cert.h_list = hs;
  cert.lambda_list = lambdas;
  cert.gbar_list = gbars;
  cert.lambda = lambda;
  cert.gbar = gbar;

  double S = 0.0;
  double growth = 0.0;
  for (std::size_t i = 0; i < J; ++i) {
    S += hs[i] * lambdas[i];
    growth += hs[i] * segment_growth(constants, ell, rho, hs[i]);
  }
  const double U = Jd * h * lambda;
  const double g_sum = sum(gbars);
  cert.contraction_sum = S;
  cert.contraction_uniform = U;
  cert.feasibility.lambda_contraction = U < 1.0 && S < 1.0;

  const double inf = std::numeric_limits<double>::infinity();
  const double per_point = cert.e0_bound + growth + g_sum;
  const double uniform_core = cert.rho_bar + Jd * gbar;
  cert.sup_bound = S < 1.0 ? per_point / (1.0 - S) : inf;
  cert.deviation_bound = S < 1.0 ? S / (1.0 - S) * per_point : inf;
  cert.sup_bound_uniform = U < 1.0 ? (cert.e0_bound + uniform_core) / (1.0 - U) : inf;
  cert.deviation_bound_uniform = U < 1.0 ? U / (1.0 - U) * uniform_core : inf;
  cert.feasibility.impulse_cap_ok = S < 1.0 && gbar >= S / (1.0 - S) * cert.e0_bound;

  cert.epsilon1 = rho + g_sum;
  cert.epsilon = cert.sup_bound;
  cert.epsilon1_uniform = uniform_core;
  cert.epsilon_uniform = cert.sup_bound_uniform;
  cert.uniform_tighter = cert.sup_bound_uniform < cert.sup_bound;
  cert.delta = cert.certified_bound();
  return cert;
}

double initial_condition_bound(double K, double t0, double tJ, double rho) {
  if (!(tJ > t0) || K < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "initial_condition_bound needs tJ > t0 and K >= 0");
  }
  const double span = K * (tJ - t0);
  if (span >= 1.0) {
    throw Error(ErrorKind::InfeasibleBudget, "K (tJ - t0) = " + std::to_string(span) + " >= 1");
  }
  return rho / 2.0 * (1.0 - span);
}

MikTable build_mik_table(const OdeProblem& problem, const BoundConstants& constants, const Trajectory& trajectory,
                         int ell, double rho, int grid_density) {
  MikTable table;
  const int k_max = std::min(ell + 1, problem.smoothness_order);
  const auto& p = trajectory.sampling.points();
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    const double x = trajectory.sample_values.at(i);
    const double lo = std::max(problem.y_min(), x - rho / 2.0);
    const double hi = std::min(problem.y_max(), x + rho / 2.0);
    std::vector<double> row(static_cast<std::size_t>(k_max) + 1);
    std::vector<double> sampled;
    if (lo <= hi) {
      sampled = sample_derivative_sups(problem, k_max, lo, hi, p[i], p[i + 1], grid_density);
    }
    for (int k = 0; k <= k_max; ++k) {
      const double chained = constants.chained_bound(k);
      const auto idx = static_cast<std::size_t>(k);
      row[idx] = sampled.empty() ? chained : std::min(sampled[idx], chained);
    }
    table.entries.push_back(std::move(row));
  }
  return table;
}

}  // namespace taylorcert
