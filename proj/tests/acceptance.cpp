// Acceptance battery: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "taylorcert/certificates.hpp"
#include "taylorcert/errors.hpp"
#include "taylorcert/experiment.hpp"
#include "taylorcert/integrator.hpp"
#include "taylorcert/sampler.hpp"
#include "taylorcert/shadowing.hpp"

using namespace taylorcert;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;

  void fail(const std::string& why) {
    pass = false;
    if (failures.size() < 8) {
      failures.push_back(why);
    }
  }
};

int g_failed = 0;

void report(int id, const char* title, const Outcome& o, double secs) {
  std::printf("[%s] criterion %d: %s (%s; %.2f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  for (const auto& f : o.failures) {
    std::printf("       - %s\n", f.c_str());
  }
  std::fflush(stdout);
  if (!o.pass) {
    ++g_failed;
  }
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

bool close_rel(double a, double b, double tol) {
  if (std::isinf(a) || std::isinf(b)) {
    return a == b;
  }
  return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

// ---------------------------------------------------------------------------
// Battery of problems used by criteria 3 to 7.

struct ProblemSpec {
  const char* label;
  FieldSpec field;
  double y0;
  double theta;
};

std::vector<ProblemSpec> battery_problems() {
  std::vector<ProblemSpec> out;
  FieldSpec logistic;
  logistic.name = "logistic";
  out.push_back({"logistic", logistic, 0.3, 0.25});
  FieldSpec affine;
  affine.name = "affine";
  affine.a = -1.0;
  affine.b = 0.0;
  out.push_back({"affine", affine, 1.0, 0.5});
  FieldSpec driven;
  driven.name = "damped_driven";
  out.push_back({"damped_driven", driven, 0.5, 0.5});
  FieldSpec sine;
  sine.name = "bounded_sine";
  sine.scale = 0.5;
  out.push_back({"bounded_sine", sine, 1.0, 0.5});
  FieldSpec riccati;
  riccati.name = "riccati";
  riccati.q = 1.0;
  out.push_back({"riccati", riccati, 0.5, 0.3});
  return out;
}

constexpr std::size_t kBatteryJ = 6;

struct BatteryCase {
  std::string label;
  ExperimentConfig config;
};

std::vector<BatteryCase> battery() {
  std::vector<BatteryCase> cases;
  for (const auto& p : battery_problems()) {
    for (int ell : {0, 1, 2}) {
      for (double rho : {0.1, 0.3, 0.5}) {
        ExperimentConfig c;
        c.field = p.field;
        c.y0 = p.y0;
        c.theta = p.theta;
        c.t0 = 0.0;
        c.tJ = 1.0;
        c.ell = ell;
        c.rho = rho;
        c.sampling_mode = SamplingMode::Auto;
        // Window sized so that six gaps at the closed-form bound cover it with 10% slack.
        const auto constants = resolve_constants(c, c.problem());
        const double A = compute_aggregate(constants, ell, AggregateMode::True);
        c.tJ = 0.9 * static_cast<double>(kBatteryJ) * closed_form_h_bound(A, ell, rho, kBatteryJ);
        c.J = kBatteryJ;
        cases.push_back({std::string(p.label) + "/ell=" + std::to_string(ell) + "/rho=" + num(rho), c});
      }
    }
  }
  return cases;
}

void check_confinement(const RunResult& run, double rho, const std::string& label, Outcome& o, double& worst) {
  for (double d : run.x_excursions) {
    worst = std::max(worst, d - rho / 2.0);
    if (d > rho / 2.0 + 1e-8) {
      o.fail(label + ": |x(t) - x(t_i)| = " + num(d) + " > rho/2");
    }
  }
  for (double d : run.y_excursions) {
    worst = std::max(worst, d - rho / 2.0);
    if (d > rho / 2.0 + 1e-8) {
      o.fail(label + ": |y(t) - y(t_i)| = " + num(d) + " > rho/2");
    }
  }
}

// ---------------------------------------------------------------------------
// Straight-line formula oracle, written from the bound statements only.

double o_geom(double K, int k) {  // (1 - K^k) / (1 - K), limit k at K = 1
  if (K == 1.0) {
    return static_cast<double>(k);
  }
  return (1.0 - std::pow(K, k)) / (1.0 - K);
}

double o_fact(int k) { return std::tgamma(static_cast<double>(k) + 1.0); }

double o_aggregate(double K, double K1, double F0, int ell, int top_extra, bool with_k1) {
  double s = 0.0;
  for (int k = 0; k <= ell + top_extra; ++k) {
    s += (std::pow(K, k) * F0 + (with_k1 ? K1 * o_geom(K, k) : 0.0)) / o_fact(k);
  }
  return s;
}

struct OracleBound {
  double printed;
  double solved;
};

OracleBound o_h_bound(double A, int ell, double rho, std::size_t J) {
  const double r = rho / 2.0;
  const double G = (1.0 - std::pow(r, ell + 1)) / (1.0 - r);
  const double T1 = (1.0 - r) / (A * G);
  const double T2 = r * (1.0 - r) / (A * (1.0 - std::pow(r, ell + 1)) * (static_cast<double>(J) - 1.0 + r));
  // (J - 1) h A G <= r (1 - h A G) solves to h <= r / (A G (J - 1 + r)); for J = 1 only 1 - h A G > 0 remains.
  const double solved = J == 1 ? 1.0 / (A * G) : r / (A * G * (static_cast<double>(J) - 1.0 + r));
  return {std::min(T1, T2), solved};
}

double o_B(double K, double K1, int ell, double rho, double h) {
  const double r = rho / 2.0;
  double s = 0.0;
  for (int k = 0; k <= ell; ++k) {
    s += std::pow(2.0, k + 1) / o_fact(k) * (std::pow(K, k + 1) * r + K1 * o_geom(K, k)) * std::pow(r, k);
  }
  return s + h * std::pow(2.0, ell) / o_fact(ell) * (std::pow(K, ell + 2) * r + K1 * o_geom(K, ell + 1)) *
                 std::pow(r, ell);
}

// ---------------------------------------------------------------------------

Outcome criterion_euler() {
  Outcome o;
  OdeProblem p;
  p.field = Field::logistic();
  p.y0 = 0.5;
  p.theta = 0.5;
  p.tJ = 1.0;
  const auto seq = SamplingSequence::uniform(0.0, 1.0, 10);
  const auto x = integrate_truncated(p, seq, 0, 0.5);
  double e = 0.5;
  double worst = 0.0;
  for (std::size_t i = 0; i <= 10; ++i) {
    worst = std::max(worst, std::abs(x.sample_values[i] - e));
    e = e + 0.1 * e * (1.0 - e);
  }
  if (worst > 1e-12) {
    o.fail("max deviation from Euler iterates " + num(worst));
  }
  o.detail = "max |x_i - euler_i| = " + num(worst);
  return o;
}

Outcome criterion_exactness() {
  Outcome o;
  double worst_affine = 0.0;
  double worst_riccati = 0.0;
  double t_affine = 0.0;
  double t_riccati = 0.0;
  {
    const auto start = Clock::now();
    OdeProblem p;
    p.field = Field::affine(-1.0, 0.0);
    p.y0 = 1.0;
    p.theta = 0.5;
    p.tJ = 2.0;
    const auto seq = SamplingSequence::uniform(0.0, 2.0, 20);
    const auto x = integrate_truncated(p, seq, 1, 1.0);
    const auto y = integrate_reference(p, 1.0, seq);
    worst_affine = error_trajectory(y, x).error_stats->max_abs;
    t_affine = seconds_since(start);
  }
  {
    const auto start = Clock::now();
    OdeProblem p;
    p.field = Field::riccati();
    p.y0 = 1.0;
    p.theta = 0.5;
    p.tJ = 0.5;
    const auto seq = SamplingSequence::uniform(0.0, 0.5, 5);
    const auto x = integrate_truncated(p, seq, 2, 1.0);
    const auto y = integrate_reference(p, 1.0, seq);
    worst_riccati = error_trajectory(y, x).error_stats->max_abs;
    for (const auto& seg : x.segments) {
      for (std::size_t j = 0; j < seg.times.size(); ++j) {
        worst_riccati = std::max(worst_riccati, std::abs(seg.values[j] - 1.0 / (1.0 - seg.times[j])));
      }
    }
    t_riccati = seconds_since(start);
  }
  if (worst_affine > 1e-8) o.fail("affine max|e| = " + num(worst_affine));
  if (worst_riccati > 1e-7) o.fail("riccati max|e| = " + num(worst_riccati));
  if (t_affine > 1.0 || t_riccati > 1.0) o.fail("runtime above 1 s");
  o.detail = "affine max|e| = " + num(worst_affine) + ", riccati max|e| = " + num(worst_riccati);
  return o;
}

struct BatteryState {
  std::vector<BatteryCase> cases;
  std::vector<std::optional<CertifyResult>> unperturbed;  // criterion 3 results per case
  double worst_confinement = -1.0;
  Outcome confinement;
  std::size_t admissible_runs = 0;
};

Outcome criterion_unperturbed(BatteryState& st) {
  Outcome o;
  std::size_t feasible = 0;
  std::size_t sound = 0;
  double worst_ratio = 0.0;
  for (const auto& bc : st.cases) {
    try {
      auto r = certify_experiment(bc.config);
      const auto& cert = r.certificate;
      if (cert.feasibility.h_admissible) {
        ++st.admissible_runs;
        check_confinement(r.run, bc.config.rho, bc.label, st.confinement, st.worst_confinement);
      }
      if (cert.feasible()) {
        ++feasible;
        worst_ratio = std::max(worst_ratio, r.measured_max_error / cert.epsilon);
        if (r.verdict != "sound") {
          o.fail(bc.label + ": measured " + num(r.measured_max_error) + " vs epsilon " + num(cert.epsilon) +
                 ", segment deviation " + num(r.measured_segment_deviation));
        } else {
          ++sound;
        }
      }
      st.unperturbed.push_back(std::move(r));
    } catch (const Error& e) {
      st.unperturbed.emplace_back(std::nullopt);
      o.fail(bc.label + ": " + e.what());
    }
  }
  if (feasible < 20) {
    o.fail("only " + std::to_string(feasible) + " feasible combinations (need >= 20)");
  }
  o.detail = std::to_string(st.cases.size()) + " combinations, " + std::to_string(feasible) + " feasible, " +
             std::to_string(sound) + " sound, max measured/epsilon = " + num(worst_ratio);
  return o;
}

Outcome criterion_impulsive(BatteryState& st) {
  Outcome o;
  std::size_t feasible = 0;
  std::size_t runs = 0;
  std::size_t identical = 0;
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < st.cases.size(); ++i) {
    const auto& bc = st.cases[i];
    // Zero impulses: the impulsive certificate must equal the unperturbed one.
    if (st.unperturbed[i]) {
      const auto& base = st.unperturbed[i]->certificate;
      const auto zero = certify_impulsive(st.unperturbed[i]->run.constants, bc.config.ell, bc.config.rho, base.J,
                                          base.h, std::vector<double>(base.J, 0.0), 0.0);
      if (same_bounds(base, zero)) {
        ++identical;
      } else {
        o.fail(bc.label + ": zero-impulse certificate differs from the unperturbed one");
      }
    }
    auto cfg = bc.config;
    cfg.impulse = 0.01;
    cfg.impulse_cap = 0.01;
    try {
      const auto r = certify_experiment(cfg);
      ++runs;
      if (r.certificate.feasibility.h_admissible) {
        ++st.admissible_runs;
        check_confinement(r.run, cfg.rho, bc.label + "/g=0.01", st.confinement, st.worst_confinement);
      }
      if (r.certificate.kind != CertificateKind::Impulsive) {
        o.fail(bc.label + ": expected an impulsive certificate");
      }
      if (r.certificate.feasible()) {
        ++feasible;
        worst_ratio = std::max(worst_ratio, r.measured_max_error / r.certificate.epsilon);
        if (r.verdict != "sound") {
          o.fail(bc.label + "/g=0.01: measured " + num(r.measured_max_error) + " > epsilon " +
                 num(r.certificate.epsilon));
        }
      }
    } catch (const Error& e) {
      o.fail(bc.label + "/g=0.01: " + e.what());
    }
  }
  if (feasible == 0) {
    o.fail("no feasible impulsive certificate in the battery");
  }
  o.detail = std::to_string(identical) + " zero-impulse certificates identical, " + std::to_string(runs) +
             " runs with g=0.01, " + std::to_string(feasible) + " feasible, max measured/epsilon = " +
             num(worst_ratio);
  return o;
}

Outcome criterion_continuous(BatteryState& st) {
  Outcome o;
  std::size_t feasible = 0;
  std::size_t rejected = 0;
  double worst_ratio = 0.0;
  for (const auto& bc : st.cases) {
    for (double lambda : {0.0, 0.5}) {
      auto cfg = bc.config;
      cfg.lambda = lambda;
      const std::string label = bc.label + "/lambda=" + num(lambda);
      try {
        const auto run = run_experiment(cfg);
        const auto& seq = run.plan.sequence;
        const std::size_t J = seq.count();
        const auto cert = certify_continuous(run.constants, cfg.ell, cfg.rho, J, seq.gaps(),
                                             std::vector<double>(J, lambda), {}, cfg.y0 - cfg.initial_x());
        if (cert.feasibility.h_admissible) {
          ++st.admissible_runs;
          check_confinement(run, cfg.rho, label, st.confinement, st.worst_confinement);
        }
        const bool contracts = static_cast<double>(J) * seq.envelope() * lambda < 1.0;
        if (cert.feasibility.lambda_contraction != contracts) {
          o.fail(label + ": contraction flag disagrees with J h lambda < 1");
        }
        if (!contracts) {
          ++rejected;
          if (cert.feasible()) o.fail(label + ": certified although J h lambda >= 1");
          continue;
        }
        if (cert.feasible()) {
          ++feasible;
          const double measured = run.error.error_stats->max_abs;
          worst_ratio = std::max(worst_ratio, measured / cert.certified_bound());
          if (measured > cert.sup_bound || measured > cert.sup_bound_uniform) {
            o.fail(label + ": measured " + num(measured) + " above bound " + num(cert.sup_bound) + " / " +
                   num(cert.sup_bound_uniform));
          }
        }
      } catch (const Error& e) {
        o.fail(label + ": " + e.what());
      }
    }
  }

  // Feasibility gate on configurations that violate the contraction condition.
  const BoundConstants c{0.5, 0.0, 1.0, {}};
  const auto formal = certify_continuous(c, 1, 0.3, 10, {0.2}, {1.0}, {}, 0.0);
  if (formal.feasible() || formal.feasibility.lambda_contraction) o.fail("J=10, h=0.2, lambda=1 was certified");
  ++rejected;
  const auto ok = certify_continuous(c, 1, 0.3, 10, {0.05}, {1.0}, {}, 0.0);
  if (!ok.feasibility.lambda_contraction || !close_rel(ok.sup_bound_uniform, 2.0 * ok.rho_bar, 1e-14)) {
    o.fail("J=10, h=0.05, lambda=1 should contract with amplification 2");
  }
  {
    ExperimentConfig cfg;
    cfg.field.name = "affine";
    cfg.field.a = -1.0;
    cfg.y0 = 1.0;
    cfg.tJ = 3.0;
    cfg.ell = 1;
    cfg.rho = 0.3;
    cfg.sampling_mode = SamplingMode::Uniform;
    cfg.J = 10;
    cfg.lambda = 0.5;
    const auto r = certify_experiment(cfg);
    ++rejected;
    if (r.certificate.feasible() || r.verdict != "not-certified") {
      o.fail("run with J h lambda = 1.5 was certified");
    }
  }
  if (feasible == 0) o.fail("no feasible continuous certificate");
  o.detail = std::to_string(feasible) + " feasible runs sound, " + std::to_string(rejected) +
             " configurations with J h lambda >= 1 rejected, max measured/bound = " + num(worst_ratio);
  return o;
}

Outcome criterion_shadowing(BatteryState& st) {
  Outcome o;
  std::size_t feasible = 0;
  std::size_t found = 0;
  double worst_reeval = 0.0;
  for (const auto& bc : st.cases) {
    auto cfg = bc.config;
    cfg.x0 = cfg.y0 + 0.02;
    cfg.workers = 4;
    try {
      const auto r = certify_experiment(cfg);
      if (!r.certificate.feasible()) {
        continue;
      }
      ++feasible;
      const double epsilon = 0.02 + cfg.rho;
      ShadowOptions options;
      options.workers = 4;
      const auto s = shadowing_search(r.run.problem, r.run.truncated, epsilon, 0.1, kDefaultShadowBudget, options);
      const double again = shadow_objective(r.run.problem, r.run.truncated, s.y0_star, options.reference);
      worst_reeval = std::max(worst_reeval, std::abs(again - s.achieved_error));
      if (!s.found || s.achieved_error > epsilon) {
        o.fail(bc.label + ": no shadowing orbit, best " + num(s.achieved_error));
      } else {
        ++found;
      }
      if (std::abs(again - s.achieved_error) > 1e-10) {
        o.fail(bc.label + ": re-evaluated phi differs by " + num(std::abs(again - s.achieved_error)));
      }
    } catch (const Error& e) {
      o.fail(bc.label + ": " + e.what());
    }
  }
  if (feasible == 0) o.fail("no feasible certified run");
  o.detail = std::to_string(found) + "/" + std::to_string(feasible) + " feasible runs shadowed, max |phi re-eval diff| = " +
             num(worst_reeval);
  return o;
}

Outcome criterion_formulas() {
  Outcome o;
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = 0.0;
  double worst_safe = -std::numeric_limits<double>::infinity();
  const auto check = [&](const std::string& what, double got, double want) {
    const double err = std::abs(got - want) / std::max(1.0, std::abs(want));
    if (!std::isinf(want) || !std::isinf(got)) {
      worst = std::max(worst, err);
    }
    if (!close_rel(got, want, 1e-12)) {
      o.fail(what + ": module " + num(got) + " vs oracle " + num(want));
    }
  };
  for (int trial = 0; trial < 100; ++trial) {
    const double K = U(rng) < 0.2 ? 0.0 : 0.95 * U(rng);
    const double K1 = U(rng) < 0.4 ? 0.0 : 0.5 * U(rng);
    const double F0 = 0.1 + 2.9 * U(rng);
    const int ell = static_cast<int>(rng() % 5);
    const double rho = 0.01 + 0.98 * U(rng);
    const std::size_t J = 1 + rng() % 50;
    const double h = 0.2 * U(rng) + 1e-4;
    const BoundConstants c{K, K1, F0, {}};
    const std::string tag = "trial " + std::to_string(trial);

    check(tag + " A_x", compute_aggregate(c, ell, AggregateMode::Approx), o_aggregate(K, K1, F0, ell, 0, true));
    check(tag + " A", compute_aggregate(c, ell, AggregateMode::True), o_aggregate(K, K1, F0, ell, 1, true));
    check(tag + " A_x0", compute_aggregate(c, ell, AggregateMode::ApproxZeroK1),
          o_aggregate(K, K1, F0, ell, 0, false));

    const double A = o_aggregate(K, K1, F0, ell, 1, true);
    const auto hb = closed_form_h_bound_detail(A, ell, rho, J);
    const auto ob = o_h_bound(A, ell, rho, J);
    check(tag + " printed", hb.printed, ob.printed);
    check(tag + " solved", hb.solved, ob.solved);
    check(tag + " h bound", hb.value, std::min(ob.printed, ob.solved));
    worst_safe = std::max(worst_safe, hb.value - ob.solved);
    if (hb.value > ob.solved + 1e-9) {
      o.fail(tag + ": returned bound exceeds the solved recursion");
    }

    const double B = o_B(K, K1, ell, rho, h);
    check(tag + " B(h)", segment_growth(c, ell, rho, h), B);
    const double Jd = static_cast<double>(J);
    const double e0 = 0.05 * U(rng);

    const auto cu = certify_unperturbed(c, ell, rho, J, h, e0);
    check(tag + " unperturbed eps", cu.epsilon, e0 + rho);
    check(tag + " unperturbed eps1", cu.epsilon1, rho);
    if (cu.feasibility.h_admissible != (h <= std::min(ob.printed, ob.solved) * (1.0 + 1e-12))) {
      o.fail(tag + ": admissibility flag disagrees");
    }

    std::vector<double> gs(J);
    double gsum = 0.0;
    double gmax = 0.0;
    for (auto& g : gs) {
      g = e0 + 0.02 * U(rng);
      gsum += g;
      gmax = std::max(gmax, g);
    }
    const auto ci = certify_impulsive(c, ell, rho, J, h, gs, e0);
    check(tag + " impulsive eps1", ci.epsilon1, rho + gsum);
    check(tag + " impulsive eps", ci.epsilon, rho + gsum + e0);
    check(tag + " rho_bar", ci.rho_bar, Jd * h * B);
    check(tag + " impulsive eps1 uniform", ci.epsilon1_uniform, Jd * h * B + Jd * gmax);
    if (ci.feasibility.budget_ok != (Jd * h * B <= rho)) {
      o.fail(tag + ": budget flag disagrees");
    }

    std::vector<double> hs(J);
    std::vector<double> ls(J);
    double S = 0.0;
    double hmax = 0.0;
    double lmax = 0.0;
    double growth = 0.0;
    for (std::size_t i = 0; i < J; ++i) {
      hs[i] = h * (0.5 + 0.5 * U(rng));
      ls[i] = U(rng) / (Jd * h);
      S += hs[i] * ls[i];
      hmax = std::max(hmax, hs[i]);
      lmax = std::max(lmax, ls[i]);
      growth += hs[i] * o_B(K, K1, ell, rho, hs[i]);
    }
    const auto cc = certify_continuous(c, ell, rho, J, hs, ls, gs, e0);
    const double Uu = Jd * hmax * lmax;
    const double core = e0 + growth + gsum;
    const double ucore = Jd * hmax * o_B(K, K1, ell, rho, hmax) + Jd * gmax;
    const double inf = std::numeric_limits<double>::infinity();
    check(tag + " S", cc.contraction_sum, S);
    check(tag + " sup (per point)", cc.sup_bound, S < 1.0 ? core / (1.0 - S) : inf);
    check(tag + " deviation (per point)", cc.deviation_bound, S < 1.0 ? S / (1.0 - S) * core : inf);
    check(tag + " sup (uniform)", cc.sup_bound_uniform, Uu < 1.0 ? (e0 + ucore) / (1.0 - Uu) : inf);
    check(tag + " deviation (uniform)", cc.deviation_bound_uniform, Uu < 1.0 ? Uu / (1.0 - Uu) * ucore : inf);
    if (cc.feasibility.lambda_contraction != (Uu < 1.0)) {
      o.fail(tag + ": contraction flag disagrees");
    }
  }
  o.detail = "100 random inputs, max relative deviation " + num(worst) + ", max (returned - solved) = " +
             num(worst_safe);
  return o;
}

Outcome criterion_monotonicity() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::size_t checks = 0;
  const auto expect_ge = [&](const std::string& what, double bigger, double smaller) {
    ++checks;
    if (!(bigger >= smaller)) {
      o.fail(what + ": " + num(bigger) + " < " + num(smaller));
    }
  };
  for (int trial = 0; trial < 50; ++trial) {
    const BoundConstants c{0.9 * U(rng), U(rng) < 0.5 ? 0.0 : 0.3 * U(rng), 0.2 + U(rng), {}};
    const int ell = static_cast<int>(rng() % 4);
    const double rho = 0.05 + 0.8 * U(rng);
    const std::size_t J = 1 + rng() % 20;
    const double h = 0.01 + 0.05 * U(rng);
    const double e0 = 0.02 * U(rng);
    const double g = e0 + 0.02 * U(rng);
    const double lambda = 0.5 * U(rng);
    const auto imp = [&](double r, double e, double gg, std::size_t j, double hh) {
      return certify_impulsive(c, ell, r, j, hh, {gg}, e).epsilon;
    };
    const auto cont = [&](double r, double e, double gg, double l, std::size_t j, double hh) {
      return certify_continuous(c, ell, r, j, {hh}, {l}, {gg}, e).certified_bound();
    };
    const std::string tag = "trial " + std::to_string(trial);
    const double bi = imp(rho, e0, g, J, h);
    expect_ge(tag + " rho", imp(std::min(rho + 0.1, 0.99), e0, g, J, h), bi);
    expect_ge(tag + " e0", imp(rho, e0 + 0.001, g + 0.001, J, h), bi);
    expect_ge(tag + " gbar", imp(rho, e0, g + 0.01, J, h), bi);
    expect_ge(tag + " J", imp(rho, e0, g, J + 1, h), bi);
    expect_ge(tag + " h", imp(rho, e0, g, J, 2 * h), bi);
    expect_ge(tag + " unperturbed e0", certify_unperturbed(c, ell, rho, J, h, e0 + 0.01).epsilon,
              certify_unperturbed(c, ell, rho, J, h, e0).epsilon);

    const double bc = cont(rho, e0, g, lambda, J, h);
    expect_ge(tag + " cont rho", cont(std::min(rho + 0.1, 0.99), e0, g, lambda, J, h), bc);
    expect_ge(tag + " cont e0", cont(rho, e0 + 0.001, g, lambda, J, h), bc);
    expect_ge(tag + " cont gbar", cont(rho, e0, g + 0.01, lambda, J, h), bc);
    expect_ge(tag + " cont lambda", cont(rho, e0, g, lambda + 0.1, J, h), bc);
    expect_ge(tag + " cont J", cont(rho, e0, g, lambda, J + 1, h), bc);
    expect_ge(tag + " cont h", cont(rho, e0, g, lambda, J, 1.5 * h), bc);
  }

  // Sampling classes: C_{Jh} grows with h.
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> pts{0.0};
    const std::size_t J = 1 + rng() % 10;
    for (std::size_t i = 0; i < J; ++i) {
      pts.push_back(pts.back() + 0.01 + 0.1 * U(rng));
    }
    const auto seq = SamplingSequence::from_points(pts);
    const double h = seq.envelope();
    ++checks;
    if (!class_membership(seq, J, h) || !class_membership(seq, J, h * 1.5) || class_membership(seq, J, h * 0.99) ||
        class_membership(seq, J + 1, h)) {
      o.fail("class membership rule violated on trial " + std::to_string(trial));
    }
  }

  // Pseudo-orbit classes: CO(C_{Jh}, delta) grows with h and delta.
  OdeProblem p;
  p.field = Field::logistic();
  p.y0 = 0.3;
  p.theta = 0.3;
  p.tJ = 0.4;
  std::vector<PseudoOrbit> orbits;
  for (const auto& pts : std::vector<std::vector<double>>{
           {0.0, 0.1, 0.2, 0.3, 0.4}, {0.0, 0.05, 0.2, 0.35, 0.4}, {0.0, 0.15, 0.25, 0.3, 0.4}}) {
    const auto seq = SamplingSequence::from_points(pts);
    for (int ell : {0, 1}) {
      auto x = std::make_shared<const Trajectory>(integrate_truncated(p, seq, ell, 0.31));
      orbits.push_back(make_pseudo_orbit(x, integrate_reference(p, 0.3, seq)));
    }
  }
  std::size_t prev_size = 0;
  for (double h : {0.1, 0.12, 0.15, 0.2}) {
    for (double delta : {0.005, 0.01, 0.02, 0.05}) {
      const auto small = pseudo_orbit_class(orbits, 4, h + 1e-12, delta);
      const auto wider = pseudo_orbit_class(orbits, 4, h + 0.05, delta);
      const auto looser = pseudo_orbit_class(orbits, 4, h + 1e-12, delta * 2);
      ++checks;
      for (const auto& orb : small) {
        const auto in = [&](const std::vector<PseudoOrbit>& set) {
          return std::any_of(set.begin(), set.end(), [&](const PseudoOrbit& q) { return q.source == orb.source; });
        };
        if (!in(wider) || !in(looser)) {
          o.fail("pseudo-orbit class not monotone at h=" + num(h) + ", delta=" + num(delta));
        }
      }
      prev_size = std::max(prev_size, small.size());
    }
  }
  if (prev_size == 0) o.fail("pseudo-orbit classes were all empty");

  // First exit on the analytic examples.
  const double e1 = first_exit([](double t) { return t; }, 0.0, 0.25, 1.0);
  const double e2 = first_exit([](double t) { return 1.0 - std::exp(-t); }, 0.0, 0.5, 2.0);
  const double e3 = first_exit([](double) { return 0.7; }, 0.0, 0.5, 1.5);
  checks += 3;
  if (std::abs(e1 - 0.25) > 1e-8) o.fail("linear first exit " + num(e1));
  if (std::abs(e2 - std::log(2.0)) > 1e-8) o.fail("exponential first exit " + num(e2));
  if (e3 != 1.5) o.fail("constant trajectory should never exit");

  o.detail = std::to_string(checks) + " checks; first exits " + num(e1) + ", " + num(e2) + ", " + num(e3);
  return o;
}

template <class Fn>
void run_criterion(int id, const char* title, Fn&& fn, double limit = -1.0) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o.fail(std::string("unexpected exception: ") + e.what());
  }
  const double secs = seconds_since(start);
  if (limit > 0.0 && secs > limit) {
    o.fail("runtime " + num(secs) + " s above " + num(limit) + " s");
  }
  report(id, title, o, secs);
}

}  // namespace

int main() {
  BatteryState st;
  st.cases = battery();

  run_criterion(1, "Euler equivalence", criterion_euler, 1.0);
  run_criterion(2, "affine and Riccati exactness", criterion_exactness, 2.0);
  run_criterion(3, "unperturbed certificate soundness", [&] { return criterion_unperturbed(st); }, 60.0);
  run_criterion(4, "impulsive certificate soundness", [&] { return criterion_impulsive(st); });
  run_criterion(5, "continuous certificate soundness and feasibility gate",
                [&] { return criterion_continuous(st); });
  run_criterion(6, "deviation confinement", [&] {
    Outcome o = st.confinement;
    if (st.admissible_runs == 0) o.fail("no admissible runs");
    o.detail = std::to_string(st.admissible_runs) + " admissible runs, max excursion - rho/2 = " +
               num(st.worst_confinement);
    return o;
  });
  run_criterion(7, "shadowing realization", [&] { return criterion_shadowing(st); });
  run_criterion(8, "bound-formula cross-checks", criterion_formulas);
  run_criterion(9, "monotonicity suite", criterion_monotonicity);

  std::printf("%s: %d criteria failed\n", g_failed == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", g_failed);
  return g_failed == 0 ? 0 : 1;
}
