#include "taylorcert/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "taylorcert/errors.hpp"

namespace taylorcert {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::size_t kMaxAutoRebuilds = 50;
constexpr std::size_t kMaxSamplingPoints = 1'000'000;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::Config, what); }

void reject_unknown(const ojson& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) {
    config_error(where + " must be an object");
  }
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      config_error("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <class T>
void read(const ojson& obj, const char* key, T& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) {
    out = obj.at(key).get<T>();
  }
}

template <class T>
void read(const ojson& obj, const char* key, std::optional<T>& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) {
    out = obj.at(key).get<T>();
  }
}

template <class T>
ojson opt(const std::optional<T>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::set<std::string> field_params(const std::string& name) {
  if (name == "polynomial") return {"coeffs"};
  if (name == "affine") return {"a", "b"};
  if (name == "constant") return {"c"};
  if (name == "riccati") return {"q"};
  if (name == "damped_driven") return {"damping", "amplitude", "frequency"};
  if (name == "bounded_sine") return {"scale"};
  if (name == "zero" || name == "logistic") return {};
  config_error("unknown field '" + name + "'");
}

const char* mode_name(SamplingMode m) {
  switch (m) {
    case SamplingMode::Auto: return "auto";
    case SamplingMode::Uniform: return "uniform";
    case SamplingMode::Explicit: return "explicit";
  }
  return "auto";
}

}  // namespace

Field FieldSpec::build() const {
  if (name == "zero") return Field::zero();
  if (name == "constant") return Field::constant(c);
  if (name == "affine") return Field::affine(a, b);
  if (name == "logistic") return Field::logistic();
  if (name == "riccati") return Field::riccati(q);
  if (name == "polynomial") return Field::polynomial(coeffs);
  if (name == "damped_driven") return Field::damped_driven(damping, amplitude, frequency);
  if (name == "bounded_sine") return Field::bounded_sine(scale);
  config_error("unknown field '" + name + "'");
}

OdeProblem ExperimentConfig::problem() const {
  OdeProblem p;
  p.field = field.build();
  p.smoothness_order = n;
  p.t0 = t0;
  p.tJ = tJ;
  p.y0 = y0;
  p.theta = theta;
  return p;
}

PerturbationSpec ExperimentConfig::perturbation() const {
  PerturbationSpec spec;
  spec.impulses = impulses;
  spec.uniform_impulse = impulse;
  spec.impulse_cap = impulse_cap;
  if (lambda != 0.0) {
    const double value = lambda;
    spec.lambda_fn = [value](double) { return value; };
  }
  return spec;
}

void ExperimentConfig::validate() const {
  field_params(field.name);
  if (!(tJ > t0)) config_error("problem.tJ must exceed problem.t0");
  if (!(theta >= 0.0)) config_error("problem.theta must be >= 0");
  if (n < 0) config_error("problem.n must be >= 0");
  if (ell < 0 || ell > n) config_error("ell must lie in [0, n]");
  if (!(rho > 0.0 && rho < 1.0)) config_error("budget.rho must lie in (0, 1)");
  if (rho_x && !(*rho_x > 0.0 && *rho_x < 1.0)) config_error("budget.rho_x must lie in (0, 1)");
  if (sampling_mode == SamplingMode::Uniform && !h && !J) config_error("uniform sampling needs sampling.h or sampling.J");
  if (h && !(*h > 0.0)) config_error("sampling.h must be > 0");
  if (J && *J == 0) config_error("sampling.J must be >= 1");
  if (sampling_mode == SamplingMode::Explicit) {
    if (points.size() < 2) config_error("explicit sampling needs at least two points");
    if (points.front() != t0 || points.back() != tJ) config_error("explicit sampling must start at t0 and end at tJ");
  }
  if (lambda < 0.0) config_error("perturbation.lambda must be >= 0");
  if (impulse_cap && *impulse_cap < 0.0) config_error("perturbation.impulse_cap must be >= 0");
  if (grid_density < 2) config_error("constants.grid_density must be >= 2");
  if (oracle_steps_per_unit == 0 || dense_intervals == 0) config_error("oracle settings must be positive");
  if (shadow_epsilon && !(*shadow_epsilon > 0.0)) config_error("shadow.epsilon must be > 0");
  if (!(shadow_halfwidth >= 0.0)) config_error("shadow.halfwidth must be >= 0");
  if (workers == 0) config_error("workers must be >= 1");
  for (int e : sweep_ell) {
    if (e < 0 || e > n) config_error("sweep.ell entries must lie in [0, n]");
  }
  for (double r : sweep_rho) {
    if (!(r > 0.0 && r < 1.0)) config_error("sweep.rho entries must lie in (0, 1)");
  }
  for (double v : sweep_h) {
    if (!(v > 0.0)) config_error("sweep.h entries must be > 0");
  }
  for (double v : sweep_gbar) {
    if (!(v >= 0.0)) config_error("sweep.gbar entries must be >= 0");
  }
  for (double v : sweep_lambda) {
    if (!(v >= 0.0)) config_error("sweep.lambda entries must be >= 0");
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  ExperimentConfig cfg;
  try {
    const ojson root = ojson::parse(json_text);
    reject_unknown(root,
                   {"problem", "ell", "budget", "sampling", "x0", "perturbation", "constants", "oracle", "shadow",
                    "sweep", "output", "workers", "seed"},
                   "config");
    if (root.contains("problem")) {
      const auto& p = root.at("problem");
      reject_unknown(p, {"field", "params", "t0", "tJ", "y0", "theta", "n"}, "problem");
      read(p, "field", cfg.field.name);
      if (p.contains("params")) {
        const auto& params = p.at("params");
        reject_unknown(params, field_params(cfg.field.name), "problem.params");
        read(params, "coeffs", cfg.field.coeffs);
        read(params, "a", cfg.field.a);
        read(params, "b", cfg.field.b);
        read(params, "c", cfg.field.c);
        read(params, "q", cfg.field.q);
        read(params, "damping", cfg.field.damping);
        read(params, "amplitude", cfg.field.amplitude);
        read(params, "frequency", cfg.field.frequency);
        read(params, "scale", cfg.field.scale);
      }
      read(p, "t0", cfg.t0);
      read(p, "tJ", cfg.tJ);
      read(p, "y0", cfg.y0);
      read(p, "theta", cfg.theta);
      read(p, "n", cfg.n);
    }
    read(root, "ell", cfg.ell);
    if (root.contains("budget")) {
      const auto& b = root.at("budget");
      reject_unknown(b, {"rho", "rho_x"}, "budget");
      read(b, "rho", cfg.rho);
      read(b, "rho_x", cfg.rho_x);
    }
    if (root.contains("sampling")) {
      const auto& s = root.at("sampling");
      reject_unknown(s, {"mode", "h", "J", "points"}, "sampling");
      std::string mode = "auto";
      read(s, "mode", mode);
      if (mode == "auto") {
        cfg.sampling_mode = SamplingMode::Auto;
      } else if (mode == "uniform") {
        cfg.sampling_mode = SamplingMode::Uniform;
      } else if (mode == "explicit") {
        cfg.sampling_mode = SamplingMode::Explicit;
      } else {
        config_error("sampling.mode must be auto, uniform or explicit");
      }
      read(s, "h", cfg.h);
      read(s, "J", cfg.J);
      read(s, "points", cfg.points);
    }
    read(root, "x0", cfg.x0);
    if (root.contains("perturbation")) {
      const auto& p = root.at("perturbation");
      reject_unknown(p, {"impulse", "impulses", "impulse_cap", "lambda"}, "perturbation");
      read(p, "impulse", cfg.impulse);
      read(p, "impulses", cfg.impulses);
      read(p, "impulse_cap", cfg.impulse_cap);
      read(p, "lambda", cfg.lambda);
    }
    if (root.contains("constants")) {
      const auto& c = root.at("constants");
      reject_unknown(c, {"grid_density", "K", "K1", "F0"}, "constants");
      read(c, "grid_density", cfg.grid_density);
      read(c, "K", cfg.K);
      read(c, "K1", cfg.K1);
      read(c, "F0", cfg.F0);
    }
    if (root.contains("oracle")) {
      const auto& o = root.at("oracle");
      reject_unknown(o, {"steps_per_unit", "dense_intervals", "richardson"}, "oracle");
      read(o, "steps_per_unit", cfg.oracle_steps_per_unit);
      read(o, "dense_intervals", cfg.dense_intervals);
      read(o, "richardson", cfg.richardson);
    }
    if (root.contains("shadow")) {
      const auto& s = root.at("shadow");
      reject_unknown(s, {"epsilon", "halfwidth", "budget_evals"}, "shadow");
      read(s, "epsilon", cfg.shadow_epsilon);
      read(s, "halfwidth", cfg.shadow_halfwidth);
      read(s, "budget_evals", cfg.shadow_budget);
    }
    if (root.contains("sweep")) {
      const auto& s = root.at("sweep");
      reject_unknown(s, {"ell", "rho", "h", "gbar", "lambda", "random"}, "sweep");
      read(s, "ell", cfg.sweep_ell);
      read(s, "rho", cfg.sweep_rho);
      read(s, "h", cfg.sweep_h);
      read(s, "gbar", cfg.sweep_gbar);
      read(s, "lambda", cfg.sweep_lambda);
      read(s, "random", cfg.sweep_random);
    }
    if (root.contains("output")) {
      const auto& o = root.at("output");
      reject_unknown(o, {"dir"}, "output");
      read(o, "dir", cfg.output_dir);
    }
    read(root, "workers", cfg.workers);
    read(root, "seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("malformed config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    config_error("cannot read config file " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

namespace {

ojson config_json(const ExperimentConfig& c) {
  ojson params = ojson::object();
  for (const auto& key : field_params(c.field.name)) {
    if (key == "coeffs") params["coeffs"] = c.field.coeffs;
    if (key == "a") params["a"] = c.field.a;
    if (key == "b") params["b"] = c.field.b;
    if (key == "c") params["c"] = c.field.c;
    if (key == "q") params["q"] = c.field.q;
    if (key == "damping") params["damping"] = c.field.damping;
    if (key == "amplitude") params["amplitude"] = c.field.amplitude;
    if (key == "frequency") params["frequency"] = c.field.frequency;
    if (key == "scale") params["scale"] = c.field.scale;
  }
  ojson j;
  j["problem"] = {{"field", c.field.name}, {"params", params}, {"t0", c.t0}, {"tJ", c.tJ},
                  {"y0", c.y0},           {"theta", c.theta}, {"n", c.n}};
  j["ell"] = c.ell;
  j["budget"] = {{"rho", c.rho}, {"rho_x", opt(c.rho_x)}};
  j["sampling"] = {{"mode", mode_name(c.sampling_mode)}, {"h", opt(c.h)}, {"J", opt(c.J)}, {"points", c.points}};
  j["x0"] = opt(c.x0);
  j["perturbation"] = {{"impulse", opt(c.impulse)},
                       {"impulses", c.impulses},
                       {"impulse_cap", opt(c.impulse_cap)},
                       {"lambda", c.lambda}};
  j["constants"] = {{"grid_density", c.grid_density}, {"K", opt(c.K)}, {"K1", opt(c.K1)}, {"F0", opt(c.F0)}};
  j["oracle"] = {{"steps_per_unit", c.oracle_steps_per_unit},
                 {"dense_intervals", c.dense_intervals},
                 {"richardson", c.richardson}};
  j["shadow"] = {{"epsilon", opt(c.shadow_epsilon)},
                 {"halfwidth", c.shadow_halfwidth},
                 {"budget_evals", c.shadow_budget}};
  j["sweep"] = {{"ell", c.sweep_ell},     {"rho", c.sweep_rho},       {"h", c.sweep_h},
                {"gbar", c.sweep_gbar}, {"lambda", c.sweep_lambda}, {"random", c.sweep_random}};
  j["output"] = {{"dir", c.output_dir}};
  j["workers"] = c.workers;
  j["seed"] = c.seed;
  return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config, int indent) { return config_json(config).dump(indent); }

BoundConstants resolve_constants(const ExperimentConfig& config, const OdeProblem& problem) {
  BoundConstants c;
  if (!(config.K && config.K1 && config.F0)) {
    c = estimate_constants(problem, std::min(config.ell + 1, problem.smoothness_order), config.grid_density);
  }
  if (config.K) c.K = *config.K;
  if (config.K1) c.K1 = *config.K1;
  if (config.F0) c.F0 = *config.F0;
  if (c.K < 0.0 || c.K1 < 0.0 || c.F0 < 0.0) {
    config_error("constants K, K1, F0 must be >= 0");
  }
  return c;
}

namespace {

HBound bound_at(double A, int ell, double rho, std::size_t J) {
  if (A > 0.0) {
    return closed_form_h_bound_detail(A, ell, rho, J);
  }
  const double inf = std::numeric_limits<double>::infinity();
  return HBound{inf, inf, inf, inf, inf};
}

}  // namespace

SamplingPlan plan_sampling(const ExperimentConfig& config, const OdeProblem& problem,
                           const BoundConstants& constants) {
  SamplingPlan plan;
  const int ell = config.ell;
  const double rho = config.rho;
  plan.A_value = compute_aggregate(constants, ell, AggregateMode::True);
  plan.A_x = compute_aggregate(constants, ell, AggregateMode::Approx);
  plan.A_x_alternate = compute_aggregate_alternate(constants, ell);
  plan.A_x0 = compute_aggregate(constants, ell, AggregateMode::ApproxZeroK1);
  const double window = problem.window();

  switch (config.sampling_mode) {
    case SamplingMode::Explicit:
      plan.sequence = SamplingSequence::from_points(config.points);
      break;
    case SamplingMode::Uniform: {
      std::size_t J = 0;
      if (config.J) {
        J = *config.J;
      } else {
        J = static_cast<std::size_t>(std::ceil(window / *config.h * (1.0 - 1e-12)));
      }
      plan.sequence = SamplingSequence::uniform(problem.t0, problem.tJ, std::max<std::size_t>(J, 1));
      break;
    }
    case SamplingMode::Auto: {
      std::size_t J = 1;
      if (config.J) {
        J = *config.J;
      } else if (plan.A_value > 0.0) {
        // J * saturation grows with J while J * accumulation shrinks, so once the
        // saturation term alone covers the window a larger J cannot help.
        for (;;) {
          const HBound b = bound_at(plan.A_value, ell, rho, J);
          const double Jd = static_cast<double>(J);
          if (Jd * b.value >= window) {
            break;
          }
          if (Jd * b.saturation >= window || ++J > kMaxSamplingPoints) {
            throw Error(ErrorKind::InfeasibleBudget,
                        "no J makes J * h_bound(J) cover the time window of length " + std::to_string(window));
          }
        }
      }
      const PerturbationSpec pert = config.perturbation();
      for (;;) {
        StepBudget budget;
        budget.rho = rho;
        budget.rho_x = config.rho_x.value_or(rho);
        budget.ell = ell;
        budget.A_value = plan.A_value;
        budget.closed_form_bound = bound_at(plan.A_value, ell, rho, J).value;
        const JointFlowProbe probe(problem, ell, config.initial_x(), config.y0, pert,
                                   IntegrationOptions{config.dense_intervals, kFlowSubsteps},
                                   ReferenceOptions{config.oracle_steps_per_unit, config.dense_intervals, false,
                                                    pert.lambda_fn});
        plan.sequence = build_sampling(problem, budget, probe);
        plan.exit_thresholds = budget.exit_thresholds;
        if (plan.sequence.count() <= J) {
          plan.budget_J = J;
          break;
        }
        J = plan.sequence.count();
        if (++plan.rebuilds > kMaxAutoRebuilds) {
          throw Error(ErrorKind::InfeasibleBudget, "automatic sampling did not settle on a gap count");
        }
      }
      break;
    }
  }
  if (plan.budget_J == 0) {
    plan.budget_J = plan.sequence.count();
  }
  plan.h_bound = bound_at(plan.A_value, ell, rho, plan.sequence.count());
  return plan;
}

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  RunResult run;
  run.config = config;
  run.problem = config.problem();
  run.problem.validate();
  run.constants = resolve_constants(config, run.problem);
  run.plan = plan_sampling(config, run.problem, run.constants);
  const PerturbationSpec pert = config.perturbation();
  run.truncated = integrate_truncated(run.problem, run.plan.sequence, config.ell, config.initial_x(), &pert,
                                      IntegrationOptions{config.dense_intervals, kFlowSubsteps});
  run.reference = integrate_reference(
      run.problem, config.y0, run.plan.sequence,
      ReferenceOptions{config.oracle_steps_per_unit, config.dense_intervals, config.richardson, pert.lambda_fn});
  run.error = error_trajectory(run.reference, run.truncated);
  run.x_excursions = segment_excursions(run.truncated);
  run.y_excursions = segment_excursions(run.reference);
  return run;
}

ErrorCertificate certificate_for(const RunResult& run) {
  const auto& cfg = run.config;
  const auto& seq = run.plan.sequence;
  const std::size_t J = seq.count();
  const double e0 = cfg.y0 - cfg.initial_x();
  const PerturbationSpec pert = cfg.perturbation();
  if (pert.has_lambda()) {
    return certify_continuous(run.constants, cfg.ell, cfg.rho, J, seq.gaps(), pert.lambda_caps(seq),
                              pert.impulse_caps(J), e0);
  }
  if (pert.has_impulses() || pert.effective_cap() > 0.0) {
    return certify_impulsive(run.constants, cfg.ell, cfg.rho, J, seq.envelope(), pert.impulse_caps(J), e0);
  }
  return certify_unperturbed(run.constants, cfg.ell, cfg.rho, J, seq.envelope(), e0);
}

CertifyResult certify_experiment(const ExperimentConfig& config) {
  CertifyResult result;
  result.run = run_experiment(config);
  result.certificate = certificate_for(result.run);
  const auto& stats = *result.run.error.error_stats;
  result.measured_max_error = stats.max_abs;
  result.measured_segment_deviation = stats.max_segment_deviation;
  if (!result.certificate.feasible()) {
    result.verdict = "not-certified";
  } else {
    bool sound = result.measured_max_error <= result.certificate.certified_bound();
    if (result.certificate.kind == CertificateKind::Unperturbed) {
      sound = sound && result.measured_segment_deviation <= result.certificate.rho;
    }
    result.verdict = sound ? "sound" : "unsound";
  }
  return result;
}

ShadowOutcome shadow_experiment(const ExperimentConfig& config) {
  ShadowOutcome out;
  out.certified = certify_experiment(config);
  const auto& run = out.certified.run;
  const auto& cert = out.certified.certificate;
  const double e0 = config.y0 - config.initial_x();
  out.epsilon = config.shadow_epsilon.value_or(std::abs(e0) + cert.epsilon1);
  ShadowOptions options;
  options.workers = config.workers;
  options.reference = ReferenceOptions{config.oracle_steps_per_unit, config.dense_intervals, false,
                                       config.perturbation().lambda_fn};
  out.shadow = shadowing_search(run.problem, run.truncated, out.epsilon, config.shadow_halfwidth,
                                config.shadow_budget, options);
  out.reevaluated_error = shadow_objective(run.problem, run.truncated, out.shadow.y0_star, options.reference);
  out.constraints = shadow_constraint_report(cert, out.epsilon, e0);
  return out;
}

std::vector<ExperimentConfig> sweep_points(const ExperimentConfig& config) {
  const auto ells = config.sweep_ell.empty() ? std::vector<int>{config.ell} : config.sweep_ell;
  const auto rhos = config.sweep_rho.empty() ? std::vector<double>{config.rho} : config.sweep_rho;
  const auto gbars = config.sweep_gbar.empty() ? std::vector<double>{config.impulse.value_or(0.0)} : config.sweep_gbar;
  const auto lambdas = config.sweep_lambda.empty() ? std::vector<double>{config.lambda} : config.sweep_lambda;
  std::vector<std::optional<double>> hs;
  if (config.sweep_h.empty()) {
    hs.emplace_back(std::nullopt);
  } else {
    for (double h : config.sweep_h) {
      hs.emplace_back(h);
    }
  }

  const auto make = [&](int ell, double rho, std::optional<double> h, double g, double lambda) {
    ExperimentConfig c = config;
    c.sweep_ell.clear();
    c.sweep_rho.clear();
    c.sweep_h.clear();
    c.sweep_gbar.clear();
    c.sweep_lambda.clear();
    c.sweep_random = 0;
    c.ell = ell;
    c.rho = rho;
    if (h) {
      c.sampling_mode = SamplingMode::Uniform;
      c.h = h;
      c.J.reset();
    }
    if (!config.sweep_gbar.empty()) {
      c.impulses.clear();
      if (g > 0.0) {
        c.impulse = g;
        c.impulse_cap = g;
      } else {
        c.impulse.reset();
        c.impulse_cap.reset();
      }
    }
    c.lambda = lambda;
    return c;
  };

  std::vector<ExperimentConfig> points;
  for (int ell : ells) {
    for (double rho : rhos) {
      for (const auto& h : hs) {
        for (double g : gbars) {
          for (double lambda : lambdas) {
            points.push_back(make(ell, rho, h, g, lambda));
          }
        }
      }
    }
  }

  std::mt19937_64 rng(config.seed);
  const auto pick_range = [&](const std::vector<double>& values) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return *lo + (*hi - *lo) * std::generate_canonical<double, 53>(rng);
  };
  for (std::size_t k = 0; k < config.sweep_random; ++k) {
    const int ell = ells[static_cast<std::size_t>(rng() % ells.size())];
    const double rho = pick_range(rhos);
    std::optional<double> h;
    if (!config.sweep_h.empty()) {
      h = pick_range(config.sweep_h);
    }
    const double g = pick_range(gbars);
    const double lambda = pick_range(lambdas);
    points.push_back(make(ell, rho, h, g, lambda));
  }
  return points;
}

std::vector<SweepRow> sweep_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto points = sweep_points(config);
  std::vector<SweepRow> rows(points.size());
  const auto evaluate = [&](std::size_t i) {
    const auto& c = points[i];
    SweepRow& row = rows[i];
    row.index = i;
    row.ell = c.ell;
    row.rho = c.rho;
    row.h = config.sweep_h.empty() ? std::nullopt : c.h;
    row.gbar = c.impulse.value_or(0.0);
    row.lambda = c.lambda;
    try {
      ExperimentConfig single = c;
      single.workers = 1;
      const auto out = shadow_experiment(single);
      const auto& cert = out.certified.certificate;
      row.J = out.certified.run.plan.sequence.count();
      row.envelope = out.certified.run.plan.sequence.envelope();
      row.kind = to_string(cert.kind);
      row.feasible = cert.feasible();
      row.certified = cert.certified_bound();
      row.measured = out.certified.measured_max_error;
      row.verdict = out.certified.verdict;
      row.shadow_found = out.shadow.found;
      row.shadow_error = out.shadow.achieved_error;
      row.shadow_constraints = out.constraints.holds;
    } catch (const Error& e) {
      row.status = std::string(to_string(e.kind()));
      row.message = e.what();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(config.workers, 1, std::max<std::size_t>(points.size(), 1));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < points.size(); i = next++) {
          evaluate(i);
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
  return rows;
}

namespace {

ojson certificate_object(const ErrorCertificate& c) {
  ojson j;
  j["kind"] = to_string(c.kind);
  j["feasible"] = c.feasible();
  j["feasibility"] = {{"h_admissible", c.feasibility.h_admissible},
                      {"lambda_contraction", c.feasibility.lambda_contraction},
                      {"impulse_cap_ok", c.feasibility.impulse_cap_ok},
                      {"budget_ok", c.feasibility.budget_ok}};
  j["rho"] = c.rho;
  j["rho_x"] = c.rho_x;
  j["epsilon1"] = c.epsilon1;
  j["epsilon"] = c.epsilon;
  j["e0_bound"] = c.e0_bound;
  j["delta"] = c.delta;
  j["certified_bound"] = c.certified_bound();
  j["uniform"] = {{"rho_bar", c.rho_bar},
                  {"epsilon1", c.epsilon1_uniform},
                  {"epsilon", c.epsilon_uniform},
                  {"tighter", c.uniform_tighter}};
  if (c.kind == CertificateKind::Continuous) {
    j["continuous"] = {{"contraction_sum", c.contraction_sum},
                       {"contraction_uniform", c.contraction_uniform},
                       {"sup_bound", c.sup_bound},
                       {"deviation_bound", c.deviation_bound},
                       {"sup_bound_uniform", c.sup_bound_uniform},
                       {"deviation_bound_uniform", c.deviation_bound_uniform},
                       {"forcing_assumption", "growth hypothesis applied to the forcing term as for f"}};
  }
  j["inputs"] = {{"K", c.K},         {"K1", c.K1},         {"F0", c.F0},
                 {"ell", c.ell},     {"J", c.J},           {"h", c.h},
                 {"h_bound", c.h_bound}, {"gbar", c.gbar}, {"lambda", c.lambda},
                 {"h_list", c.h_list},   {"gbar_list", c.gbar_list}, {"lambda_list", c.lambda_list}};
  return j;
}

ojson run_object(const RunResult& run, const char* command) {
  ojson j;
  j["command"] = command;
  j["config"] = config_json(run.config);
  j["constants"] = {{"K", run.constants.K},
                    {"K1", run.constants.K1},
                    {"F0", run.constants.F0},
                    {"derivative_sups", run.constants.derivative_sups}};
  const auto& plan = run.plan;
  j["aggregates"] = {
      {"A", plan.A_value}, {"A_x", plan.A_x}, {"A_x_alternate", plan.A_x_alternate}, {"A_x0", plan.A_x0}};
  j["h_bound"] = {{"J", plan.sequence.count()},
                  {"saturation", plan.h_bound.saturation},
                  {"accumulation", plan.h_bound.accumulation},
                  {"printed", plan.h_bound.printed},
                  {"solved", plan.h_bound.solved},
                  {"value", plan.h_bound.value}};
  j["sampling"] = {{"mode", mode_name(run.config.sampling_mode)},
                   {"J", plan.sequence.count()},
                   {"budget_J", plan.budget_J},
                   {"envelope", plan.sequence.envelope()},
                   {"rebuilds", plan.rebuilds},
                   {"points", plan.sequence.points()},
                   {"gaps", plan.sequence.gaps()},
                   {"exit_thresholds", plan.exit_thresholds}};
  j["oracle"] = {{"error_estimate", run.reference.oracle_error_estimate}, {"flagged", run.reference.oracle_flagged}};
  const auto& s = *run.error.error_stats;
  const auto max_of = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  };
  j["measured"] = {{"max_abs_error", s.max_abs},
                   {"max_sample_increment", s.max_sample_increment},
                   {"max_drift", s.max_drift},
                   {"max_segment_deviation", s.max_segment_deviation},
                   {"segment_deviations", segment_excursions(run.error)},
                   {"max_x_excursion", max_of(run.x_excursions)},
                   {"max_y_excursion", max_of(run.y_excursions)},
                   {"x_excursions", run.x_excursions},
                   {"y_excursions", run.y_excursions}};
  return j;
}

ojson certify_object(const CertifyResult& r, const char* command) {
  ojson j = run_object(r.run, command);
  j["certificate"] = certificate_object(r.certificate);
  j["verdict"] = r.verdict;
  return j;
}

}  // namespace

std::string certificate_json(const ErrorCertificate& cert, int indent) { return certificate_object(cert).dump(indent); }

std::string run_report_json(const RunResult& run) { return run_object(run, "run").dump(2) + "\n"; }

std::string certify_report_json(const CertifyResult& result) {
  return certify_object(result, "certify").dump(2) + "\n";
}

std::string shadow_report_json(const ShadowOutcome& o) {
  ojson j = certify_object(o.certified, "shadow");
  j["shadow"] = {{"found", o.shadow.found},
                 {"y0_star", o.shadow.y0_star},
                 {"achieved_error", o.shadow.achieved_error},
                 {"epsilon", o.shadow.epsilon},
                 {"evaluations", o.shadow.evaluations},
                 {"reevaluated_error", o.reevaluated_error}};
  const auto& c = o.constraints;
  j["shadow_constraints"] = {{"holds", c.holds},
                             {"certificate_feasible", c.certificate_feasible},
                             {"perturbation_sum_ok", c.perturbation_sum_ok},
                             {"per_point", c.per_point},
                             {"per_point_limit", c.per_point_limit},
                             {"sufficient", c.sufficient},
                             {"sufficient_limit", c.sufficient_limit},
                             {"impulsive", c.impulsive},
                             {"impulsive_limit", c.impulsive_limit}};
  return j.dump(2) + "\n";
}

std::string sweep_report_json(const ExperimentConfig& config, const std::vector<SweepRow>& rows) {
  ojson j;
  j["command"] = "sweep";
  j["config"] = config_json(config);
  std::size_t sound = 0;
  std::size_t unsound = 0;
  std::size_t failed = 0;
  for (const auto& r : rows) {
    sound += r.verdict == "sound";
    unsound += r.verdict == "unsound";
    failed += r.status != "ok";
  }
  j["points"] = rows.size();
  j["sound"] = sound;
  j["unsound"] = unsound;
  j["errors"] = failed;
  j["summary_csv"] = "sweep_summary.csv";
  return j.dump(2) + "\n";
}

std::string trajectory_csv(const Trajectory& trajectory) {
  std::string out = "segment,t,value\n";
  for (std::size_t i = 0; i < trajectory.segments.size(); ++i) {
    const auto& seg = trajectory.segments[i];
    for (std::size_t j = 0; j < seg.times.size(); ++j) {
      out += std::to_string(i) + "," + fmt(seg.times[j]) + "," + fmt(seg.values[j]) + "\n";
    }
  }
  return out;
}

std::string sampling_csv(const SamplingSequence& sequence) {
  std::string out = "index,t_i,h_i\n";
  const auto& p = sequence.points();
  for (std::size_t i = 0; i < p.size(); ++i) {
    out += std::to_string(i) + "," + fmt(p[i]) + ",";
    if (i + 1 < p.size()) {
      out += fmt(p[i + 1] - p[i]);
    }
    out += "\n";
  }
  return out;
}

std::string pseudo_orbit_csv(const Trajectory& trajectory) {
  std::string out = "index,t_i,x_i,jump\n";
  const auto& p = trajectory.sampling.points();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double jump = i > 0 && i - 1 < trajectory.jumps.size() ? trajectory.jumps[i - 1] : 0.0;
    out += std::to_string(i) + "," + fmt(p[i]) + "," + fmt(trajectory.sample_values.at(i)) + "," + fmt(jump) + "\n";
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "index,ell,rho,h,gbar,lambda,status,J,envelope,kind,feasible,certified,measured,verdict,shadow_found,"
      "shadow_error,shadow_constraints\n";
  for (const auto& r : rows) {
    out += std::to_string(r.index) + "," + std::to_string(r.ell) + "," + fmt(r.rho) + "," + (r.h ? fmt(*r.h) : "") +
           "," + fmt(r.gbar) + "," + fmt(r.lambda) + "," + r.status + ",";
    if (r.status == "ok") {
      out += std::to_string(r.J) + "," + fmt(r.envelope) + "," + r.kind + "," + (r.feasible ? "true" : "false") +
             "," + fmt(r.certified) + "," + fmt(r.measured) + "," + r.verdict + "," +
             (r.shadow_found ? "true" : "false") + "," + fmt(r.shadow_error) + "," +
             (r.shadow_constraints ? "true" : "false");
    } else {
      out += ",,,,,,,,,";
    }
    out += "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    config_error("cannot write " + path.string());
  }
  out << text;
}

void write_run_outputs(const RunResult& run, const std::string& report_json, const std::filesystem::path& dir) {
  write_text(dir / "run_report.json", report_json);
  write_text(dir / "sampling.csv", sampling_csv(run.plan.sequence));
  write_text(dir / "trajectories" / "truncated.csv", trajectory_csv(run.truncated));
  write_text(dir / "trajectories" / "reference.csv", trajectory_csv(run.reference));
  write_text(dir / "trajectories" / "error.csv", trajectory_csv(run.error));
}

}  // namespace taylorcert
