#include "taylorcert/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "taylorcert/errors.hpp"

namespace taylorcert {

namespace {

std::size_t round_up(std::size_t n, std::size_t multiple) {
  return multiple * std::max<std::size_t>(1, (n + multiple - 1) / multiple);
}

void require_finite(double v, const char* what, double t) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::BlowUp, std::string(what) + " became non-finite at t=" + std::to_string(t));
  }
}

/// Fixed-step RK4 that reports every `record_every`-th node to `sink(k, t, x)`.
template <class Rhs, class Sink>
double rk4_march(const Rhs& rhs, double t_start, double t_end, double x, std::size_t steps,
                 std::size_t record_every, Sink&& sink) {
  const double dt = (t_end - t_start) / static_cast<double>(steps);
  sink(std::size_t{0}, t_start, x);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = dense_time(t_start, t_end, k, steps);
    const double k1 = rhs(t, x);
    const double k2 = rhs(t + 0.5 * dt, x + 0.5 * dt * k1);
    const double k3 = rhs(t + 0.5 * dt, x + 0.5 * dt * k2);
    const double k4 = rhs(t + dt, x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t_next = dense_time(t_start, t_end, k + 1, steps);
    require_finite(x, "solution", t_next);
    if ((k + 1) % record_every == 0) {
      sink(k + 1, t_next, x);
    }
  }
  return x;
}

double taylor_rhs(const std::vector<double>& scaled, double base, double x) {
  const double dx = x - base;
  double acc = 0.0;
  for (std::size_t k = scaled.size(); k-- > 0;) {
    acc = acc * dx + scaled[k];
  }
  return acc;
}

}  // namespace

double PerturbationSpec::impulse(std::size_t j) const {
  if (!impulses.empty()) {
    return j < impulses.size() ? impulses[j] : 0.0;
  }
  return uniform_impulse.value_or(0.0);
}

bool PerturbationSpec::has_impulses() const {
  if (uniform_impulse && impulses.empty() && *uniform_impulse != 0.0) {
    return true;
  }
  return std::any_of(impulses.begin(), impulses.end(), [](double g) { return g != 0.0; });
}

double PerturbationSpec::effective_cap() const {
  if (impulse_cap) {
    return *impulse_cap;
  }
  double cap = impulses.empty() ? std::abs(uniform_impulse.value_or(0.0)) : 0.0;
  for (double g : impulses) {
    cap = std::max(cap, std::abs(g));
  }
  return cap;
}

std::vector<double> PerturbationSpec::impulse_caps(std::size_t J) const {
  std::vector<double> caps(J);
  for (std::size_t j = 0; j < J; ++j) {
    caps[j] = impulse_cap ? *impulse_cap : std::abs(impulse(j));
  }
  return caps;
}

std::vector<double> PerturbationSpec::lambda_caps(const SamplingSequence& seq, std::size_t samples) const {
  std::vector<double> caps(seq.count(), 0.0);
  if (!lambda_fn) {
    return caps;
  }
  samples = std::max<std::size_t>(samples, 1);
  const auto& p = seq.points();
  for (std::size_t i = 0; i < caps.size(); ++i) {
    for (std::size_t j = 0; j <= samples; ++j) {
      const double v = std::abs(lambda_fn(dense_time(p[i], p[i + 1], j, samples)));
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::NumericalDomain, "lambda is not finite on segment " + std::to_string(i));
      }
      caps[i] = std::max(caps[i], v);
    }
  }
  return caps;
}

void PerturbationSpec::validate() const {
  if (impulse_cap && !(*impulse_cap >= 0.0 && std::isfinite(*impulse_cap))) {
    throw Error(ErrorKind::InvalidArgument, "impulse cap must be finite and >= 0");
  }
  const double cap = effective_cap();
  const auto check = [&](double g) {
    if (!std::isfinite(g)) {
      throw Error(ErrorKind::InvalidArgument, "impulses must be finite");
    }
    if (std::abs(g) > cap * (1.0 + 1e-15)) {
      throw Error(ErrorKind::InvalidArgument,
                  "impulse " + std::to_string(g) + " exceeds the declared cap " + std::to_string(cap));
    }
  };
  for (double g : impulses) {
    check(g);
  }
  if (uniform_impulse) {
    check(*uniform_impulse);
  }
}

NodeSolution::NodeSolution(double t_start, double t_end, std::vector<double> values, std::vector<double> slopes)
    : t_start_(t_start), t_end_(t_end), values_(std::move(values)), slopes_(std::move(slopes)) {}

double NodeSolution::operator()(double t) const {
  const std::size_t n = steps();
  if (n == 0) {
    return values_.empty() ? 0.0 : values_.front();
  }
  const double dt = (t_end_ - t_start_) / static_cast<double>(n);
  const double pos = std::clamp((t - t_start_) / dt, 0.0, static_cast<double>(n));
  const std::size_t k = std::min(static_cast<std::size_t>(pos), n - 1);
  const double s = pos - static_cast<double>(k);
  if (s == 0.0) {
    return values_[k];
  }
  if (s == 1.0) {
    return values_[k + 1];
  }
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * values_[k] + h10 * dt * slopes_[k] + h01 * values_[k + 1] + h11 * dt * slopes_[k + 1];
}

NodeSolution rk4_solve(const std::function<double(double, double)>& rhs, double t_start, double t_end,
                       double x_start, std::size_t steps) {
  if (steps == 0 || !(t_end > t_start)) {
    throw Error(ErrorKind::InvalidArgument, "rk4_solve needs steps >= 1 and t_end > t_start");
  }
  std::vector<double> values;
  std::vector<double> slopes;
  values.reserve(steps + 1);
  slopes.reserve(steps + 1);
  rk4_march(rhs, t_start, t_end, x_start, steps, 1, [&](std::size_t, double t, double x) {
    values.push_back(x);
    slopes.push_back(rhs(t, x));
  });
  return NodeSolution(t_start, t_end, std::move(values), std::move(slopes));
}

double dense_time(double t_start, double t_end, std::size_t j, std::size_t intervals) {
  if (j >= intervals) {
    return t_end;
  }
  return t_start + (t_end - t_start) * (static_cast<double>(j) / static_cast<double>(intervals));
}

double LocalFlow::operator()(double t) const {
  const double dt = t - t_start_;
  switch (method_) {
    case Method::Linear: return x_start_ + a0_ * dt;
    case Method::Exponential: return x_start_ + (a0_ / a1_) * std::expm1(a1_ * dt);
    case Method::Stepped: break;
  }
  return nodes_(t);
}

std::vector<double> LocalFlow::sample(std::size_t intervals) const {
  std::vector<double> out(intervals + 1);
  const std::size_t n = nodes_.steps();
  const bool aligned = method_ == Method::Stepped && n % intervals == 0;
  for (std::size_t j = 0; j <= intervals; ++j) {
    const double t = dense_time(t_start_, t_end_, j, intervals);
    out[j] = aligned ? nodes_.node(j * (n / intervals)) : (*this)(t);
    require_finite(out[j], "truncated flow", t);
  }
  return out;
}

double LocalFlow::end_value() const {
  return method_ == Method::Stepped ? nodes_.node(nodes_.steps()) : (*this)(t_end_);
}

LocalFlow local_flow(const DerivativeStack& stack, double t_end, const FlowOptions& options) {
  if (stack.coeffs.empty()) {
    throw Error(ErrorKind::InvalidArgument, "derivative stack is empty");
  }
  if (!(t_end > stack.t)) {
    throw Error(ErrorKind::InvalidArgument, "local flow needs t_end > t_i");
  }
  LocalFlow flow;
  flow.t_start_ = stack.t;
  flow.t_end_ = t_end;
  flow.x_start_ = stack.y;
  flow.a0_ = stack.coeffs[0];
  const int ell = stack.order();
  const bool forced = static_cast<bool>(options.lambda);

  if (!forced && ell == 0) {
    flow.method_ = LocalFlow::Method::Linear;
    return flow;
  }
  if (!forced && ell == 1 && std::abs(stack.coeffs[1]) >= kDegenerateLinearCoefficient) {
    flow.method_ = LocalFlow::Method::Exponential;
    flow.a1_ = stack.coeffs[1];
    return flow;
  }

  std::vector<double> scaled(stack.coeffs.size());
  for (std::size_t k = 0; k < scaled.size(); ++k) {
    scaled[k] = stack.coeffs[k] / factorial(static_cast<int>(k));
  }
  const double base = stack.y;
  const TimeFunction lambda = options.lambda;
  const std::size_t dense = std::max<std::size_t>(options.dense_intervals, 1);
  const std::size_t steps = round_up(std::max<std::size_t>(options.substeps, 1), dense);
  flow.method_ = LocalFlow::Method::Stepped;
  flow.nodes_ = rk4_solve(
      [&](double t, double x) {
        double v = taylor_rhs(scaled, base, x);
        if (lambda) {
          v += lambda(t) * x;
        }
        return v;
      },
      stack.t, t_end, stack.y, steps);
  return flow;
}

double Trajectory::sup_abs() const {
  double m = 0.0;
  for (const auto& seg : segments) {
    for (double v : seg.values) {
      m = std::max(m, std::abs(v));
    }
  }
  for (double v : sample_values) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

namespace {

void check_window(const OdeProblem& problem, const SamplingSequence& seq) {
  if (seq.count() == 0) {
    throw Error(ErrorKind::InvalidArgument, "sampling sequence is empty");
  }
  if (seq.front() != problem.t0 || seq.back() != problem.tJ) {
    throw Error(ErrorKind::DomainMismatch, "sampling sequence does not span [t0, tJ]");
  }
}

}  // namespace

Trajectory integrate_truncated(const OdeProblem& problem, const SamplingSequence& seq, int ell, double x0,
                               const PerturbationSpec* perturbation, const IntegrationOptions& options) {
  problem.validate();
  if (ell < 0) {
    throw Error(ErrorKind::InvalidArgument, "truncation order must be >= 0");
  }
  if (ell > problem.smoothness_order) {
    throw Error(ErrorKind::Order, "truncation order " + std::to_string(ell) + " exceeds smoothness order " +
                                      std::to_string(problem.smoothness_order));
  }
  check_window(problem, seq);
  if (!std::isfinite(x0)) {
    throw Error(ErrorKind::InvalidArgument, "initial value must be finite");
  }
  if (perturbation != nullptr) {
    perturbation->validate();
  }

  const std::size_t dense = std::max<std::size_t>(options.dense_intervals, 1);
  FlowOptions flow_options{options.substeps, dense, {}};
  if (perturbation != nullptr && perturbation->has_lambda()) {
    flow_options.lambda = perturbation->lambda_fn;
  }

  Trajectory out;
  out.origin = TrajectoryOrigin::Truncated;
  out.sampling = seq;
  out.has_jumps = perturbation != nullptr && perturbation->has_impulses();
  out.sample_values.push_back(x0);
  const auto& p = seq.points();
  double x = x0;
  for (std::size_t i = 0; i < seq.count(); ++i) {
    const auto stack = eval_derivatives(problem, x, p[i], ell);
    const auto flow = local_flow(stack, p[i + 1], flow_options);
    TrajectorySegment seg;
    seg.values = flow.sample(dense);
    seg.times.resize(dense + 1);
    for (std::size_t j = 0; j <= dense; ++j) {
      seg.times[j] = dense_time(p[i], p[i + 1], j, dense);
    }
    const double g = perturbation != nullptr ? perturbation->impulse(i) : 0.0;
    x = seg.values.back() + g;
    out.jumps.push_back(g);
    out.sample_values.push_back(x);
    out.segments.push_back(std::move(seg));
  }
  return out;
}

Trajectory integrate_reference(const OdeProblem& problem, double y0, const SamplingSequence& seq,
                               const ReferenceOptions& options) {
  problem.validate();
  check_window(problem, seq);
  if (!std::isfinite(y0)) {
    throw Error(ErrorKind::InvalidArgument, "initial value must be finite");
  }
  const std::size_t dense = std::max<std::size_t>(options.dense_intervals, 1);
  const double per_unit = static_cast<double>(std::max<std::size_t>(options.steps_per_unit, 1));
  const TimeFunction lambda = options.lambda;
  const auto rhs = [&](double t, double y) {
    double v = eval_field(problem, y, t);
    if (lambda) {
      v += lambda(t) * y;
    }
    return v;
  };

  Trajectory out;
  out.origin = TrajectoryOrigin::Reference;
  out.sampling = seq;
  out.sample_values.push_back(y0);
  const auto& p = seq.points();
  double y = y0;
  double y_fine = y0;
  double estimate = 0.0;
  for (std::size_t i = 0; i < seq.count(); ++i) {
    const double h = p[i + 1] - p[i];
    const auto wanted = static_cast<std::size_t>(std::ceil(h * per_unit / static_cast<double>(dense)));
    const std::size_t steps = dense * std::max<std::size_t>(1, wanted);
    TrajectorySegment seg;
    seg.times.reserve(dense + 1);
    seg.values.reserve(dense + 1);
    const std::size_t stride = steps / dense;
    y = rk4_march(rhs, p[i], p[i + 1], y, steps, stride, [&](std::size_t k, double, double v) {
      seg.times.push_back(dense_time(p[i], p[i + 1], k / stride, dense));
      seg.values.push_back(v);
    });
    if (options.richardson) {
      y_fine = rk4_march(rhs, p[i], p[i + 1], y_fine, 2 * steps, 2 * steps, [](std::size_t, double, double) {});
      const double err = std::abs(y - y_fine) * 16.0 / 15.0 / std::max(1.0, std::abs(y_fine));
      estimate = std::max(estimate, err);
    }
    out.jumps.push_back(0.0);
    out.sample_values.push_back(y);
    out.segments.push_back(std::move(seg));
  }
  out.oracle_error_estimate = estimate;
  out.oracle_flagged = estimate > kOracleFlagThreshold;
  if (estimate > kOracleFailThreshold) {
    throw Error(ErrorKind::OracleUnreliable,
                "reference solution error estimate " + std::to_string(estimate) + " exceeds 1e-6");
  }
  return out;
}

Trajectory integrate_reference(const OdeProblem& problem, double y0, const ReferenceOptions& options) {
  return integrate_reference(problem, y0, SamplingSequence::uniform(problem.t0, problem.tJ, 1), options);
}

Trajectory error_trajectory(const Trajectory& true_traj, const Trajectory& approx_traj) {
  if (!(true_traj.sampling == approx_traj.sampling) || true_traj.segments.size() != approx_traj.segments.size() ||
      true_traj.sample_values.size() != approx_traj.sample_values.size()) {
    throw Error(ErrorKind::DomainMismatch, "trajectories use different sampling sequences");
  }
  Trajectory e;
  e.origin = TrajectoryOrigin::Error;
  e.sampling = true_traj.sampling;
  e.has_jumps = true_traj.has_jumps || approx_traj.has_jumps;
  for (std::size_t i = 0; i < true_traj.segments.size(); ++i) {
    const auto& a = true_traj.segments[i];
    const auto& b = approx_traj.segments[i];
    if (a.times != b.times) {
      throw Error(ErrorKind::DomainMismatch, "dense grids differ on segment " + std::to_string(i));
    }
    TrajectorySegment seg;
    seg.times = a.times;
    seg.values.resize(a.values.size());
    for (std::size_t j = 0; j < a.values.size(); ++j) {
      seg.values[j] = a.values[j] - b.values[j];
    }
    e.segments.push_back(std::move(seg));
    const double ja = i < true_traj.jumps.size() ? true_traj.jumps[i] : 0.0;
    const double jb = i < approx_traj.jumps.size() ? approx_traj.jumps[i] : 0.0;
    e.jumps.push_back(ja - jb);
  }
  for (std::size_t i = 0; i < true_traj.sample_values.size(); ++i) {
    e.sample_values.push_back(true_traj.sample_values[i] - approx_traj.sample_values[i]);
  }

  ErrorStats stats;
  const double e0 = e.sample_values.front();
  for (std::size_t i = 0; i < e.segments.size(); ++i) {
    const double base = e.sample_values[i];
    for (double v : e.segments[i].values) {
      stats.max_abs = std::max(stats.max_abs, std::abs(v));
      stats.max_drift = std::max(stats.max_drift, std::abs(v - e0));
      stats.max_segment_deviation = std::max(stats.max_segment_deviation, std::abs(v - base));
    }
    stats.max_sample_increment =
        std::max(stats.max_sample_increment, std::abs(e.sample_values[i + 1] - e.sample_values[i]));
  }
  for (double v : e.sample_values) {
    stats.max_abs = std::max(stats.max_abs, std::abs(v));
    stats.max_drift = std::max(stats.max_drift, std::abs(v - e0));
  }
  e.error_stats = stats;
  return e;
}

std::vector<double> segment_excursions(const Trajectory& trajectory) {
  std::vector<double> out(trajectory.segments.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double base = trajectory.sample_values.at(i);
    for (double v : trajectory.segments[i].values) {
      out[i] = std::max(out[i], std::abs(v - base));
    }
  }
  return out;
}

struct JointFlowProbe::State {
  OdeProblem problem;
  int ell = 0;
  double x0 = 0.0;
  double y0 = 0.0;
  PerturbationSpec perturbation;
  IntegrationOptions integration;
  ReferenceOptions reference;
  Track track = Track::Joint;
  std::shared_ptr<const LocalFlow> last_x;
  std::shared_ptr<const NodeSolution> last_y;
};

JointFlowProbe::JointFlowProbe(OdeProblem problem, int ell, double x0, double y0, PerturbationSpec perturbation,
                               IntegrationOptions integration, ReferenceOptions reference, Track track)
    : state_(std::make_shared<State>()) {
  if (ell < 0 || ell > problem.smoothness_order) {
    throw Error(ErrorKind::Order, "truncation order outside [0, n]");
  }
  perturbation.validate();
  state_->problem = std::move(problem);
  state_->ell = ell;
  state_->x0 = x0;
  state_->y0 = y0;
  state_->perturbation = std::move(perturbation);
  state_->integration = integration;
  state_->reference = std::move(reference);
  state_->track = track;
}

std::function<double(double)> JointFlowProbe::operator()(std::size_t index, double t_start, double t_end) const {
  State& s = *state_;
  const bool want_x = s.track != Track::True;
  const bool want_y = s.track != Track::Approximate;
  const bool restart = index == 0;

  std::shared_ptr<const LocalFlow> x_flow;
  double xs = 0.0;
  if (want_x) {
    xs = restart || !s.last_x ? s.x0 : (*s.last_x)(t_start) + s.perturbation.impulse(index - 1);
    FlowOptions fo{s.integration.substeps, s.integration.dense_intervals, s.perturbation.lambda_fn};
    const auto stack = eval_derivatives(s.problem, xs, t_start, s.ell);
    x_flow = std::make_shared<const LocalFlow>(local_flow(stack, t_end, fo));
    s.last_x = x_flow;
  }

  std::shared_ptr<const NodeSolution> y_flow;
  double ys = 0.0;
  if (want_y) {
    ys = restart || !s.last_y ? s.y0 : (*s.last_y)(t_start);
    const auto by_rate = static_cast<std::size_t>(
        std::ceil((t_end - t_start) * static_cast<double>(s.reference.steps_per_unit)));
    const std::size_t steps = std::max<std::size_t>(10 * s.integration.dense_intervals, by_rate);
    const OdeProblem& problem = s.problem;
    const TimeFunction lambda = s.reference.lambda;
    y_flow = std::make_shared<const NodeSolution>(rk4_solve(
        [&](double t, double y) {
          double v = eval_field(problem, y, t);
          if (lambda) {
            v += lambda(t) * y;
          }
          return v;
        },
        t_start, t_end, ys, steps));
    s.last_y = y_flow;
  }

  return [x_flow, y_flow, xs, ys](double t) {
    double d = 0.0;
    if (x_flow) {
      d = std::max(d, std::abs((*x_flow)(t)-xs));
    }
    if (y_flow) {
      d = std::max(d, std::abs((*y_flow)(t)-ys));
    }
    return d;
  };
}

}  // namespace taylorcert
