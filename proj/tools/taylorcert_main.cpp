// Command-line front end: taylorcert {run,certify,shadow,sweep} [--config PATH] [flags]

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "taylorcert/errors.hpp"
#include "taylorcert/experiment.hpp"

namespace {

constexpr int kConfigExit = 4;

struct Overrides {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<int> ell;
  std::optional<double> rho;
  std::optional<double> h;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
};

taylorcert::ExperimentConfig resolve(const Overrides& o) {
  taylorcert::ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    cfg = taylorcert::load_config(o.config_path);
  }
  if (o.out) cfg.output_dir = *o.out;
  if (o.ell) cfg.ell = *o.ell;
  if (o.rho) cfg.rho = *o.rho;
  if (o.h) {
    cfg.sampling_mode = taylorcert::SamplingMode::Uniform;
    cfg.h = *o.h;
    cfg.J.reset();
  }
  if (o.workers) cfg.workers = *o.workers;
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  return cfg;
}

int cmd_run(const taylorcert::ExperimentConfig& cfg) {
  const auto run = taylorcert::run_experiment(cfg);
  taylorcert::write_run_outputs(run, taylorcert::run_report_json(run), cfg.output_dir);
  std::printf("J=%zu max|e|=%.6e report=%s/run_report.json\n", run.plan.sequence.count(),
              run.error.error_stats->max_abs, cfg.output_dir.c_str());
  return 0;
}

int cmd_certify(const taylorcert::ExperimentConfig& cfg) {
  const auto result = taylorcert::certify_experiment(cfg);
  taylorcert::write_run_outputs(result.run, taylorcert::certify_report_json(result), cfg.output_dir);
  std::printf("%s certificate: bound=%.6e measured=%.6e verdict=%s\n",
              taylorcert::to_string(result.certificate.kind).c_str(), result.certificate.certified_bound(),
              result.measured_max_error, result.verdict.c_str());
  return 0;
}

int cmd_shadow(const taylorcert::ExperimentConfig& cfg) {
  const auto outcome = taylorcert::shadow_experiment(cfg);
  taylorcert::write_run_outputs(outcome.certified.run, taylorcert::shadow_report_json(outcome), cfg.output_dir);
  taylorcert::write_text(std::filesystem::path(cfg.output_dir) / "pseudo_orbit.csv",
                         taylorcert::pseudo_orbit_csv(outcome.certified.run.truncated));
  std::printf("shadow: found=%s y0*=%.12g achieved=%.6e epsilon=%.6e constraints=%s\n",
              outcome.shadow.found ? "true" : "false", outcome.shadow.y0_star, outcome.shadow.achieved_error,
              outcome.epsilon, outcome.constraints.holds ? "hold" : "fail");
  return 0;
}

int cmd_sweep(const taylorcert::ExperimentConfig& cfg) {
  const auto rows = taylorcert::sweep_experiment(cfg);
  const std::filesystem::path dir = cfg.output_dir;
  taylorcert::write_text(dir / "sweep_summary.csv", taylorcert::sweep_csv(rows));
  taylorcert::write_text(dir / "run_report.json", taylorcert::sweep_report_json(cfg, rows));
  std::size_t unsound = 0;
  for (const auto& r : rows) {
    unsound += r.verdict == "unsound";
  }
  std::printf("sweep: %zu points, %zu unsound, summary=%s\n", rows.size(), unsound,
              (dir / "sweep_summary.csv").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified truncated-Taylor ODE integration"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1, 1);
  Overrides o;
  app.add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--ell", o.ell, "Truncation order");
  app.add_option("--rho", o.rho, "Deviation budget in (0, 1)");
  app.add_option("--h", o.h, "Uniform sampling gap (switches to uniform sampling)");
  app.add_option("--workers", o.workers, "Worker threads for sweeps and shadow scans");
  app.add_option("--seed", o.seed, "Seed for randomized sweep points");

  auto* run = app.add_subcommand("run", "Integrate truncated and reference solutions and measure the error");
  auto* certify = app.add_subcommand("certify", "Run and check the a-priori certificate against the measured error");
  auto* shadow = app.add_subcommand("shadow", "Certify and search for a shadowing initial condition");
  auto* sweep = app.add_subcommand("sweep", "Grid over (ell, rho, h, gbar, lambda) with a CSV summary");
  for (auto* sub : {run, certify, shadow, sweep}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    const auto cfg = resolve(o);
    if (run->parsed()) return cmd_run(cfg);
    if (certify->parsed()) return cmd_certify(cfg);
    if (shadow->parsed()) return cmd_shadow(cfg);
    return cmd_sweep(cfg);
  } catch (const taylorcert::Error& e) {
    std::cerr << "taylorcert: " << e.what() << "\n";
    return taylorcert::exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "taylorcert: " << e.what() << "\n";
    return kConfigExit;
  }
}
