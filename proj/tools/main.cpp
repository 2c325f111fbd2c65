#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oploop/config.hpp"
#include "oploop/distribution.hpp"
#include "oploop/dynamics.hpp"
#include "oploop/experiments.hpp"
#include "oploop/limits.hpp"
#include "oploop/presets.hpp"
#include "oploop/transport.hpp"
#include "oploop/verify.hpp"

namespace {

using namespace oploop;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerification = 3;

struct CommonFlags {
  std::string config_path;
  std::string preset_name;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> population;
  int workers = 1;
  bool record_paths = false;
};

std::filesystem::path resolve_out_dir(const CommonFlags& flags,
                                      const OutputConfig& output) {
  if (!flags.out_dir.empty()) return flags.out_dir;
  if (!output.dir.empty()) return output.dir;
  if (const char* env = std::getenv("OPLOOP_OUT_DIR"); env != nullptr && *env != '\0')
    return env;
  return "out";
}

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool with_population) {
  cmd->add_option("config", flags.config_path, "JSON config file");
  cmd->add_option("--preset", flags.preset_name, "named preset instead of a config file");
  cmd->add_option("--seed", flags.seed, "override the master seed");
  cmd->add_option("--out", flags.out_dir, "output directory (default: $OPLOOP_OUT_DIR or ./out)");
  cmd->add_option("--workers", flags.workers, "worker threads (results do not depend on this)")
      ->check(CLI::PositiveNumber);
  if (with_population)
    cmd->add_option("--population", flags.population, "override the population size")
        ->check(CLI::PositiveNumber);
}

RunConfig resolve_run_config(const CommonFlags& flags) {
  std::optional<RunConfig> rc;
  if (!flags.preset_name.empty()) {
    const Preset preset = get_preset(flags.preset_name);
    if (preset.kind != PresetKind::Simulate)
      throw ConfigError("preset " + flags.preset_name + " is a sweep preset; use the sweep command");
    const auto& setup = *preset.simulate;
    rc = RunConfig{setup.params, setup.cfg, setup.population, OutputConfig{}};
  } else if (!flags.config_path.empty()) {
    rc = load_run_config(flags.config_path);
  } else {
    throw ConfigError("either a config file or --preset is required");
  }
  if (flags.seed) rc->recommender.master_seed = *flags.seed;
  if (flags.population) rc->population = *flags.population;
  if (flags.record_paths) rc->output.record_paths = true;
  return *rc;
}

void print_kv(const char* key, double value) { std::printf("%s=%.6f\n", key, value); }

void print_limit_report(const ModelParams& params, LimitRegime regime) {
  const LimitReport report = limit_report(params, regime);
  const char* name =
      report.regime == LimitRegime::NoExploration ? "no_exploration" : "continuous";
  std::printf("regime=%s mean=%.6f variance=%.6f law=%s", name, report.mean,
              report.variance,
              report.limit_law ? report.limit_law->describe().c_str() : "moments_only");
  if (report.gaussian_bound) std::printf(" gaussian_w1_bound=%.6f", *report.gaussian_bound);
  std::printf("\n");
}

void emit_mean_path(const std::vector<UserTrajectory>& trajectories,
                    const std::filesystem::path& path) {
  const std::size_t steps = trajectories.front().path.size();
  std::vector<double> mean(steps, 0.0);
  for (const auto& t : trajectories)
    for (std::size_t k = 0; k < steps; ++k) mean[k] += t.path[k];
  FILE* f = std::fopen(path.string().c_str(), "wb");
  if (f == nullptr) throw std::runtime_error("unwritable path: " + path.string());
  for (std::size_t k = 0; k < steps; ++k)
    std::fprintf(f, "%zu,%.6f\n", k, mean[k] / static_cast<double>(trajectories.size()));
  std::fclose(f);
}

int cmd_simulate(const CommonFlags& flags) {
  const RunConfig rc = resolve_run_config(flags);
  const auto out_dir = resolve_out_dir(flags, rc.output);
  std::filesystem::create_directories(out_dir);

  const auto trajectories = simulate_population(
      rc.params, rc.recommender, rc.population, flags.workers, rc.output.record_paths);
  emit_trajectory_csv(trajectories, out_dir / "trajectories.csv");
  if (rc.output.record_paths) emit_mean_path(trajectories, out_dir / "mean_path.csv");

  double initial_mean = 0.0, final_mean = 0.0, mean_reward = 0.0;
  for (const auto& t : trajectories) {
    initial_mean += t.x0;
    final_mean += t.x_final;
    mean_reward += reward(std::abs(t.x0 - t.x_final));
  }
  const auto m = static_cast<double>(trajectories.size());
  std::printf("users=%zu\n", trajectories.size());
  std::printf("horizon=%d\n", rc.recommender.horizon());
  print_kv("initial_mean", initial_mean / m);
  print_kv("final_mean", final_mean / m);
  print_kv("micro_shift", micro_shift(trajectories));
  if (trajectories.size() >= 2) print_kv("macro_shift", macro_shift(trajectories));

  // Limit oracles apply to the two analyzed regimes.
  if (!rc.recommender.period) {
    const LimitReport report = limit_report(rc.params, LimitRegime::NoExploration);
    std::vector<double> finals, reference;
    for (const auto& t : trajectories) finals.push_back(t.x_final);
    std::sort(finals.begin(), finals.end());
    RngStream ref_stream =
        RngStream::substream(rc.recommender.master_seed, kReferenceStreamId);
    reference = report.limit_law->sample(finals.size(), ref_stream);
    std::sort(reference.begin(), reference.end());
    print_kv("limit_mean", report.mean);
    print_kv("limit_variance", report.variance);
    print_kv("limit_w1", w_distance(finals, reference, 1));
  } else if (*rc.recommender.period == 1) {
    const LimitReport report = limit_report(rc.params, LimitRegime::Continuous);
    print_kv("limit_mean", report.mean);
    print_kv("limit_variance", report.variance);
    if (report.gaussian_bound) print_kv("limit_gaussian_w1_bound", *report.gaussian_bound);
  }
  return kExitOk;
}

std::string format_alpha(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", alpha);
  return buf;
}

int cmd_sweep(const CommonFlags& flags) {
  SweepSpec spec;
  OutputConfig output;
  std::optional<ConvergenceSpec> convergence;
  std::optional<PolarizationSpec> polarization;

  if (!flags.preset_name.empty()) {
    const Preset preset = get_preset(flags.preset_name);
    switch (preset.kind) {
      case PresetKind::Sweep:
        spec = *preset.sweep;
        break;
      case PresetKind::Convergence:
        convergence = *preset.convergence;
        break;
      case PresetKind::Polarization:
        polarization = *preset.polarization;
        break;
      case PresetKind::Simulate:
        throw ConfigError("preset " + flags.preset_name +
                          " is a simulation preset; use the simulate command");
    }
  } else if (!flags.config_path.empty()) {
    SweepConfig sc = load_sweep_config(flags.config_path);
    spec = std::move(sc.spec);
    output = std::move(sc.output);
  } else {
    throw ConfigError("either a config file or --preset is required");
  }

  const auto out_dir = resolve_out_dir(flags, output);
  std::filesystem::create_directories(out_dir);

  if (convergence) {
    if (flags.seed) convergence->master_seed = *flags.seed;
    if (flags.population) convergence->population = *flags.population;
    convergence->workers = flags.workers;
    const auto rows = run_convergence_map(*convergence);
    emit_grid_csv(rows, out_dir / "convergence_w1.csv");
    std::printf("cells=%zu\n", rows.size());
    std::printf("artifact=%s\n", (out_dir / "convergence_w1.csv").string().c_str());
    return kExitOk;
  }
  if (polarization) {
    if (flags.seed) polarization->master_seed = *flags.seed;
    if (flags.population) polarization->population = *flags.population;
    polarization->workers = flags.workers;
    const auto result = run_polarization(*polarization);
    emit_grid_csv(result.w1_to_rho, out_dir / "polarization_w1.csv");
    emit_grid_csv(result.median_gap, out_dir / "polarization_median_gap.csv");
    std::printf("cells=%zu\n", result.w1_to_rho.size());
    std::printf("artifact=%s\n", (out_dir / "polarization_w1.csv").string().c_str());
    std::printf("artifact=%s\n", (out_dir / "polarization_median_gap.csv").string().c_str());
    return kExitOk;
  }

  if (flags.seed) spec.master_seed = *flags.seed;
  if (flags.population) spec.population = *flags.population;
  spec.workers = flags.workers;
  const SweepGrid grid = run_sweep(spec);
  for (const auto& slice : grid.slices) {
    const std::string suffix = "_alpha_" + format_alpha(slice.alpha) + ".csv";
    struct {
      SweepMetric metric;
      bool normalized;
      const char* name;
    } outputs[] = {{SweepMetric::Micro, false, "micro_raw"},
                   {SweepMetric::Micro, true, "micro_norm"},
                   {SweepMetric::Macro, false, "macro_raw"},
                   {SweepMetric::Macro, true, "macro_norm"}};
    for (const auto& o : outputs) {
      const auto path = out_dir / (o.name + suffix);
      emit_grid_csv(grid_rows(slice, o.metric, o.normalized), path);
      std::printf("artifact=%s\n", path.string().c_str());
    }
    std::printf("alpha=%s max_micro=%.6f max_macro=%.6f\n",
                format_alpha(slice.alpha).c_str(), slice.max_value(SweepMetric::Micro),
                slice.max_value(SweepMetric::Macro));
  }
  return kExitOk;
}

int cmd_limits(const CommonFlags& flags) {
  const RunConfig rc = resolve_run_config(flags);
  print_limit_report(rc.params, LimitRegime::NoExploration);
  print_limit_report(rc.params, LimitRegime::Continuous);
  return kExitOk;
}

int cmd_verify(const std::string& level, const CommonFlags& flags, bool inject_fault) {
  VerifyOptions opts;
  opts.level = (level == "full") ? VerifyLevel::Full : VerifyLevel::Fast;
  opts.workdir = resolve_out_dir(flags, OutputConfig{}) / "verify";
  opts.workers = flags.workers;
  opts.inject_gelbrich_fault = inject_fault;
  const auto results = run_verification(opts);
  for (const auto& r : results) std::printf("%s\n", format_check_line(r).c_str());
  if (!all_passed(results)) {
    std::fprintf(stderr, "verification failed\n");
    return kExitVerification;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop simulator for opinionated users and a greedy recommender"};
  app.require_subcommand(1);

  CommonFlags sim_flags, sweep_flags, limit_flags, verify_flags;
  std::string verify_level = "fast";
  bool inject_fault = false;

  auto* simulate = app.add_subcommand(
      "simulate", "run one population and write the x0,xN trajectory CSV");
  add_common_flags(simulate, sim_flags, true);
  simulate->add_flag("--record-paths", sim_flags.record_paths,
                     "also write the population mean path per step");

  auto* sweep = app.add_subcommand(
      "sweep", "run an (alpha, beta, T) grid and write per-alpha metric CSVs");
  add_common_flags(sweep, sweep_flags, true);

  auto* limits = app.add_subcommand(
      "limits", "print the analytic limit reports for a configuration");
  add_common_flags(limits, limit_flags, false);

  auto* verify = app.add_subcommand("verify", "run the acceptance checks");
  verify->add_option("--level", verify_level, "fast or full")
      ->check(CLI::IsMember({"fast", "full"}));
  verify->add_option("--out", verify_flags.out_dir, "output directory");
  verify->add_option("--workers", verify_flags.workers, "worker threads")
      ->check(CLI::PositiveNumber);
  verify->add_flag("--inject-gelbrich-fault", inject_fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_flags);
    if (sweep->parsed()) return cmd_sweep(sweep_flags);
    if (limits->parsed()) return cmd_limits(limit_flags);
    if (verify->parsed()) return cmd_verify(verify_level, verify_flags, inject_fault);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitValidation;
}
