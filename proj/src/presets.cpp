#include "oploop/presets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "oploop/limits.hpp"
#include "oploop/transport.hpp"

namespace oploop {
namespace {

std::vector<double> beta_grid(double alpha, double step, double cap) {
  std::vector<double> betas;
  for (int i = 0;; ++i) {
    const double beta = i * step;
    if (beta > std::min(1.0 - alpha, cap) + 1e-12) break;
    betas.push_back(beta);
  }
  return betas;
}

std::vector<int> range_int(int lo, int hi, int step = 1) {
  std::vector<int> out;
  for (int v = lo; v <= hi; v += step) out.push_back(v);
  return out;
}

}  // namespace

Preset get_preset(const std::string& name) {
  Preset preset;
  preset.name = name;
  if (name == "illustrative") {
    preset.kind = PresetKind::Simulate;
    SimulateSetup setup{ModelParams(0.1, 0.7, Distribution::uniform(0.0, 2.0),
                                    Distribution::gaussian(0.0, 0.5)),
                        RecommenderConfig{}, 5000};
    setup.cfg.period = 5;
    setup.cfg.cycles = 10;  // 50-step horizon
    setup.cfg.master_seed = 1;
    preset.simulate = std::move(setup);
  } else if (name == "bimodal_gaussian") {
    preset.kind = PresetKind::Simulate;
    SimulateSetup setup{
        ModelParams(0.0, 0.8, Distribution::uniform(-2.0, 2.0),
                    Distribution::mixture(
                        {{0.5, {-1.0, 0.4}}, {0.5, {1.0, 0.4}}})),
        RecommenderConfig{}, 5000};
    setup.cfg.period = 3;
    setup.cfg.cycles = 33;  // 99-step horizon, the closest multiple of the period to 100
    setup.cfg.master_seed = 1;
    preset.simulate = std::move(setup);
  } else if (name == "micro_macro_sweep") {
    preset.kind = PresetKind::Sweep;
    SweepSpec spec;
    spec.alphas = {0.0, 0.1, 0.2};
    // beta steps of 0.1 up to 1-alpha, capped at 0.9 since the model
    // requires beta < 1.
    spec.betas_per_alpha.clear();
    for (double alpha : spec.alphas)
      spec.betas_per_alpha.push_back(beta_grid(alpha, 0.1, 0.9));
    spec.t_values = range_int(1, 21);
    spec.cycles = 20;
    spec.population = 500;
    spec.mu0 = Distribution::uniform(-2.0, 2.0);
    spec.rho = Distribution::gaussian(0.0, 1.0);
    spec.master_seed = 1;
    preset.sweep = std::move(spec);
  } else if (name == "no_exploration_convergence") {
    preset.kind = PresetKind::Convergence;
    ConvergenceSpec spec;
    spec.alpha = 0.1;
    spec.betas = beta_grid(0.1, 0.1, 0.9);
    spec.t_values = range_int(1, 51, 5);
    spec.target_horizon = 50;
    spec.population = 2000;
    spec.mu0 = Distribution::uniform(0.0, 2.0);
    spec.rho = Distribution::gaussian(0.0, 0.5);
    spec.master_seed = 1;
    preset.convergence = std::move(spec);
  } else if (name == "polarization") {
    preset.kind = PresetKind::Polarization;
    PolarizationSpec spec;
    spec.beta = 0.8;
    spec.t_values = range_int(1, 21);
    spec.separations.clear();
    for (int i = 0; i <= 20; ++i) spec.separations.push_back(i * 0.1);
    spec.component_std = 0.1;
    spec.cycles = 20;
    spec.population = 1000;
    spec.mu0 = Distribution::uniform(-2.0, 2.0);
    spec.master_seed = 1;
    preset.polarization = std::move(spec);
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return preset;
}

std::vector<std::string> preset_names() {
  return {"illustrative", "bimodal_gaussian", "micro_macro_sweep",
          "no_exploration_convergence", "polarization"};
}

std::vector<GridRow> run_convergence_map(const ConvergenceSpec& spec) {
  if (spec.betas.empty() || spec.t_values.empty())
    throw std::invalid_argument("convergence map: grid must be nonempty");
  std::vector<GridRow> rows;
  rows.reserve(spec.betas.size() * spec.t_values.size());
  for (std::size_t ti = 0; ti < spec.t_values.size(); ++ti) {
    const int t = spec.t_values[ti];
    for (std::size_t bi = 0; bi < spec.betas.size(); ++bi) {
      const double beta = spec.betas[bi];
      const ModelParams params(spec.alpha, beta, spec.mu0, spec.rho);
      RecommenderConfig cfg;
      cfg.period = t;
      cfg.cycles = std::max(
          1, static_cast<int>(std::lround(static_cast<double>(spec.target_horizon) / t)));
      cfg.master_seed = mix_seed(mix_seed(mix_seed(spec.master_seed, 0), bi),
                                 static_cast<std::uint64_t>(t));
      const auto trajectories =
          simulate_population(params, cfg, spec.population, spec.workers);

      std::vector<double> finals;
      finals.reserve(trajectories.size());
      for (const auto& tr : trajectories) finals.push_back(tr.x_final);
      std::sort(finals.begin(), finals.end());

      RngStream ref_stream = RngStream::substream(cfg.master_seed, kReferenceStreamId);
      std::vector<double> reference =
          no_exploration_limit(params).sample(trajectories.size(), ref_stream);
      std::sort(reference.begin(), reference.end());

      rows.push_back({static_cast<double>(t), beta, w_distance(finals, reference, 1)});
    }
  }
  return rows;
}

namespace {

double median_of_sorted(const double* begin, std::size_t n) {
  return (n % 2 == 1) ? begin[n / 2] : 0.5 * (begin[n / 2 - 1] + begin[n / 2]);
}

}  // namespace

PolarizationResult run_polarization(const PolarizationSpec& spec) {
  if (spec.t_values.empty() || spec.separations.empty())
    throw std::invalid_argument("polarization: grid must be nonempty");
  if (spec.population < 4)
    throw std::invalid_argument("polarization: population must be at least 4");
  PolarizationResult result;
  for (std::size_t ti = 0; ti < spec.t_values.size(); ++ti) {
    const int t = spec.t_values[ti];
    for (std::size_t si = 0; si < spec.separations.size(); ++si) {
      const double sep = spec.separations[si];
      const Distribution rho = Distribution::mixture(
          {{0.5, {-0.5 * sep, spec.component_std}},
           {0.5, {0.5 * sep, spec.component_std}}});
      const ModelParams params(0.0, spec.beta, spec.mu0, rho);
      RecommenderConfig cfg;
      cfg.period = t;
      cfg.cycles = spec.cycles;
      cfg.master_seed = mix_seed(mix_seed(mix_seed(spec.master_seed, si), 0),
                                 static_cast<std::uint64_t>(t));
      const auto trajectories =
          simulate_population(params, cfg, spec.population, spec.workers);

      std::vector<double> finals;
      finals.reserve(trajectories.size());
      for (const auto& tr : trajectories) finals.push_back(tr.x_final);
      std::sort(finals.begin(), finals.end());

      RngStream ref_stream = RngStream::substream(cfg.master_seed, kReferenceStreamId);
      std::vector<double> reference = rho.sample(trajectories.size(), ref_stream);
      std::sort(reference.begin(), reference.end());

      const double key = std::pow(spec.beta, t - 1);
      result.w1_to_rho.push_back({key, sep, w_distance(finals, reference, 1)});
      const std::size_t half = finals.size() / 2;
      const double gap = median_of_sorted(finals.data() + half, finals.size() - half) -
                         median_of_sorted(finals.data(), half);
      result.median_gap.push_back({key, sep, gap});
    }
  }
  // beta^(T-1) ascending matches T descending; keep rows sorted by the
  // emitted abscissa.
  auto by_key = [](const GridRow& a, const GridRow& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  };
  std::sort(result.w1_to_rho.begin(), result.w1_to_rho.end(), by_key);
  std::sort(result.median_gap.begin(), result.median_gap.end(), by_key);
  return result;
}

}  // namespace oploop
