#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oploop/dynamics.hpp"
#include "oploop/experiments.hpp"

namespace oploop {

struct SimulateSetup {
  ModelParams params;
  RecommenderConfig cfg;
  std::size_t population = 1000;
};

// Grid of (T, beta) cells compared against the single-draw limit law:
// value = W1(final opinions, a same-size reference draw of the limit).
// Cycles per cell are chosen so the horizon stays near target_horizon.
struct ConvergenceSpec {
  double alpha = 0.1;
  std::vector<double> betas;
  std::vector<int> t_values;
  int target_horizon = 50;
  std::size_t population = 2000;
  Distribution mu0 = Distribution::uniform(0.0, 2.0);
  Distribution rho = Distribution::gaussian(0.0, 0.5);
  std::uint64_t master_seed = 1;
  int workers = 1;
};

// Bimodal-recommendation grid over (T, component separation) at fixed beta:
// rho = 0.5 N(-sep/2, std) + 0.5 N(+sep/2, std). Reports W1 between the
// final opinions and rho, plus the gap between the two half-sample medians.
struct PolarizationSpec {
  double beta = 0.8;
  std::vector<int> t_values;
  std::vector<double> separations;
  double component_std = 0.1;
  int cycles = 20;
  std::size_t population = 1000;
  Distribution mu0 = Distribution::uniform(-2.0, 2.0);
  std::uint64_t master_seed = 1;
  int workers = 1;
};

enum class PresetKind { Simulate, Sweep, Convergence, Polarization };

struct Preset {
  std::string name;
  PresetKind kind = PresetKind::Simulate;
  std::optional<SimulateSetup> simulate;
  std::optional<SweepSpec> sweep;
  std::optional<ConvergenceSpec> convergence;
  std::optional<PolarizationSpec> polarization;
};

// Known presets: illustrative, bimodal_gaussian, micro_macro_sweep,
// no_exploration_convergence, polarization. Throws on unknown names.
Preset get_preset(const std::string& name);

std::vector<std::string> preset_names();

// Rows (T, beta, W1-to-limit), sorted by T then beta.
std::vector<GridRow> run_convergence_map(const ConvergenceSpec& spec);

struct PolarizationResult {
  // Rows (beta^(T-1), separation, value), sorted by beta^(T-1) then separation.
  std::vector<GridRow> w1_to_rho;
  std::vector<GridRow> median_gap;
};

PolarizationResult run_polarization(const PolarizationSpec& spec);

}  // namespace oploop
