#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oploop/distribution.hpp"
#include "oploop/dynamics.hpp"

namespace oploop {

// Mean absolute per-user shift (1/M) sum |x0_i - xN_i|.
double micro_shift(const std::vector<UserTrajectory>& trajectories);

// Mean squared per-user shift (1/M) sum (x0_i - xN_i)^2.
double mean_square_shift(const std::vector<UserTrajectory>& trajectories);

// W1 between the initial and final opinion samples (population law shift).
double macro_shift(const std::vector<UserTrajectory>& trajectories);

double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

struct SweepSpec {
  std::vector<double> alphas;
  // One beta list per alpha; every pair must satisfy alpha + beta <= 1.
  std::vector<std::vector<double>> betas_per_alpha;
  std::vector<int> t_values;
  int cycles = 20;
  std::size_t population = 500;
  Distribution mu0 = Distribution::uniform(-2.0, 2.0);
  Distribution rho = Distribution::gaussian(0.0, 1.0);
  SuccessRule success_rule = SuccessRule::Lemma;
  std::uint64_t master_seed = 1;
  int workers = 1;
};

enum class SweepMetric { Micro, Macro };

struct AlphaSlice {
  double alpha = 0.0;
  std::vector<double> betas;
  std::vector<int> t_values;
  // Row-major over (t_index, beta_index).
  std::vector<double> micro;
  std::vector<double> macro;

  double cell(SweepMetric metric, std::size_t t_index, std::size_t beta_index) const;
  double max_value(SweepMetric metric) const;
};

struct SweepGrid {
  std::vector<AlphaSlice> slices;
};

// Runs every (alpha, beta, T) cell with a per-cell seed derived from
// (master_seed, alpha index, beta index, T).
SweepGrid run_sweep(const SweepSpec& spec);

struct GridRow {
  double x = 0.0;  // T (or another documented abscissa)
  double y = 0.0;  // beta (or another documented ordinate)
  double value = 0.0;
};

// Rows sorted by T then beta; values divided by the slice maximum when
// normalized (the largest cell maps to exactly 1).
std::vector<GridRow> grid_rows(const AlphaSlice& slice, SweepMetric metric,
                               bool normalized);

struct IsolineMember {
  double beta = 0.0;
  int t = 1;
  double key = 0.0;  // beta^(T-1)
  double micro = 0.0;
  double macro = 0.0;
};

struct IsolineReport {
  double c = 0.0;
  double bucket = 0.0;
  double tol_rel = 0.0;
  std::vector<IsolineMember> members;
  double micro_rel_spread = 0.0;  // (max - min) / mean within the group
  double macro_rel_spread = 0.0;
  bool micro_ok = true;
  bool macro_ok = true;
};

inline constexpr double kIsolineBucket = 0.02;

// Groups the alpha=0 cells with |beta^(T-1) - c| <= bucket and reports the
// within-group relative spread of both metrics. Throws if the grid has no
// alpha=0 slice or the group is empty.
IsolineReport isoline_check(const SweepGrid& grid, double c, double tol_rel,
                            double bucket = kIsolineBucket);

// Writes "x,y,value" rows, 6 decimals, no header, LF endings.
void emit_grid_csv(const std::vector<GridRow>& rows, const std::filesystem::path& path);

// Writes "x0,xN" rows in user-index order, 6 decimals, no header, LF endings.
void emit_trajectory_csv(const std::vector<UserTrajectory>& trajectories,
                         const std::filesystem::path& path);

}  // namespace oploop
