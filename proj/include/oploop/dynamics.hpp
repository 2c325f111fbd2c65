#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "oploop/distribution.hpp"
#include "oploop/rng.hpp"

namespace oploop {

// Opinion model: x_{k+1} = alpha*x0 + beta*x_k + (1-alpha-beta)*u_k, with
// anchor weight alpha in [0,1], inertia beta in [0,1) and alpha+beta <= 1.
struct ModelParams {
  ModelParams(double alpha_in, double beta_in, Distribution mu0_in, Distribution rho_in);

  double alpha;
  double beta;
  Distribution mu0;  // bias / initial opinion law
  Distribution rho;  // recommendation law

  double eta() const { return alpha / (1.0 - beta); }
  double adoption_weight() const { return 1.0 - alpha - beta; }
};

enum class SuccessRule {
  Lemma,    // replace the incumbent iff the draw is strictly closer to the current opinion
  History,  // replace iff the draw beats the incumbent's best recorded serving
};

// Exploration schedule: draw a fresh recommendation at every step k with
// k % period == 0 (including k = 0, which seeds the incumbent). An absent
// period means a single draw at k = 0, and then horizon_override gives the
// step count; otherwise the horizon is cycles * period.
struct RecommenderConfig {
  std::optional<int> period;
  int cycles = 20;
  std::optional<int> horizon_override;
  SuccessRule success_rule = SuccessRule::Lemma;
  std::uint64_t master_seed = 0;
  // Telemetry only: recorded alongside served recommendations when paths
  // are kept. Never enters control flow; comparisons use distances.
  std::function<double(double)> reward_shape;

  int horizon() const;
};

void validate(const RecommenderConfig& cfg);

bool is_exploration_step(const RecommenderConfig& cfg, int k);

struct UserState {
  double bias = 0.0;     // x0
  double opinion = 0.0;  // x_k
  double incumbent = 0.0;
  // Smallest |x_j - incumbent| over the incumbent's past servings; the
  // History rule compares against it (equivalent to best recorded reward
  // under any strictly decreasing reward shape).
  double incumbent_best_dist = 0.0;
  int step = 0;
};

struct UserTrajectory {
  double x0 = 0.0;
  double x_final = 0.0;
  std::vector<double> path;     // x_0..x_N when recorded
  std::vector<double> served;   // u_0..u_{N-1} when recorded
  std::vector<double> rewards;  // reward_shape(|x_k - u_k|) when recorded
};

double step_opinion(double x, double x0, double u, const ModelParams& params);

// Opinion after k steps under a constant recommendation u:
// x_k = (eta + beta^k (1-eta)) x0 + (1-beta^k)(1-eta) u.
double closed_form_hold(double x0, double u, const ModelParams& params, int k);

// Probability that a fresh draw from rho lands strictly closer to x than u:
// F(x+d) - rho({x+d}) - F(x-d) with d = |x-u|; zero radius gives zero.
double success_probability(double x, double u, const Distribution& rho);

// Fixed reward shape r(d) = exp(-d^2), used for telemetry only.
double reward(double dist);

// Advances the state by one step (serving, incumbent bookkeeping, opinion
// update). Draws from rng only on exploration steps. Returns the served u.
double recommender_step(UserState& state, const RecommenderConfig& cfg,
                        const ModelParams& params, RngStream& rng);

// Full trajectory for one user; deterministic given (master_seed, user_index).
UserTrajectory simulate_user(const ModelParams& params, const RecommenderConfig& cfg,
                             std::uint64_t user_index, double bias,
                             bool record_paths = false);

// M users with biases from the reserved bias substream and per-user streams
// derived from (master_seed, user_index). Results are independent of the
// worker count.
std::vector<UserTrajectory> simulate_population(const ModelParams& params,
                                                const RecommenderConfig& cfg,
                                                std::size_t M, int workers = 1,
                                                bool record_paths = false);

}  // namespace oploop
