#include "oploop/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace oploop {

ModelParams::ModelParams(double alpha_in, double beta_in, Distribution mu0_in,
                         Distribution rho_in)
    : alpha(alpha_in), beta(beta_in), mu0(std::move(mu0_in)), rho(std::move(rho_in)) {
  if (!(std::isfinite(alpha) && alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("model: alpha must lie in [0,1]");
  if (!(std::isfinite(beta) && beta >= 0.0 && beta < 1.0))
    throw std::invalid_argument("model: beta must lie in [0,1)");
  if (alpha + beta > 1.0)
    throw std::invalid_argument("model: alpha+beta must not exceed 1");
}

int RecommenderConfig::horizon() const {
  validate(*this);
  return period ? *period * cycles : *horizon_override;
}

void validate(const RecommenderConfig& cfg) {
  if (cfg.period) {
    if (*cfg.period < 1)
      throw std::invalid_argument("recommender: period must be a positive integer");
    if (cfg.cycles < 1)
      throw std::invalid_argument("recommender: cycles must be a positive integer");
  } else {
    if (!cfg.horizon_override)
      throw std::invalid_argument(
          "recommender: horizon is required when exploration happens only at k=0");
    if (*cfg.horizon_override < 1)
      throw std::invalid_argument("recommender: horizon must be a positive integer");
  }
}

bool is_exploration_step(const RecommenderConfig& cfg, int k) {
  if (k == 0) return true;
  return cfg.period && (k % *cfg.period == 0);
}

double step_opinion(double x, double x0, double u, const ModelParams& p) {
  return p.alpha * x0 + p.beta * x + p.adoption_weight() * u;
}

double closed_form_hold(double x0, double u, const ModelParams& p, int k) {
  if (k < 0) throw std::invalid_argument("closed_form_hold: k must be nonnegative");
  const double eta = p.eta();
  const double bk = std::pow(p.beta, k);
  return (eta + bk * (1.0 - eta)) * x0 + (1.0 - bk) * (1.0 - eta) * u;
}

double success_probability(double x, double u, const Distribution& rho) {
  const double d = std::abs(x - u);
  if (d == 0.0) return 0.0;
  const double p = rho.cdf(x + d) - rho.point_mass(x + d) - rho.cdf(x - d);
  return std::clamp(p, 0.0, 1.0);
}

double reward(double dist) { return std::exp(-dist * dist); }

double recommender_step(UserState& state, const RecommenderConfig& cfg,
                        const ModelParams& params, RngStream& rng) {
  const int k = state.step;
  double served;
  if (is_exploration_step(cfg, k)) {
    const double u = params.rho.sample_one(rng);
    const double draw_dist = std::abs(state.opinion - u);
    if (k == 0) {
      state.incumbent = u;  // unconditionally seeds the incumbent
      state.incumbent_best_dist = draw_dist;
    } else {
      const bool success = (cfg.success_rule == SuccessRule::Lemma)
                               ? draw_dist < std::abs(state.opinion - state.incumbent)
                               : draw_dist < state.incumbent_best_dist;
      if (success) {  // ties keep the incumbent
        state.incumbent = u;
        state.incumbent_best_dist = draw_dist;
      }
    }
    served = u;  // the explored draw is always served
  } else {
    served = state.incumbent;
    state.incumbent_best_dist =
        std::min(state.incumbent_best_dist, std::abs(state.opinion - state.incumbent));
  }
  state.opinion = step_opinion(state.opinion, state.bias, served, params);
  state.step = k + 1;
  return served;
}

UserTrajectory simulate_user(const ModelParams& params, const RecommenderConfig& cfg,
                             std::uint64_t user_index, double bias, bool record_paths) {
  const int horizon = cfg.horizon();
  RngStream rng = RngStream::substream(cfg.master_seed, user_index);

  UserState state;
  state.bias = bias;
  state.opinion = bias;

  UserTrajectory traj;
  traj.x0 = bias;
  if (record_paths) {
    traj.path.reserve(horizon + 1);
    traj.served.reserve(horizon);
    traj.rewards.reserve(horizon);
    traj.path.push_back(bias);
  }
  for (int k = 0; k < horizon; ++k) {
    const double before = state.opinion;
    const double u = recommender_step(state, cfg, params, rng);
    if (record_paths) {
      traj.path.push_back(state.opinion);
      traj.served.push_back(u);
      const double d = std::abs(before - u);
      traj.rewards.push_back(cfg.reward_shape ? cfg.reward_shape(d) : reward(d));
    }
  }
  traj.x_final = state.opinion;
  return traj;
}

std::vector<UserTrajectory> simulate_population(const ModelParams& params,
                                                const RecommenderConfig& cfg,
                                                std::size_t M, int workers,
                                                bool record_paths) {
  if (M == 0) throw std::invalid_argument("population: M must be positive");
  if (workers < 1) throw std::invalid_argument("population: workers must be positive");
  validate(cfg);

  // Biases are drawn serially from the reserved substream so the first M
  // draws are a prefix of any larger population's.
  RngStream bias_stream = RngStream::substream(cfg.master_seed, kBiasStreamId);
  const std::vector<double> biases = params.mu0.sample(M, bias_stream);

  std::vector<UserTrajectory> out(M);
  auto run_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      out[i] = simulate_user(params, cfg, i, biases[i], record_paths);
  };

  const auto w = static_cast<std::size_t>(workers);
  if (w <= 1 || M < 2 * w) {
    run_range(0, M);
    return out;
  }

  std::vector<std::thread> threads;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const std::size_t chunk = (M + w - 1) / w;
  for (std::size_t lo = 0; lo < M; lo += chunk) {
    const std::size_t hi = std::min(M, lo + chunk);
    threads.emplace_back([&, lo, hi] {
      try {
        run_range(lo, hi);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace oploop
