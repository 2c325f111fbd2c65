#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "oploop/dynamics.hpp"

using namespace oploop;

namespace {

ModelParams default_params() {
  return ModelParams(0.1, 0.7, Distribution::uniform(-2.0, 2.0),
                     Distribution::gaussian(0.0, 0.5));
}

RecommenderConfig periodic(int period, int cycles, std::uint64_t seed,
                           SuccessRule rule = SuccessRule::Lemma) {
  RecommenderConfig cfg;
  cfg.period = period;
  cfg.cycles = cycles;
  cfg.success_rule = rule;
  cfg.master_seed = seed;
  return cfg;
}

RecommenderConfig initial_only(int horizon, std::uint64_t seed) {
  RecommenderConfig cfg;
  cfg.period.reset();
  cfg.horizon_override = horizon;
  cfg.master_seed = seed;
  return cfg;
}

double std_normal_cdf(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

}  // namespace

TEST_CASE("model parameter validation") {
  const auto mu0 = Distribution::uniform(0.0, 1.0);
  const auto rho = Distribution::gaussian(0.0, 1.0);
  CHECK_THROWS_AS(ModelParams(-0.1, 0.5, mu0, rho), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams(1.1, 0.0, mu0, rho), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams(0.0, 1.0, mu0, rho), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams(0.0, -0.1, mu0, rho), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams(0.6, 0.5, mu0, rho), std::invalid_argument);

  const ModelParams edge(0.3, 0.7, mu0, rho);  // alpha + beta == 1 is allowed
  CHECK(edge.eta() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(edge.adoption_weight()) <= 1e-15);

  const ModelParams p(0.1, 0.7, mu0, rho);
  CHECK(p.eta() == doctest::Approx(0.1 / 0.3).epsilon(1e-15));
  CHECK(p.adoption_weight() == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("one-step opinion update") {
  const auto mu0 = Distribution::uniform(0.0, 1.0);
  const auto rho = Distribution::gaussian(0.0, 1.0);

  const ModelParams anchored(1.0, 0.0, mu0, rho);
  CHECK(step_opinion(0.3, 0.9, 0.5, anchored) == 0.9);

  const ModelParams adopter(0.0, 0.0, mu0, rho);
  CHECK(step_opinion(0.3, 0.9, 0.5, adopter) == 0.5);

  const ModelParams mixed(0.1, 0.7, mu0, rho);
  CHECK(step_opinion(0.5, 1.0, -0.5, mixed) ==
        doctest::Approx(0.1 * 1.0 + 0.7 * 0.5 + 0.2 * (-0.5)).epsilon(1e-15));
}

TEST_CASE("constant-recommendation closed form matches iteration") {
  const auto mu0 = Distribution::uniform(0.0, 1.0);
  const auto rho = Distribution::gaussian(0.0, 1.0);
  RngStream rng(314);
  for (int trial = 0; trial < 25; ++trial) {
    const double alpha = rng.uniform01();
    const double beta = (1.0 - alpha) * 0.9 * rng.uniform01();
    const ModelParams p(alpha, beta, mu0, rho);
    const double x0 = -2.0 + 4.0 * rng.uniform01();
    const double u = -2.0 + 4.0 * rng.uniform01();
    double x = x0;
    for (int k = 0; k <= 60; ++k) {
      CHECK(std::abs(x - closed_form_hold(x0, u, p, k)) <= 1e-12);
      x = step_opinion(x, x0, u, p);
    }
  }
  CHECK_THROWS_AS(closed_form_hold(0.0, 0.0, ModelParams(0.1, 0.7, mu0, rho), -1),
                  std::invalid_argument);
}

TEST_CASE("success probability closed forms") {
  const auto u11 = Distribution::uniform(-1.0, 1.0);
  CHECK(success_probability(0.1, 0.1, u11) == 0.0);
  CHECK(success_probability(0.0, 0.0, Distribution::dirac(0.0)) == 0.0);
  CHECK(std::abs(success_probability(0.1, 0.4, u11) - 0.3) <= 1e-12);
  CHECK(std::abs(success_probability(-0.2, 0.3, u11) - 0.5) <= 1e-12);
  CHECK(std::abs(success_probability(0.95, 0.85, u11) - 0.075) <= 1e-12);

  const auto n01 = Distribution::gaussian(0.0, 1.0);
  const double expected = std_normal_cdf(1.0) - std_normal_cdf(-1.0);
  CHECK(std::abs(success_probability(0.0, 1.0, n01) - expected) <= 1e-12);

  // An atom exactly one radius away never counts as strictly closer.
  CHECK(success_probability(0.0, 1.0, Distribution::dirac(1.0)) == 0.0);
  CHECK(success_probability(0.0, 1.0, Distribution::dirac(-1.0)) == 0.0);
  CHECK(success_probability(0.0, 1.0, Distribution::dirac(0.5)) == 1.0);
}

TEST_CASE("success probability matches simulated frequency") {
  const auto n01 = Distribution::gaussian(0.0, 1.0);
  const double x = 0.3;
  const double u = -0.2;
  const double d = std::abs(x - u);
  const double p = std_normal_cdf(x + d) - std_normal_cdf(x - d);
  CHECK(std::abs(success_probability(x, u, n01) - p) <= 1e-12);

  auto rng = RngStream::substream(271828, 5);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(n01.sample_one(rng) - x) < d) ++hits;
  }
  const double freq = static_cast<double>(hits) / n;
  CHECK(std::abs(freq - p) <= 4.0 * std::sqrt(p * (1.0 - p) / n));
}

TEST_CASE("reward shape") {
  CHECK(reward(0.0) == 1.0);
  CHECK(reward(1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(reward(0.5) > reward(0.6));
}

TEST_CASE("recommender schedule and validation") {
  auto cfg = periodic(5, 3, 0);
  CHECK(cfg.horizon() == 15);
  CHECK(is_exploration_step(cfg, 0));
  CHECK(is_exploration_step(cfg, 5));
  CHECK(is_exploration_step(cfg, 10));
  CHECK_FALSE(is_exploration_step(cfg, 3));
  CHECK_FALSE(is_exploration_step(cfg, 14));

  auto once = initial_only(100, 0);
  CHECK(once.horizon() == 100);
  CHECK(is_exploration_step(once, 0));
  CHECK_FALSE(is_exploration_step(once, 7));

  CHECK_THROWS_AS(periodic(0, 3, 0).horizon(), std::invalid_argument);
  CHECK_THROWS_AS(periodic(5, 0, 0).horizon(), std::invalid_argument);
  RecommenderConfig missing;
  missing.period.reset();
  CHECK_THROWS_AS(missing.horizon(), std::invalid_argument);
  RecommenderConfig zero = initial_only(0, 0);
  CHECK_THROWS_AS(zero.horizon(), std::invalid_argument);
}

TEST_CASE("first exploration seeds the incumbent unconditionally") {
  const ModelParams p(0.1, 0.7, Distribution::uniform(0.0, 1.0), Distribution::dirac(5.0));
  auto cfg = periodic(3, 4, 0);
  UserState state;
  state.bias = 0.0;
  state.opinion = 0.0;
  state.incumbent = 99.0;
  state.incumbent_best_dist = 99.0;
  RngStream rng(1);
  const double served = recommender_step(state, cfg, p, rng);
  CHECK(served == 5.0);
  CHECK(state.incumbent == 5.0);
  CHECK(state.incumbent_best_dist == 5.0);
  CHECK(state.opinion == doctest::Approx(0.2 * 5.0).epsilon(1e-15));
  CHECK(state.step == 1);
}

TEST_CASE("exploration replaces the incumbent only on a strict improvement") {
  const auto mu0 = Distribution::uniform(0.0, 1.0);
  auto cfg = periodic(3, 4, 0);

  // Tie: the draw matches the incumbent's distance and is discarded.
  {
    const ModelParams p(0.1, 0.7, mu0, Distribution::dirac(-1.0));
    UserState state;
    state.opinion = 0.0;
    state.incumbent = 1.0;
    state.incumbent_best_dist = 1.0;
    state.step = 3;
    RngStream rng(1);
    const double served = recommender_step(state, cfg, p, rng);
    CHECK(served == -1.0);  // the explored draw is served regardless
    CHECK(state.incumbent == 1.0);
  }

  // Strictly closer: the draw takes over.
  {
    const ModelParams p(0.1, 0.7, mu0, Distribution::dirac(0.5));
    UserState state;
    state.opinion = 0.0;
    state.incumbent = 1.0;
    state.incumbent_best_dist = 1.0;
    state.step = 3;
    RngStream rng(1);
    recommender_step(state, cfg, p, rng);
    CHECK(state.incumbent == 0.5);
    CHECK(state.incumbent_best_dist == 0.5);
  }
}

TEST_CASE("history rule compares against the best recorded serving") {
  const auto mu0 = Distribution::uniform(0.0, 1.0);
  const ModelParams p(0.1, 0.7, mu0, Distribution::dirac(0.6));
  UserState lemma_state;
  lemma_state.opinion = 0.5;
  lemma_state.incumbent = 1.0;
  lemma_state.incumbent_best_dist = 0.05;
  lemma_state.step = 3;
  UserState history_state = lemma_state;

  auto lemma_cfg = periodic(3, 4, 0, SuccessRule::Lemma);
  auto history_cfg = periodic(3, 4, 0, SuccessRule::History);
  RngStream r1(1);
  RngStream r2(1);
  recommender_step(lemma_state, lemma_cfg, p, r1);
  recommender_step(history_state, history_cfg, p, r2);
  CHECK(lemma_state.incumbent == 0.6);    // 0.1 < |0.5 - 1.0|
  CHECK(history_state.incumbent == 1.0);  // 0.1 >= 0.05
}

TEST_CASE("exploitation serves the incumbent and consumes no randomness") {
  const ModelParams p = default_params();
  auto cfg = periodic(3, 4, 0);
  UserState state;
  state.opinion = 0.9;
  state.incumbent = 1.0;
  state.incumbent_best_dist = 0.5;
  state.step = 1;
  RngStream rng(7);
  RngStream copy = rng;
  const double served = recommender_step(state, cfg, p, rng);
  CHECK(served == 1.0);
  CHECK(state.incumbent_best_dist == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(rng.next_u64() == copy.next_u64());
}

TEST_CASE("trajectory shape and determinism") {
  const ModelParams p = default_params();
  auto cfg = periodic(5, 4, 42);
  const auto t1 = simulate_user(p, cfg, 3, 0.7, true);
  const auto t2 = simulate_user(p, cfg, 3, 0.7, true);
  CHECK(t1.path.size() == 21);
  CHECK(t1.served.size() == 20);
  CHECK(t1.rewards.size() == 20);
  CHECK(t1.path.front() == 0.7);
  CHECK(t1.path.back() == t1.x_final);
  CHECK(t1.x0 == 0.7);
  CHECK(t1.path == t2.path);
  CHECK(t1.served == t2.served);

  const auto other_user = simulate_user(p, cfg, 4, 0.7, true);
  CHECK(other_user.x_final != t1.x_final);
  const auto other_seed = simulate_user(p, periodic(5, 4, 43), 3, 0.7, true);
  CHECK(other_seed.x_final != t1.x_final);

  const auto bare = simulate_user(p, cfg, 3, 0.7, false);
  CHECK(bare.x_final == t1.x_final);
  CHECK(bare.path.empty());
  CHECK(bare.served.empty());
}

TEST_CASE("single-draw runs follow the constant-recommendation closed form") {
  const ModelParams p(0.1, 0.7, Distribution::uniform(0.0, 1.0), Distribution::dirac(0.8));
  const auto traj = simulate_user(p, initial_only(1000, 9), 0, 0.4, true);
  for (std::size_t k = 0; k < traj.path.size(); ++k) {
    CHECK(std::abs(traj.path[k] - closed_form_hold(0.4, 0.8, p, static_cast<int>(k))) <= 1e-9);
  }
  for (double u : traj.served) CHECK(u == 0.8);
}

TEST_CASE("memoryless adopter tracks the served recommendation exactly") {
  const ModelParams p(0.0, 0.0, Distribution::uniform(0.0, 1.0),
                      Distribution::gaussian(0.0, 1.0));
  const auto traj = simulate_user(p, periodic(1, 50, 11), 2, 0.3, true);
  for (std::size_t k = 0; k < traj.served.size(); ++k) {
    CHECK(traj.path[k + 1] == traj.served[k]);
  }
  CHECK(traj.x_final == traj.served.back());
}

TEST_CASE("zero adoption weight freezes the opinion") {
  const ModelParams p(0.4, 0.6, Distribution::uniform(0.0, 1.0),
                      Distribution::gaussian(0.0, 1.0));
  const auto traj = simulate_user(p, periodic(2, 250, 13), 5, -1.3, true);
  for (double x : traj.path) CHECK(std::abs(x - (-1.3)) <= 1e-12);
}

TEST_CASE("opinions stay in the hull of the bias and served draws") {
  const ModelParams p(0.2, 0.3, Distribution::uniform(-2.0, 2.0),
                      Distribution::uniform(-1.0, 1.0));
  const auto traj = simulate_user(p, periodic(3, 30, 17), 1, 1.8, true);
  double lo = traj.x0;
  double hi = traj.x0;
  for (std::size_t k = 0; k < traj.served.size(); ++k) {
    lo = std::min(lo, traj.served[k]);
    hi = std::max(hi, traj.served[k]);
    CHECK(traj.path[k + 1] >= lo - 1e-12);
    CHECK(traj.path[k + 1] <= hi + 1e-12);
  }
}

TEST_CASE("reward shape is telemetry only") {
  const ModelParams p = default_params();
  auto plain = periodic(4, 10, 23);
  auto shaped = periodic(4, 10, 23);
  shaped.reward_shape = [](double d) { return 1.0 / (1.0 + d); };
  const auto a = simulate_user(p, plain, 6, 0.2, true);
  const auto b = simulate_user(p, shaped, 6, 0.2, true);
  CHECK(a.path == b.path);
  CHECK(a.served == b.served);
  CHECK(a.rewards != b.rewards);
  for (std::size_t k = 0; k < b.served.size(); ++k) {
    const double d = std::abs(b.path[k] - b.served[k]);
    CHECK(b.rewards[k] == doctest::Approx(1.0 / (1.0 + d)).epsilon(1e-15));
    CHECK(a.rewards[k] == doctest::Approx(std::exp(-d * d)).epsilon(1e-15));
  }
}

TEST_CASE("population reuses the bias stream and per-user substreams") {
  const ModelParams p = default_params();
  auto cfg = periodic(5, 4, 99);
  const auto pop = simulate_population(p, cfg, 1, 1);
  RngStream bias_stream = RngStream::substream(99, kBiasStreamId);
  const double bias0 = p.mu0.sample_one(bias_stream);
  const auto solo = simulate_user(p, cfg, 0, bias0, false);
  CHECK(pop.size() == 1);
  CHECK(pop[0].x0 == bias0);
  CHECK(pop[0].x_final == solo.x_final);
}

TEST_CASE("growing the population preserves earlier users") {
  const ModelParams p = default_params();
  auto cfg = periodic(5, 4, 7);
  const auto small = simulate_population(p, cfg, 50, 1);
  const auto large = simulate_population(p, cfg, 200, 1);
  for (std::size_t i = 0; i < small.size(); ++i) {
    CHECK(small[i].x0 == large[i].x0);
    CHECK(small[i].x_final == large[i].x_final);
  }
}

TEST_CASE("results are independent of the worker count") {
  const ModelParams p = default_params();
  auto cfg = periodic(3, 7, 31);
  const auto serial = simulate_population(p, cfg, 101, 1, true);
  for (int workers : {2, 8}) {
    const auto threaded = simulate_population(p, cfg, 101, workers, true);
    REQUIRE(threaded.size() == serial.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
      CHECK(threaded[i].x_final == serial[i].x_final);
      CHECK(threaded[i].path == serial[i].path);
      CHECK(threaded[i].served == serial[i].served);
    }
  }
}

TEST_CASE("population argument validation") {
  const ModelParams p = default_params();
  auto cfg = periodic(3, 7, 31);
  CHECK_THROWS_AS(simulate_population(p, cfg, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_population(p, cfg, 10, 0), std::invalid_argument);
}
