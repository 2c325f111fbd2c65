#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>

#include <json.hpp>

#include "oploop/config.hpp"

using namespace oploop;
using nlohmann::json;

namespace {

json valid_run() {
  return json::parse(R"({
    "model": {
      "alpha": 0.1, "beta": 0.7,
      "mu0": {"kind": "uniform", "lo": 0.0, "hi": 2.0},
      "rho": {"kind": "gaussian", "mean": 0.0, "std": 0.5}
    },
    "recommender": {"period": 5, "cycles": 10, "success_rule": "history"},
    "population": {"M": 100, "seed": 42},
    "output": {"dir": "artifacts", "record_paths": true}
  })");
}

json valid_sweep() {
  return json::parse(R"({
    "sweep": {"alphas": [0.0, 0.5], "t_values": [1, 3]},
    "output": {"dir": "sweep-out"}
  })");
}

}  // namespace

TEST_CASE("full run config round trip") {
  const auto rc = parse_run_config(valid_run());
  CHECK(rc.params.alpha == 0.1);
  CHECK(rc.params.beta == 0.7);
  const auto* mu0 = std::get_if<UniformSpec>(&rc.params.mu0.value());
  REQUIRE(mu0 != nullptr);
  CHECK(mu0->lo == 0.0);
  CHECK(mu0->hi == 2.0);
  REQUIRE(rc.params.rho.as_gaussian() != nullptr);
  CHECK(rc.params.rho.as_gaussian()->stddev == 0.5);
  REQUIRE(rc.recommender.period.has_value());
  CHECK(*rc.recommender.period == 5);
  CHECK(rc.recommender.cycles == 10);
  CHECK(rc.recommender.horizon() == 50);
  CHECK(rc.recommender.success_rule == SuccessRule::History);
  CHECK(rc.recommender.master_seed == 42);
  CHECK(rc.population == 100);
  CHECK(rc.output.dir == "artifacts");
  CHECK(rc.output.record_paths);
}

TEST_CASE("single-draw schedule uses horizon instead of cycles") {
  auto j = valid_run();
  j["recommender"] = {{"period", "initial_only"}, {"horizon", 100}};
  const auto rc = parse_run_config(j);
  CHECK_FALSE(rc.recommender.period.has_value());
  CHECK(rc.recommender.horizon() == 100);

  j["recommender"] = {{"period", "initial_only"}, {"horizon", 100}, {"cycles", 3}};
  CHECK_THROWS_WITH_AS(parse_run_config(j),
                       "recommender.cycles: not allowed when period is \"initial_only\"",
                       ConfigError);

  j["recommender"] = {{"period", "initial_only"}};
  CHECK_THROWS_WITH_AS(parse_run_config(j), "recommender.horizon: is required", ConfigError);

  j["recommender"] = {{"period", 5}, {"cycles", 10}, {"horizon", 100}};
  CHECK_THROWS_WITH_AS(parse_run_config(j),
                       "recommender.horizon: only allowed when period is \"initial_only\"",
                       ConfigError);

  j["recommender"] = {{"period", "weekly"}, {"horizon", 100}};
  CHECK_THROWS_WITH_AS(parse_run_config(j),
                       "recommender.period: must be a positive integer or \"initial_only\"",
                       ConfigError);
}

TEST_CASE("model field errors name the offending path") {
  auto j = valid_run();
  j["model"]["alpha"] = 1.5;
  CHECK_THROWS_WITH_AS(parse_run_config(j), "model.alpha: must lie in [0,1] (got 1.5)",
                       ConfigError);

  j = valid_run();
  j["model"]["beta"] = 1.0;
  CHECK_THROWS_WITH_AS(parse_run_config(j), "model.beta: must lie in [0,1) (got 1)",
                       ConfigError);

  j = valid_run();
  j["model"]["alpha"] = 0.6;
  j["model"]["beta"] = 0.5;
  CHECK_THROWS_WITH_AS(parse_run_config(j),
                       "model.alpha + model.beta: must not exceed 1 (got 0.6 + 0.5)",
                       ConfigError);

  j = valid_run();
  j["model"].erase("rho");
  CHECK_THROWS_WITH_AS(parse_run_config(j), "model.rho: is required", ConfigError);

  j = valid_run();
  j["model"]["gamma"] = 0.2;
  CHECK_THROWS_WITH_AS(parse_run_config(j), "model.gamma: unknown field", ConfigError);

  j = valid_run();
  j["modle"] = json::object();
  CHECK_THROWS_WITH_AS(parse_run_config(j), "modle: unknown field", ConfigError);

  j = valid_run();
  j["model"]["alpha"] = "x";
  CHECK_THROWS_WITH_AS(parse_run_config(j), "model.alpha: must be a number", ConfigError);
}

TEST_CASE("distribution literal errors name the offending path") {
  auto j = valid_run();
  j["model"]["mu0"] = {{"kind", "triangle"}};
  CHECK_THROWS_WITH_AS(
      parse_run_config(j),
      "model.mu0.kind: must be one of gaussian, uniform, mixture, dirac, empirical "
      "(got \"triangle\")",
      ConfigError);

  j = valid_run();
  j["model"]["rho"] = {{"kind", "gaussian"}, {"mean", 0.0}, {"std", 0.0}};
  CHECK_THROWS_WITH_AS(parse_run_config(j), "model.rho: gaussian: std must be positive",
                       ConfigError);

  j = valid_run();
  j["model"]["rho"] = {{"kind", "mixture"},
                       {"components",
                        {{{"weight", 0.5}, {"mean", -1.0}, {"std", 0.4}},
                         {{"weight", 0.4}, {"mean", 1.0}, {"std", 0.4}}}}};
  CHECK_THROWS_WITH_AS(parse_run_config(j), "model.rho: mixture: weights must sum to 1",
                       ConfigError);

  j = valid_run();
  j["model"]["rho"] = {{"kind", "mixture"},
                       {"components",
                        {{{"weight", 0.5}, {"mean", -1.0}, {"std", 0.4}},
                         {{"weight", 0.5}, {"mean", 1.0}, {"scale", 0.4}}}}};
  CHECK_THROWS_WITH_AS(parse_run_config(j),
                       "model.rho.components[1].scale: unknown field", ConfigError);

  j = valid_run();
  j["model"]["mu0"] = {{"kind", "empirical"}, {"samples", {1.0, "b"}}};
  CHECK_THROWS_WITH_AS(parse_run_config(j), "model.mu0.samples[1]: must be a number",
                       ConfigError);

  j = valid_run();
  j["model"]["mu0"] = {{"kind", "empirical"}, {"samples", {3.0, 1.0}}};
  const auto rc = parse_run_config(j);
  const auto* e = std::get_if<EmpiricalSpec>(&rc.params.mu0.value());
  REQUIRE(e != nullptr);
  CHECK(e->samples == std::vector<double>{1.0, 3.0});

  j = valid_run();
  j["model"]["rho"] = {{"kind", "dirac"}, {"point", 0.25}};
  CHECK(std::get<DiracSpec>(parse_run_config(j).params.rho.value()).point == 0.25);
}

TEST_CASE("recommender and population errors") {
  auto j = valid_run();
  j["recommender"]["period"] = 0;
  CHECK_THROWS_WITH_AS(parse_run_config(j), "recommender.period: must be a positive integer",
                       ConfigError);

  j = valid_run();
  j["recommender"]["cycles"] = -1;
  CHECK_THROWS_WITH_AS(parse_run_config(j), "recommender.cycles: must be a positive integer",
                       ConfigError);

  j = valid_run();
  j["recommender"]["success_rule"] = "greedy";
  CHECK_THROWS_WITH_AS(parse_run_config(j),
                       "recommender.success_rule: must be \"lemma\" or \"history\" "
                       "(got \"greedy\")",
                       ConfigError);

  j = valid_run();
  j["population"]["M"] = 0;
  CHECK_THROWS_WITH_AS(parse_run_config(j), "population.M: must be a positive integer",
                       ConfigError);

  j = valid_run();
  j["population"]["M"] = 2.5;
  CHECK_THROWS_WITH_AS(parse_run_config(j), "population.M: must be an integer", ConfigError);

  j = valid_run();
  j["population"]["seed"] = -1;
  CHECK_THROWS_WITH_AS(parse_run_config(j), "population.seed: must be nonnegative",
                       ConfigError);

  j = valid_run();
  j["output"]["record_paths"] = 1;
  CHECK_THROWS_WITH_AS(parse_run_config(j), "output.record_paths: must be a boolean",
                       ConfigError);

  j = valid_run();
  j.erase("population");
  CHECK_THROWS_WITH_AS(parse_run_config(j), "population: is required", ConfigError);
}

TEST_CASE("sweep config defaults derive the beta grids") {
  const auto sc = parse_sweep_config(valid_sweep());
  CHECK(sc.spec.alphas == std::vector<double>{0.0, 0.5});
  REQUIRE(sc.spec.betas_per_alpha.size() == 2);
  CHECK(sc.spec.betas_per_alpha[0].size() == 10);  // 0.0 .. 0.9
  CHECK(sc.spec.betas_per_alpha[0].front() == 0.0);
  CHECK(sc.spec.betas_per_alpha[0].back() == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(sc.spec.betas_per_alpha[1].size() == 6);  // 0.0 .. 0.5 caps at 1 - alpha
  CHECK(sc.spec.betas_per_alpha[1].back() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sc.spec.t_values == std::vector<int>{1, 3});
  CHECK(sc.spec.cycles == 20);
  CHECK(sc.spec.population == 500);
  CHECK(sc.spec.master_seed == 1);
  CHECK(std::get_if<UniformSpec>(&sc.spec.mu0.value()) != nullptr);
  CHECK(sc.spec.rho.as_gaussian() != nullptr);
  CHECK(sc.output.dir == "sweep-out");
}

TEST_CASE("sweep config explicit fields and errors") {
  auto j = valid_sweep();
  j["sweep"]["betas"] = {{0.2}, {0.4}};
  j["sweep"]["cycles"] = 7;
  j["sweep"]["population"] = 64;
  j["sweep"]["seed"] = 5;
  j["sweep"]["success_rule"] = "history";
  j["sweep"]["rho"] = {{"kind", "dirac"}, {"point", 0.0}};
  const auto sc = parse_sweep_config(j);
  CHECK(sc.spec.betas_per_alpha == std::vector<std::vector<double>>{{0.2}, {0.4}});
  CHECK(sc.spec.cycles == 7);
  CHECK(sc.spec.population == 64);
  CHECK(sc.spec.master_seed == 5);
  CHECK(sc.spec.success_rule == SuccessRule::History);

  j = valid_sweep();
  j["sweep"]["betas"] = {{0.2}};
  CHECK_THROWS_WITH_AS(parse_sweep_config(j),
                       "sweep.betas: must be an array with one beta list per alpha",
                       ConfigError);

  j = valid_sweep();
  j["sweep"]["alphas"] = {0.5};
  j["sweep"]["betas"] = {{0.6}};
  CHECK_THROWS_WITH_AS(parse_sweep_config(j),
                       "sweep.alphas[0] + sweep.betas[0][0]: must not exceed 1 "
                       "(got 0.5 + 0.6)",
                       ConfigError);

  j = valid_sweep();
  j["sweep"]["t_values"] = {0};
  CHECK_THROWS_WITH_AS(parse_sweep_config(j),
                       "sweep.t_values[0]: must be a positive integer", ConfigError);

  j = valid_sweep();
  j["sweep"]["population"] = 1;
  CHECK_THROWS_WITH_AS(parse_sweep_config(j), "sweep.population: must be at least 2",
                       ConfigError);

  j = valid_sweep();
  j["sweep"]["alphas"] = {1.5};
  CHECK_THROWS_WITH_AS(parse_sweep_config(j), "sweep.alphas[0]: must lie in [0,1]",
                       ConfigError);
}

TEST_CASE("config files load with path-prefixed errors") {
  namespace fs = std::filesystem;
  fs::create_directories("config_test_out");

  const fs::path good = "config_test_out/good.json";
  std::ofstream(good) << valid_run().dump(2);
  const auto rc = load_run_config(good);
  CHECK(rc.population == 100);

  const fs::path sweep_file = "config_test_out/sweep.json";
  std::ofstream(sweep_file) << valid_sweep().dump(2);
  CHECK(load_sweep_config(sweep_file).spec.alphas.size() == 2);

  try {
    load_run_config("config_test_out/nope.json");
    FAIL("missing file must not parse");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("cannot open config file") != std::string::npos);
  }

  const fs::path broken = "config_test_out/broken.json";
  std::ofstream(broken) << "{ not json";
  try {
    load_run_config(broken);
    FAIL("malformed file must not parse");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("config parse error") != std::string::npos);
  }
}
