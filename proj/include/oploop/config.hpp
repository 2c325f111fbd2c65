#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "oploop/dynamics.hpp"
#include "oploop/experiments.hpp"

namespace oploop {

// Configuration problem tied to a specific field; message carries the field
// path, e.g. "model.alpha: must lie in [0,1] (got 1.5)".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutputConfig {
  std::filesystem::path dir;
  bool record_paths = false;
};

struct RunConfig {
  ModelParams params;
  RecommenderConfig recommender;
  std::size_t population = 1000;
  OutputConfig output;
};

// Schema:
// {
//   "model": {"alpha": a, "beta": b, "mu0": <distribution>, "rho": <distribution>},
//   "recommender": {"period": T | "initial_only", "cycles": n | "horizon": N,
//                   "success_rule": "lemma" | "history"},
//   "population": {"M": m, "seed": s},
//   "output": {"dir": "...", "record_paths": false}
// }
// Distribution literals: {"kind": "gaussian", "mean": m, "std": s},
// {"kind": "uniform", "lo": a, "hi": b}, {"kind": "dirac", "point": p},
// {"kind": "mixture", "components": [{"weight": w, "mean": m, "std": s}, ...]},
// {"kind": "empirical", "samples": [...]}.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

// Schema:
// {
//   "sweep": {"alphas": [...], "betas": [[...], ...] (optional),
//             "t_values": [...], "cycles": n, "population": m, "seed": s,
//             "mu0": <distribution>, "rho": <distribution>,
//             "success_rule": "lemma" | "history"},
//   "output": {"dir": "..."}
// }
// When "betas" is absent each alpha gets {0, 0.1, ..., min(1-alpha, 0.9)}.
struct SweepConfig {
  SweepSpec spec;
  OutputConfig output;
};
SweepConfig parse_sweep_config(const nlohmann::json& j);
SweepConfig load_sweep_config(const std::filesystem::path& path);

Distribution parse_distribution(const nlohmann::json& j, const std::string& field);

}  // namespace oploop
