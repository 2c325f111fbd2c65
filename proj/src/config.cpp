#include "oploop/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

using nlohmann::json;

namespace oploop {
namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what);
}

const json& require_object(const json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "must be an object");
  return j;
}

const json& require_key(const json& j, const std::string& parent, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) fail(parent.empty() ? key : parent + "." + key, "is required");
  return *it;
}

void reject_unknown_keys(const json& j, const std::string& parent,
                         const std::set<std::string>& allowed) {
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key))
      fail(parent.empty() ? key : parent + "." + key, "unknown field");
  }
}

double number_at(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "must be finite");
  return v;
}

std::int64_t integer_at(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "must be an integer");
  return j.get<std::int64_t>();
}

std::string string_at(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "must be a string");
  return j.get<std::string>();
}

std::string dotted(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return j;
}

SuccessRule parse_success_rule(const json& j, const std::string& field) {
  const std::string s = string_at(j, field);
  if (s == "lemma") return SuccessRule::Lemma;
  if (s == "history") return SuccessRule::History;
  fail(field, "must be \"lemma\" or \"history\" (got \"" + s + "\")");
}

OutputConfig parse_output(const json& j, const std::string& parent) {
  OutputConfig out;
  require_object(j, parent);
  reject_unknown_keys(j, parent, {"dir", "record_paths"});
  if (j.contains("dir")) out.dir = string_at(j.at("dir"), dotted(parent, "dir"));
  if (j.contains("record_paths")) {
    const auto& rp = j.at("record_paths");
    if (!rp.is_boolean()) fail(dotted(parent, "record_paths"), "must be a boolean");
    out.record_paths = rp.get<bool>();
  }
  return out;
}

}  // namespace

Distribution parse_distribution(const json& j, const std::string& field) {
  require_object(j, field);
  const std::string kind = string_at(require_key(j, field, "kind"), dotted(field, "kind"));
  try {
    if (kind == "gaussian") {
      reject_unknown_keys(j, field, {"kind", "mean", "std"});
      return Distribution::gaussian(
          number_at(require_key(j, field, "mean"), dotted(field, "mean")),
          number_at(require_key(j, field, "std"), dotted(field, "std")));
    }
    if (kind == "uniform") {
      reject_unknown_keys(j, field, {"kind", "lo", "hi"});
      return Distribution::uniform(
          number_at(require_key(j, field, "lo"), dotted(field, "lo")),
          number_at(require_key(j, field, "hi"), dotted(field, "hi")));
    }
    if (kind == "dirac") {
      reject_unknown_keys(j, field, {"kind", "point"});
      return Distribution::dirac(
          number_at(require_key(j, field, "point"), dotted(field, "point")));
    }
    if (kind == "mixture") {
      reject_unknown_keys(j, field, {"kind", "components"});
      const json& comps = require_key(j, field, "components");
      if (!comps.is_array() || comps.empty())
        fail(dotted(field, "components"), "must be a nonempty array");
      std::vector<MixtureComponent> components;
      for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string cfield = dotted(field, "components[" + std::to_string(i) + "]");
        require_object(comps[i], cfield);
        reject_unknown_keys(comps[i], cfield, {"weight", "mean", "std"});
        components.push_back(
            {number_at(require_key(comps[i], cfield, "weight"), dotted(cfield, "weight")),
             {number_at(require_key(comps[i], cfield, "mean"), dotted(cfield, "mean")),
              number_at(require_key(comps[i], cfield, "std"), dotted(cfield, "std"))}});
      }
      return Distribution::mixture(std::move(components));
    }
    if (kind == "empirical") {
      reject_unknown_keys(j, field, {"kind", "samples"});
      const json& samples = require_key(j, field, "samples");
      if (!samples.is_array() || samples.empty())
        fail(dotted(field, "samples"), "must be a nonempty array");
      std::vector<double> values;
      values.reserve(samples.size());
      for (std::size_t i = 0; i < samples.size(); ++i)
        values.push_back(
            number_at(samples[i], dotted(field, "samples[" + std::to_string(i) + "]")));
      return Distribution::empirical(std::move(values));
    }
  } catch (const std::invalid_argument& e) {
    fail(field, e.what());
  }
  fail(dotted(field, "kind"),
       "must be one of gaussian, uniform, mixture, dirac, empirical (got \"" + kind +
           "\")");
}

RunConfig parse_run_config(const json& j) {
  require_object(j, "config");
  reject_unknown_keys(j, "", {"model", "recommender", "population", "output"});

  const json& model = require_object(require_key(j, "", "model"), "model");
  reject_unknown_keys(model, "model", {"alpha", "beta", "mu0", "rho"});
  const double alpha = number_at(require_key(model, "model", "alpha"), "model.alpha");
  const double beta = number_at(require_key(model, "model", "beta"), "model.beta");
  if (alpha < 0.0 || alpha > 1.0) {
    std::ostringstream oss;
    oss << "must lie in [0,1] (got " << alpha << ")";
    fail("model.alpha", oss.str());
  }
  if (beta < 0.0 || beta >= 1.0) {
    std::ostringstream oss;
    oss << "must lie in [0,1) (got " << beta << ")";
    fail("model.beta", oss.str());
  }
  if (alpha + beta > 1.0) {
    std::ostringstream oss;
    oss << "model.alpha + model.beta: must not exceed 1 (got " << alpha << " + " << beta
        << ")";
    throw ConfigError(oss.str());
  }
  Distribution mu0 = parse_distribution(require_key(model, "model", "mu0"), "model.mu0");
  Distribution rho = parse_distribution(require_key(model, "model", "rho"), "model.rho");

  const json& rec = require_object(require_key(j, "", "recommender"), "recommender");
  reject_unknown_keys(rec, "recommender",
                      {"period", "cycles", "horizon", "success_rule"});
  RecommenderConfig cfg;
  const json& period = require_key(rec, "recommender", "period");
  if (period.is_string()) {
    if (period.get<std::string>() != "initial_only")
      fail("recommender.period", "must be a positive integer or \"initial_only\"");
    cfg.period.reset();
    if (rec.contains("cycles"))
      fail("recommender.cycles", "not allowed when period is \"initial_only\"");
    const auto horizon =
        integer_at(require_key(rec, "recommender", "horizon"), "recommender.horizon");
    if (horizon < 1) fail("recommender.horizon", "must be a positive integer");
    cfg.horizon_override = static_cast<int>(horizon);
  } else {
    const auto t = integer_at(period, "recommender.period");
    if (t < 1) fail("recommender.period", "must be a positive integer");
    cfg.period = static_cast<int>(t);
    if (rec.contains("horizon"))
      fail("recommender.horizon", "only allowed when period is \"initial_only\"");
    const auto cycles =
        integer_at(require_key(rec, "recommender", "cycles"), "recommender.cycles");
    if (cycles < 1) fail("recommender.cycles", "must be a positive integer");
    cfg.cycles = static_cast<int>(cycles);
  }
  if (rec.contains("success_rule"))
    cfg.success_rule = parse_success_rule(rec.at("success_rule"), "recommender.success_rule");

  const json& pop = require_object(require_key(j, "", "population"), "population");
  reject_unknown_keys(pop, "population", {"M", "seed"});
  const auto m = integer_at(require_key(pop, "population", "M"), "population.M");
  if (m < 1) fail("population.M", "must be a positive integer");
  if (pop.contains("seed")) {
    const auto seed = integer_at(pop.at("seed"), "population.seed");
    if (seed < 0) fail("population.seed", "must be nonnegative");
    cfg.master_seed = static_cast<std::uint64_t>(seed);
  }

  RunConfig rc{ModelParams(alpha, beta, std::move(mu0), std::move(rho)), cfg,
               static_cast<std::size_t>(m), OutputConfig{}};
  if (j.contains("output")) rc.output = parse_output(j.at("output"), "output");
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_json_file(path));
}

SweepConfig parse_sweep_config(const json& j) {
  require_object(j, "config");
  reject_unknown_keys(j, "", {"sweep", "output"});
  const json& s = require_object(require_key(j, "", "sweep"), "sweep");
  reject_unknown_keys(s, "sweep",
                      {"alphas", "betas", "t_values", "cycles", "population", "seed",
                       "mu0", "rho", "success_rule"});

  SweepConfig out;
  SweepSpec& spec = out.spec;

  const json& alphas = require_key(s, "sweep", "alphas");
  if (!alphas.is_array() || alphas.empty())
    fail("sweep.alphas", "must be a nonempty array");
  spec.alphas.clear();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const std::string field = "sweep.alphas[" + std::to_string(i) + "]";
    const double a = number_at(alphas[i], field);
    if (a < 0.0 || a > 1.0) fail(field, "must lie in [0,1]");
    spec.alphas.push_back(a);
  }

  spec.betas_per_alpha.clear();
  if (s.contains("betas")) {
    const json& betas = s.at("betas");
    if (!betas.is_array() || betas.size() != spec.alphas.size())
      fail("sweep.betas", "must be an array with one beta list per alpha");
    for (std::size_t i = 0; i < betas.size(); ++i) {
      const std::string lfield = "sweep.betas[" + std::to_string(i) + "]";
      if (!betas[i].is_array() || betas[i].empty()) fail(lfield, "must be a nonempty array");
      std::vector<double> list;
      for (std::size_t k = 0; k < betas[i].size(); ++k) {
        const std::string field = lfield + "[" + std::to_string(k) + "]";
        const double b = number_at(betas[i][k], field);
        if (b < 0.0 || b >= 1.0) fail(field, "must lie in [0,1)");
        if (spec.alphas[i] + b > 1.0) {
          std::ostringstream oss;
          oss << "sweep.alphas[" << i << "] + " << field << ": must not exceed 1 (got "
              << spec.alphas[i] << " + " << b << ")";
          throw ConfigError(oss.str());
        }
        list.push_back(b);
      }
      spec.betas_per_alpha.push_back(std::move(list));
    }
  } else {
    for (double alpha : spec.alphas) {
      std::vector<double> list;
      for (int i = 0; i * 0.1 <= std::min(1.0 - alpha, 0.9) + 1e-12; ++i)
        list.push_back(i * 0.1);
      spec.betas_per_alpha.push_back(std::move(list));
    }
  }

  const json& ts = require_key(s, "sweep", "t_values");
  if (!ts.is_array() || ts.empty()) fail("sweep.t_values", "must be a nonempty array");
  spec.t_values.clear();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const std::string field = "sweep.t_values[" + std::to_string(i) + "]";
    const auto t = integer_at(ts[i], field);
    if (t < 1) fail(field, "must be a positive integer");
    spec.t_values.push_back(static_cast<int>(t));
  }

  if (s.contains("cycles")) {
    const auto cycles = integer_at(s.at("cycles"), "sweep.cycles");
    if (cycles < 1) fail("sweep.cycles", "must be a positive integer");
    spec.cycles = static_cast<int>(cycles);
  }
  if (s.contains("population")) {
    const auto m = integer_at(s.at("population"), "sweep.population");
    if (m < 2) fail("sweep.population", "must be at least 2");
    spec.population = static_cast<std::size_t>(m);
  }
  if (s.contains("seed")) {
    const auto seed = integer_at(s.at("seed"), "sweep.seed");
    if (seed < 0) fail("sweep.seed", "must be nonnegative");
    spec.master_seed = static_cast<std::uint64_t>(seed);
  }
  if (s.contains("mu0")) spec.mu0 = parse_distribution(s.at("mu0"), "sweep.mu0");
  if (s.contains("rho")) spec.rho = parse_distribution(s.at("rho"), "sweep.rho");
  if (s.contains("success_rule"))
    spec.success_rule = parse_success_rule(s.at("success_rule"), "sweep.success_rule");

  if (j.contains("output")) out.output = parse_output(j.at("output"), "output");
  return out;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  return parse_sweep_config(read_json_file(path));
}

}  // namespace oploop
