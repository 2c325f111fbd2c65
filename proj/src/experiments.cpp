#include "oploop/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "oploop/rng.hpp"
#include "oploop/transport.hpp"

namespace oploop {

double micro_shift(const std::vector<UserTrajectory>& trajectories) {
  if (trajectories.empty())
    throw std::invalid_argument("micro_shift: needs at least one trajectory");
  double acc = 0.0;
  for (const auto& t : trajectories) acc += std::abs(t.x0 - t.x_final);
  return acc / static_cast<double>(trajectories.size());
}

double mean_square_shift(const std::vector<UserTrajectory>& trajectories) {
  if (trajectories.empty())
    throw std::invalid_argument("mean_square_shift: needs at least one trajectory");
  double acc = 0.0;
  for (const auto& t : trajectories) {
    const double d = t.x0 - t.x_final;
    acc += d * d;
  }
  return acc / static_cast<double>(trajectories.size());
}

double macro_shift(const std::vector<UserTrajectory>& trajectories) {
  if (trajectories.size() < 2)
    throw std::invalid_argument("macro_shift: needs at least two trajectories");
  std::vector<double> initial, final_;
  initial.reserve(trajectories.size());
  final_.reserve(trajectories.size());
  for (const auto& t : trajectories) {
    initial.push_back(t.x0);
    final_.push_back(t.x_final);
  }
  std::sort(initial.begin(), initial.end());
  std::sort(final_.begin(), final_.end());
  return w_distance(initial, final_, 1);
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("pearson: needs two equal-size series");
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double AlphaSlice::cell(SweepMetric metric, std::size_t t_index,
                        std::size_t beta_index) const {
  const auto& values = (metric == SweepMetric::Micro) ? micro : macro;
  return values[t_index * betas.size() + beta_index];
}

double AlphaSlice::max_value(SweepMetric metric) const {
  const auto& values = (metric == SweepMetric::Micro) ? micro : macro;
  return *std::max_element(values.begin(), values.end());
}

SweepGrid run_sweep(const SweepSpec& spec) {
  if (spec.alphas.empty()) throw std::invalid_argument("sweep: alphas must be nonempty");
  if (spec.betas_per_alpha.size() != spec.alphas.size())
    throw std::invalid_argument("sweep: needs one beta list per alpha");
  if (spec.t_values.empty()) throw std::invalid_argument("sweep: t_values must be nonempty");
  if (spec.population < 2)
    throw std::invalid_argument("sweep: population must be at least 2");

  SweepGrid grid;
  grid.slices.reserve(spec.alphas.size());
  for (std::size_t ai = 0; ai < spec.alphas.size(); ++ai) {
    const double alpha = spec.alphas[ai];
    const auto& betas = spec.betas_per_alpha[ai];
    if (betas.empty()) throw std::invalid_argument("sweep: beta list must be nonempty");

    AlphaSlice slice;
    slice.alpha = alpha;
    slice.betas = betas;
    slice.t_values = spec.t_values;
    slice.micro.resize(spec.t_values.size() * betas.size());
    slice.macro.resize(spec.t_values.size() * betas.size());

    for (std::size_t bi = 0; bi < betas.size(); ++bi) {
      const double beta = betas[bi];
      if (alpha + beta > 1.0 || beta >= 1.0) {
        char msg[128];
        std::snprintf(msg, sizeof(msg),
                      "sweep: infeasible cell alpha=%g beta=%g (alpha+beta must not "
                      "exceed 1 and beta must stay below 1)",
                      alpha, beta);
        throw std::invalid_argument(msg);
      }
      const ModelParams params(alpha, beta, spec.mu0, spec.rho);
      for (std::size_t ti = 0; ti < spec.t_values.size(); ++ti) {
        const int t = spec.t_values[ti];
        RecommenderConfig cfg;
        cfg.period = t;
        cfg.cycles = spec.cycles;
        cfg.success_rule = spec.success_rule;
        cfg.master_seed =
            mix_seed(mix_seed(mix_seed(spec.master_seed, ai), bi), static_cast<std::uint64_t>(t));
        const auto trajectories =
            simulate_population(params, cfg, spec.population, spec.workers);
        slice.micro[ti * betas.size() + bi] = micro_shift(trajectories);
        slice.macro[ti * betas.size() + bi] = macro_shift(trajectories);
      }
    }
    grid.slices.push_back(std::move(slice));
  }
  return grid;
}

std::vector<GridRow> grid_rows(const AlphaSlice& slice, SweepMetric metric,
                               bool normalized) {
  const double max = slice.max_value(metric);
  const double scale = (normalized && max > 0.0) ? max : 1.0;
  std::vector<GridRow> rows;
  rows.reserve(slice.micro.size());
  for (std::size_t ti = 0; ti < slice.t_values.size(); ++ti) {
    for (std::size_t bi = 0; bi < slice.betas.size(); ++bi) {
      rows.push_back({static_cast<double>(slice.t_values[ti]), slice.betas[bi],
                      slice.cell(metric, ti, bi) / scale});
    }
  }
  return rows;
}

IsolineReport isoline_check(const SweepGrid& grid, double c, double tol_rel,
                            double bucket) {
  const AlphaSlice* slice = nullptr;
  for (const auto& s : grid.slices) {
    if (s.alpha == 0.0) {
      slice = &s;
      break;
    }
  }
  if (slice == nullptr)
    throw std::invalid_argument("isoline check: grid has no alpha=0 slice");

  IsolineReport report;
  report.c = c;
  report.bucket = bucket;
  report.tol_rel = tol_rel;
  for (std::size_t ti = 0; ti < slice->t_values.size(); ++ti) {
    for (std::size_t bi = 0; bi < slice->betas.size(); ++bi) {
      const int t = slice->t_values[ti];
      const double beta = slice->betas[bi];
      const double key = std::pow(beta, t - 1);
      if (std::abs(key - c) <= bucket) {
        report.members.push_back({beta, t, key, slice->cell(SweepMetric::Micro, ti, bi),
                                  slice->cell(SweepMetric::Macro, ti, bi)});
      }
    }
  }
  if (report.members.empty()) {
    char msg[96];
    std::snprintf(msg, sizeof(msg), "empty isoline: no cells with |beta^(T-1) - %g| <= %g",
                  c, bucket);
    throw std::runtime_error(msg);
  }

  auto rel_spread = [&](auto pick) {
    double lo = report.members.front().micro, hi = lo, sum = 0.0;
    lo = hi = pick(report.members.front());
    for (const auto& m : report.members) {
      const double v = pick(m);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    const double mean = sum / static_cast<double>(report.members.size());
    return mean > 0.0 ? (hi - lo) / mean : 0.0;
  };
  report.micro_rel_spread = rel_spread([](const IsolineMember& m) { return m.micro; });
  report.macro_rel_spread = rel_spread([](const IsolineMember& m) { return m.macro; });
  report.micro_ok = report.micro_rel_spread <= tol_rel;
  report.macro_ok = report.macro_rel_spread <= tol_rel;
  return report;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};

std::unique_ptr<std::FILE, FileCloser> open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.string().c_str(), "wb"));
  if (f == nullptr)
    throw std::runtime_error("unwritable path: " + path.string());
  return f;
}

}  // namespace

void emit_grid_csv(const std::vector<GridRow>& rows, const std::filesystem::path& path) {
  auto f = open_for_write(path);
  for (const auto& r : rows)
    std::fprintf(f.get(), "%.6f,%.6f,%.6f\n", r.x, r.y, r.value);
}

void emit_trajectory_csv(const std::vector<UserTrajectory>& trajectories,
                         const std::filesystem::path& path) {
  auto f = open_for_write(path);
  for (const auto& t : trajectories)
    std::fprintf(f.get(), "%.6f,%.6f\n", t.x0, t.x_final);
}

}  // namespace oploop
