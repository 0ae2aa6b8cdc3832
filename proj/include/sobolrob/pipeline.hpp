#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sobolrob/densities.hpp"
#include "sobolrob/frechet.hpp"
#include "sobolrob/models.hpp"
#include "sobolrob/partition.hpp"
#include "sobolrob/reweight.hpp"
#include "sobolrob/sobol.hpp"

namespace sobolrob {

struct QuantileRefineSpec {
  int dim = 0;  // 0-based
  int q = 4;
};

// Everything one run needs. Defaults follow the recommended settings
// min_leaf = 50, delta_grid = 60, tau = 1.5.
struct RunConfig {
  std::string model_name;
  std::vector<Marginal> marginals;
  std::size_t n = 0;
  int min_leaf = 50;
  int delta_grid = 60;
  double tau = 1.5;
  std::uint64_t seed = 0;
  std::vector<int> allowed_dims;  // empty means all (0-based)
  std::optional<QuantileRefineSpec> quantile_refine;
  std::string output_dir = ".";
  int threads = 1;
  int subsample_reps = 50;
};

inline const models::ModelInfo& validate_config(const RunConfig& cfg) {
  const auto* info = models::find_model(cfg.model_name);
  if (info == nullptr)
    throw std::invalid_argument("config.model: unknown model '" + cfg.model_name + "'");
  if (cfg.marginals.size() != static_cast<std::size_t>(info->dimension))
    throw std::invalid_argument("config.marginals: expected " + std::to_string(info->dimension) +
                                " entries for model '" + cfg.model_name + "', got " +
                                std::to_string(cfg.marginals.size()));
  if (cfg.min_leaf < 1) throw std::invalid_argument("config.L: must be >= 1");
  if (cfg.n < 2 * static_cast<std::size_t>(cfg.min_leaf))
    throw std::invalid_argument("config.n: must be >= 2 * L");
  if (cfg.delta_grid < 2) throw std::invalid_argument("config.r: must be >= 2");
  if (!(cfg.tau > 1.0)) throw std::invalid_argument("config.tau: must be > 1");
  if (cfg.subsample_reps < 2) throw std::invalid_argument("config.subsample_reps: must be >= 2");
  if (cfg.threads < 1) throw std::invalid_argument("config.threads: must be >= 1");
  for (const int d : cfg.allowed_dims)
    if (d < 0 || d >= info->dimension)
      throw std::invalid_argument("config.allowed_dims: index out of range");
  if (cfg.quantile_refine) {
    if (cfg.quantile_refine->dim < 0 || cfg.quantile_refine->dim >= info->dimension)
      throw std::invalid_argument("config.quantile_refine.dim: index out of range");
    if (cfg.quantile_refine->q < 2)
      throw std::invalid_argument("config.quantile_refine.q: must be >= 2");
  }
  return *info;
}

struct PipelineResult {
  RobustnessReport report;
  Partition partition;
  DerivativeTable table;
  long long model_evaluations = 0;
};

namespace detail {

template <class F>
auto stage(const char* name, F&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("stage '") + name + "': " + e.what());
  }
}

struct SampledStages {
  ProductDensity density;
  SampleSet samples;
  Nominal nominal;
  long long model_evaluations = 0;
};

inline SampledStages run_sampling_stages(const RunConfig& cfg) {
  const auto& info = validate_config(cfg);
  ProductDensity density = stage("config", [&] { return ProductDensity(cfg.marginals); });

  auto counter = std::make_shared<std::atomic<long long>>(0);
  Model counted = [fn = info.fn, counter](std::span<const double> x) {
    counter->fetch_add(1, std::memory_order_relaxed);
    return fn(x);
  };
  SampleSet samples = stage("sample", [&] {
    return build_sample_set(density, counted, cfg.n, cfg.seed, cfg.threads);
  });
  const long long evals = counter->load();
  const long long expected = static_cast<long long>(cfg.n) * (density.dimension() + 1);
  if (evals != expected)
    throw std::runtime_error("stage 'sample': model evaluation count " + std::to_string(evals) +
                             " differs from n*(p+1) = " + std::to_string(expected));

  Nominal nominal;
  stage("nominal", [&] {
    nominal.T = total_indices(samples);
    nominal.N = normalized_indices(nominal.T);
    nominal.std_T = subsample_std(samples, &total_indices_rows, cfg.subsample_reps, cfg.seed);
    return 0;
  });
  return SampledStages{std::move(density), std::move(samples), std::move(nominal), evals};
}

inline Partition run_partition_stages(const RunConfig& cfg, const SampledStages& st) {
  Partition part = stage("partition", [&] {
    std::vector<int> dims = cfg.allowed_dims.empty() ? all_dims(st.density.dimension())
                                                     : cfg.allowed_dims;
    Partition tree = fit_tree(st.samples.X0, st.samples.F0, cfg.min_leaf, dims,
                              st.density.support());
    if (cfg.quantile_refine)
      tree = refine_by_quantiles(tree, st.samples.X0, cfg.quantile_refine->dim,
                                 cfg.quantile_refine->q);
    return tree;
  });
  stage("floors-volumes", [&] {
    part.floors = compute_floors(part, st.density);
    part.volumes = estimate_volumes(part, st.samples.X0, st.samples.Phi0);
    return 0;
  });
  return part;
}

// Floors with perturbation disabled on empty boxes: without samples there is
// no data to reweight, so a_i is forced to zero by zeroing the bound.
inline std::vector<double> effective_floors(const Partition& part) {
  std::vector<double> floors = part.floors;
  for (std::size_t i = 0; i < floors.size(); ++i)
    if (part.counts[i] == 0) floors[i] = 0.0;
  return floors;
}

}  // namespace detail

// End-to-end run: sample, estimate, partition, differentiate, scan, select.
inline PipelineResult run_pipeline(const RunConfig& cfg) {
  detail::SampledStages st = detail::run_sampling_stages(cfg);
  PipelineResult result;
  result.model_evaluations = st.model_evaluations;
  result.partition = detail::run_partition_stages(cfg, st);
  const Partition& part = result.partition;

  const PairContext ctx = detail::stage("derivative", [&] {
    return make_pair_context(st.samples, part, st.density);
  });
  result.table = detail::stage("derivative", [&] {
    return derivative_table(st.samples, part, ctx);
  });

  const std::vector<double> floors = detail::effective_floors(part);
  std::vector<PerturbationDirection> directions;
  detail::stage("directions", [&] {
    directions.reserve(2 * static_cast<std::size_t>(st.samples.p));
    for (int k = 0; k < st.samples.p; ++k) {
      directions.push_back(optimal_direction(result.table.dT.row(static_cast<std::size_t>(k)),
                                             floors, {Target::Kind::TotalIndex, k}));
      directions.push_back(optimal_direction(result.table.dN.row(static_cast<std::size_t>(k)),
                                             floors, {Target::Kind::NormalizedIndex, k}));
    }
    return 0;
  });

  result.report.nominal = st.nominal;
  result.report.candidates.resize(directions.size());
  result.report.direction_norms.resize(directions.size());
  detail::stage("scan", [&] {
    parallel_for(directions.size(), cfg.threads, [&](std::size_t d) {
      result.report.direction_norms[d] = directions[d].norm_value;
      result.report.candidates[d] =
          delta_scan(st.samples, part, st.density, ctx, directions[d], cfg.delta_grid, cfg.tau,
                     st.nominal, cfg.subsample_reps, cfg.seed, 1);
    });
    return 0;
  });
  detail::stage("extremes", [&] {
    const auto [abs_idx, rel_idx] = select_extremes(result.report.candidates);
    result.report.extreme_abs = abs_idx;
    result.report.extreme_rel = rel_idx;
    return 0;
  });
  return result;
}

// Partition diagnostics: run only through the partition stage.
struct PartitionStageResult {
  Partition partition;
  long long model_evaluations = 0;
};

inline PartitionStageResult run_partition_stage(const RunConfig& cfg) {
  detail::SampledStages st = detail::run_sampling_stages(cfg);
  PartitionStageResult out;
  out.model_evaluations = st.model_evaluations;
  out.partition = detail::run_partition_stages(cfg, st);
  return out;
}

// Single-direction diagnostics: the full delta grid for one target.
struct DeltaScanResult {
  Nominal nominal;
  DerivativeTable table;
  PerturbationDirection direction;
  std::vector<PerturbationCandidate> grid;
};

inline DeltaScanResult run_delta_scan(const RunConfig& cfg, Target target) {
  detail::SampledStages st = detail::run_sampling_stages(cfg);
  Partition part = detail::run_partition_stages(cfg, st);
  const PairContext ctx = make_pair_context(st.samples, part, st.density);
  DeltaScanResult out;
  out.nominal = st.nominal;
  out.table = derivative_table(st.samples, part, ctx);
  if (target.k < 0 || target.k >= st.samples.p)
    throw std::invalid_argument("delta-scan: target index out of range");
  const std::vector<double> floors = detail::effective_floors(part);
  const auto row = target.kind == Target::Kind::TotalIndex
                       ? out.table.dT.row(static_cast<std::size_t>(target.k))
                       : out.table.dN.row(static_cast<std::size_t>(target.k));
  out.direction = optimal_direction(row, floors, target);
  out.grid = scan_direction(st.samples, part, st.density, ctx, out.direction, cfg.delta_grid,
                            cfg.tau, st.nominal, cfg.subsample_reps, cfg.seed, cfg.threads);
  return out;
}

}  // namespace sobolrob
