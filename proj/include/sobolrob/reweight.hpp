#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sobolrob/frechet.hpp"
#include "sobolrob/parallel.hpp"
#include "sobolrob/partition.hpp"
#include "sobolrob/sobol.hpp"
#include "sobolrob/summation.hpp"

namespace sobolrob {

// Nominal estimation results carried through the robustness stage.
struct Nominal {
  IndexVector T;
  IndexVector N;
  std::vector<double> std_T;
};

// The optimally perturbed PDF (phi + delta * sum_i a_i psi_i) / N with
// N = 1 + delta * sum_i a_i vhat_i. Feasibility |delta a_i| <= b_i <= inf phi
// keeps the numerator nonnegative pointwise.
struct PerturbedDensitySpec {
  const ProductDensity* base = nullptr;
  const Partition* part = nullptr;
  PerturbationDirection direction;
  double delta = 0.0;
  double normalizer = 1.0;
};

inline PerturbedDensitySpec make_perturbed_spec(const ProductDensity& density,
                                                const Partition& part,
                                                PerturbationDirection direction, double delta) {
  if (!(delta >= -1.0 && delta <= 1.0))
    throw std::invalid_argument("make_perturbed_spec: delta must lie in [-1, 1]");
  if (direction.a.size() != static_cast<std::size_t>(part.size()))
    throw std::invalid_argument("make_perturbed_spec: direction size mismatch");
  if (part.volumes.size() != static_cast<std::size_t>(part.size()))
    throw std::invalid_argument("make_perturbed_spec: partition volumes are not computed");
  PerturbedDensitySpec spec;
  spec.base = &density;
  spec.part = &part;
  spec.direction = std::move(direction);
  spec.delta = delta;
  spec.normalizer = 1.0 + delta * pairwise_sum_index(0, spec.direction.a.size(), [&](std::size_t i) {
                      return spec.direction.a[i] * part.volumes[i];
                    });
  if (!(spec.normalizer > 0.0))
    throw std::runtime_error("make_perturbed_spec: perturbed density normalizer is not positive");
  return spec;
}

inline double perturbed_pdf_value(const PerturbedDensitySpec& spec, std::span<const double> x,
                                  std::int32_t box_index) {
  const double phi = spec.base->pdf(x);
  const double v = phi + spec.delta * spec.direction.a[static_cast<std::size_t>(box_index)];
  return std::max(v, 0.0) / spec.normalizer;
}

// Integral of the perturbation over coordinate k at each X0 row:
// sum over boxes in the axis line through the row of a_i * len_k(R_i).
inline Mat direction_line_sums(const SampleSet& s, const Partition& part,
                               std::span<const double> a) {
  Mat sums(static_cast<std::size_t>(s.p), s.n, 0.0);
  for (std::size_t j = 0; j < s.n; ++j) {
    const auto row = s.X0.row(j);
    for (int k = 0; k < s.p; ++k) {
      double acc = 0.0;
      part.for_each_line_box(row, k, [&](std::int32_t i) {
        acc += a[static_cast<std::size_t>(i)] *
               part.boxes[static_cast<std::size_t>(i)].intervals[static_cast<std::size_t>(k)].length();
      });
      sums(static_cast<std::size_t>(k), j) = acc;
    }
  }
  return sums;
}

// Importance weights against the nominal sampling law. The pair weight is the
// likelihood ratio of the pick-freeze pair density phi(x) phi(x')/phi_{~k},
// grouped as a product of three ratios that each collapse to exactly 1.0 at
// delta = 0 so the unperturbed path is bit-identical to the nominal one.
inline WeightSet make_weights(const SampleSet& s, const PairContext& ctx, const Mat& line_sums,
                              const PerturbedDensitySpec& spec) {
  const double delta = spec.delta;
  const double norm = spec.normalizer;
  const std::span<const double> a(spec.direction.a);

  WeightSet w;
  w.den.resize(s.n);
  w.pair = Mat(static_cast<std::size_t>(s.p), s.n);
  for (std::size_t j = 0; j < s.n; ++j) {
    const double v = std::max(s.Phi0[j] + delta * a[static_cast<std::size_t>(ctx.box0[j])], 0.0);
    w.den[j] = (v / norm) / s.Phi0[j];
  }
  for (int k = 0; k < s.p; ++k) {
    const auto& phik = s.PhiK[static_cast<std::size_t>(k)];
    const auto& bk = ctx.boxk[static_cast<std::size_t>(k)];
    for (std::size_t j = 0; j < s.n; ++j) {
      const double vk = std::max(phik[j] + delta * a[static_cast<std::size_t>(bk[j])], 0.0);
      const double ratio_resampled = (vk / norm) / phik[j];
      const double phic = ctx.phic(static_cast<std::size_t>(k), j);
      const double phic_pert =
          std::max(phic + delta * line_sums(static_cast<std::size_t>(k), j), 0.0) / norm;
      double pair_weight;
      if (phic_pert == 0.0) {
        // The slice integral vanishes only where the perturbed density itself
        // vanishes; a zero numerator makes the pair weight zero, anything
        // else is a genuine failure.
        if (w.den[j] == 0.0 || ratio_resampled == 0.0)
          pair_weight = 0.0;
        else
          throw std::runtime_error(
              "make_weights: perturbed complement density vanished at row " + std::to_string(j) +
              " for variable " + std::to_string(k + 1));
      } else {
        pair_weight = w.den[j] * ratio_resampled * (phic / phic_pert);
      }
      w.pair(static_cast<std::size_t>(k), j) = pair_weight;
    }
  }
  return w;
}

inline IndexVector perturbed_total_indices(const SampleSet& s, const PairContext& ctx,
                                           const Mat& line_sums,
                                           const PerturbedDensitySpec& spec) {
  const WeightSet w = make_weights(s, ctx, line_sums, spec);
  return weighted_total_indices(s, all_rows(s.n), &w);
}

// Contract-level entry point; builds the shared context on the fly.
inline IndexVector perturbed_total_indices(const SampleSet& s, const Partition& part,
                                           const ProductDensity& density,
                                           const PerturbedDensitySpec& spec) {
  const PairContext ctx = make_pair_context(s, part, density);
  const Mat line_sums = direction_line_sums(s, part, spec.direction.a);
  return perturbed_total_indices(s, ctx, line_sums, spec);
}

// Worst-case ratio of perturbed to nominal relative subsample deviations,
// t = max_j (sigma~_j / T~_j) / (sigma_j / T_j), over components whose nominal
// index is resolved (T_j >= 10 sigma_j) and whose perturbed index is nonzero.
// Replicate row subsets are the nominal ones (same seed), so t = 1 exactly at
// delta = 0. With no resolved component there is no convergence information
// and t is reported as 1.
inline double convergence_ratio_weighted(const SampleSet& s, const WeightSet& w,
                                         const IndexVector& perturbed_t, const Nominal& nominal,
                                         int reps, std::uint64_t seed,
                                         int* excluded_count = nullptr) {
  const auto sets = subsample_row_sets(s.n, reps, seed);
  std::vector<IndexVector> estimates(sets.size());
  for (std::size_t r = 0; r < sets.size(); ++r)
    estimates[r] = weighted_total_indices(s, sets[r], &w);

  const std::size_t p = static_cast<std::size_t>(s.p);
  double t = -std::numeric_limits<double>::infinity();
  int excluded = 0;
  for (std::size_t k = 0; k < p; ++k) {
    const double mean = pairwise_sum_index(0, estimates.size(), [&](std::size_t r) {
                          return estimates[r][k];
                        }) / static_cast<double>(estimates.size());
    const double ss = pairwise_sum_index(0, estimates.size(), [&](std::size_t r) {
      const double d = estimates[r][k] - mean;
      return d * d;
    });
    const double sigma_pert = std::sqrt(ss / static_cast<double>(estimates.size() - 1));
    const bool resolved = nominal.T[k] > 0.0 && nominal.std_T[k] > 0.0 &&
                          nominal.T[k] >= 10.0 * nominal.std_T[k];
    if (!resolved || perturbed_t[k] == 0.0) {
      ++excluded;
      continue;
    }
    const double ratio = (sigma_pert / perturbed_t[k]) / (nominal.std_T[k] / nominal.T[k]);
    t = std::max(t, ratio);
  }
  if (excluded_count != nullptr) *excluded_count = excluded;
  return std::isinf(t) ? 1.0 : t;
}

inline double convergence_ratio(const SampleSet& s, const Partition& part,
                                const ProductDensity& density, const PerturbedDensitySpec& spec,
                                const Nominal& nominal, int reps = 50, std::uint64_t seed = 0) {
  const PairContext ctx = make_pair_context(s, part, density);
  const Mat line_sums = direction_line_sums(s, part, spec.direction.a);
  const WeightSet w = make_weights(s, ctx, line_sums, spec);
  const IndexVector perturbed_t = weighted_total_indices(s, all_rows(s.n), &w);
  return convergence_ratio_weighted(s, w, perturbed_t, nominal, reps, seed);
}

// One point of the delta scan.
struct PerturbationCandidate {
  Target target;
  double delta = 0.0;
  double t = 1.0;
  bool admissible = true;
  IndexVector T;
  IndexVector N;
  double abs_change = 0.0;
  double rel_change = 0.0;
  bool degenerate = false;  // the null perturbation was the best admissible one
};

namespace detail {

inline PerturbationCandidate evaluate_candidate(const SampleSet& s, const Partition& part,
                                                const ProductDensity& density,
                                                const PairContext& ctx, const Mat& line_sums,
                                                const PerturbationDirection& dir, double delta,
                                                double tau, const Nominal& nominal, int reps,
                                                std::uint64_t seed) {
  PerturbationCandidate cand;
  cand.target = dir.target;
  cand.delta = delta;
  try {
    const PerturbedDensitySpec spec = make_perturbed_spec(density, part, dir, delta);
    const WeightSet w = make_weights(s, ctx, line_sums, spec);
    cand.T = weighted_total_indices(s, all_rows(s.n), &w);
    cand.N = normalized_indices(cand.T);
    cand.t = convergence_ratio_weighted(s, w, cand.T, nominal, reps, seed);
    cand.admissible = cand.t <= tau;
    for (std::size_t k = 0; k < cand.T.size(); ++k) {
      cand.abs_change += std::abs(nominal.T[k] - cand.T[k]);
      cand.rel_change += std::abs(nominal.N[k] - cand.N[k]);
    }
  } catch (const std::exception&) {
    // Infeasible or numerically degenerate grid point: keep it in the scan
    // output, inadmissible, carrying the nominal values.
    cand.T = nominal.T;
    cand.N = nominal.N;
    cand.t = std::numeric_limits<double>::infinity();
    cand.admissible = false;
    cand.abs_change = 0.0;
    cand.rel_change = 0.0;
  }
  return cand;
}

}  // namespace detail

// Evaluate the full delta grid delta_l = -1 + 2 l / r, l = 0..r, for one
// perturbation direction. Embarrassingly parallel over grid cells.
inline std::vector<PerturbationCandidate> scan_direction(
    const SampleSet& s, const Partition& part, const ProductDensity& density,
    const PairContext& ctx, const PerturbationDirection& dir, int r, double tau,
    const Nominal& nominal, int reps, std::uint64_t seed, int threads = 1) {
  if (r < 2) throw std::invalid_argument("scan_direction: r must be >= 2");
  const Mat line_sums = direction_line_sums(s, part, dir.a);
  std::vector<PerturbationCandidate> grid(static_cast<std::size_t>(r) + 1);
  parallel_for(grid.size(), threads, [&](std::size_t l) {
    const double delta = 2.0 * static_cast<double>(l) / static_cast<double>(r) - 1.0;
    grid[l] = detail::evaluate_candidate(s, part, density, ctx, line_sums, dir, delta, tau,
                                         nominal, reps, seed);
  });
  return grid;
}

// The direction's best admissible candidate: the admissible grid point with
// the largest change in the metric matching the direction's target, ties
// broken toward smaller |delta|. Null when nothing on the grid is admissible.
inline const PerturbationCandidate* pick_best_candidate(
    std::span<const PerturbationCandidate> grid, const Target& target) {
  const bool absolute = target.kind == Target::Kind::TotalIndex;
  const PerturbationCandidate* best = nullptr;
  for (const auto& cand : grid) {
    if (!cand.admissible) continue;
    const double metric = absolute ? cand.abs_change : cand.rel_change;
    if (best == nullptr) {
      best = &cand;
      continue;
    }
    const double best_metric = absolute ? best->abs_change : best->rel_change;
    if (metric > best_metric ||
        (metric == best_metric && std::abs(cand.delta) < std::abs(best->delta)))
      best = &cand;
  }
  return best;
}

// Falls back to the (always admissible) null perturbation, flagged
// degenerate, when nothing else on the grid is admissible; with an odd r the
// grid misses delta = 0 exactly and the null candidate is evaluated directly.
inline PerturbationCandidate delta_scan(const SampleSet& s, const Partition& part,
                                        const ProductDensity& density, const PairContext& ctx,
                                        const PerturbationDirection& dir, int r, double tau,
                                        const Nominal& nominal, int reps, std::uint64_t seed,
                                        int threads = 1) {
  const auto grid = scan_direction(s, part, density, ctx, dir, r, tau, nominal, reps, seed, threads);
  if (const auto* best = pick_best_candidate(grid, dir.target)) {
    PerturbationCandidate out = *best;
    out.degenerate = out.delta == 0.0;
    return out;
  }
  const Mat line_sums = direction_line_sums(s, part, dir.a);
  PerturbationCandidate null_cand = detail::evaluate_candidate(s, part, density, ctx, line_sums,
                                                               dir, 0.0, tau, nominal, reps, seed);
  null_cand.degenerate = true;
  return null_cand;
}

// Indices of the admissible candidates with the largest absolute and relative
// change. Ties break toward smaller |delta|, then earlier list position.
inline std::pair<int, int> select_extremes(std::span<const PerturbationCandidate> candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_extremes: empty candidate list");
  auto pick = [&](auto metric) {
    int best = -1;
    for (int c = 0; c < static_cast<int>(candidates.size()); ++c) {
      if (!candidates[static_cast<std::size_t>(c)].admissible) continue;
      if (best < 0) {
        best = c;
        continue;
      }
      const auto& cur = candidates[static_cast<std::size_t>(c)];
      const auto& top = candidates[static_cast<std::size_t>(best)];
      if (metric(cur) > metric(top) ||
          (metric(cur) == metric(top) && std::abs(cur.delta) < std::abs(top.delta)))
        best = c;
    }
    if (best < 0) best = 0;  // nothing admissible: fall back to the first entry
    return best;
  };
  return {pick([](const PerturbationCandidate& c) { return c.abs_change; }),
          pick([](const PerturbationCandidate& c) { return c.rel_change; })};
}

// Full robustness output: nominal indices, one best candidate per target,
// and the two extreme perturbations.
struct RobustnessReport {
  Nominal nominal;
  std::vector<PerturbationCandidate> candidates;  // order T1, N1, T2, N2, ...
  std::vector<double> direction_norms;            // matching candidate order
  int extreme_abs = -1;
  int extreme_rel = -1;
};

}  // namespace sobolrob
