#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sobolrob/densities.hpp"
#include "sobolrob/parallel.hpp"
#include "sobolrob/summation.hpp"
#include "sobolrob/types.hpp"

namespace sobolrob {

using Model = std::function<double(std::span<const double>)>;

// The single reusable dataset for everything downstream: pick-freeze matrices,
// model values and density values. No further model evaluations happen after
// construction.
struct SampleSet {
  Mat X0;
  std::vector<Mat> Xk;                     // Xk[k] equals X0 except column k
  std::vector<double> F0;                  // f over X0 rows
  std::vector<std::vector<double>> Fk;     // f over Xk rows
  std::vector<double> Phi0;                // phi over X0 rows
  std::vector<std::vector<double>> PhiK;   // phi over Xk rows
  std::size_t n = 0;
  int p = 0;
};

inline SampleSet build_sample_set(const ProductDensity& density, const Model& model,
                                  std::size_t n, std::uint64_t seed, int threads = 1) {
  if (n < 2) throw std::invalid_argument("build_sample_set: n must be >= 2");
  SampleSet s;
  s.n = n;
  s.p = density.dimension();
  s.X0 = density.sample(n, seed, threads);
  s.Xk.reserve(static_cast<std::size_t>(s.p));
  for (int k = 0; k < s.p; ++k) s.Xk.push_back(density.pick_freeze(s.X0, k, seed));

  auto evaluate = [&](const Mat& x, std::vector<double>& out, int matrix_id) {
    out.resize(n);
    parallel_for(n, threads, [&](std::size_t i) {
      const double v = model(x.row(i));
      if (!std::isfinite(v))
        throw std::runtime_error("build_sample_set: model returned a non-finite value at matrix X" +
                                 std::to_string(matrix_id) + " row " + std::to_string(i));
      out[i] = v;
    });
  };
  evaluate(s.X0, s.F0, 0);
  s.Fk.resize(static_cast<std::size_t>(s.p));
  for (int k = 0; k < s.p; ++k) evaluate(s.Xk[static_cast<std::size_t>(k)], s.Fk[static_cast<std::size_t>(k)], k + 1);

  auto densities_of = [&](const Mat& x, std::vector<double>& out, int matrix_id) {
    out.resize(n);
    parallel_for(n, threads, [&](std::size_t i) {
      const double v = density.pdf(x.row(i));
      if (!(v > 0.0))
        throw std::runtime_error("build_sample_set: zero density at matrix X" +
                                 std::to_string(matrix_id) + " row " + std::to_string(i));
      out[i] = v;
    });
  };
  densities_of(s.X0, s.Phi0, 0);
  s.PhiK.resize(static_cast<std::size_t>(s.p));
  for (int k = 0; k < s.p; ++k)
    densities_of(s.Xk[static_cast<std::size_t>(k)], s.PhiK[static_cast<std::size_t>(k)], k + 1);
  return s;
}

inline std::vector<std::int32_t> all_rows(std::size_t n) {
  std::vector<std::int32_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

// Per-candidate importance weights for the reweighted estimator. `den` weights
// the denominator (variance) terms; `pair` has one row of numerator pair
// weights per variable.
struct WeightSet {
  std::vector<double> den;  // n
  Mat pair;                 // p x n
};

// Pick-freeze estimator over a row subset, optionally importance-weighted and
// always self-normalized. Numerator and denominator are separate Monte Carlo
// means; the variance uses the plug-in (1/n) form throughout. Weight spans
// containing exact 1.0 reproduce the unweighted arithmetic bit for bit, which
// is what makes the delta = 0 reweighting path coincide with the nominal
// estimator exactly.
inline IndexVector weighted_total_indices(const SampleSet& s, std::span<const std::int32_t> rows,
                                          const WeightSet* weights) {
  const std::size_t m = rows.size();
  if (m < 2) throw std::invalid_argument("total_indices: need at least 2 rows");
  const double* f0 = s.F0.data();

  double sum_w, mean1, mean2;
  if (weights == nullptr) {
    sum_w = static_cast<double>(m);
    mean1 = pairwise_sum_index(0, m, [&](std::size_t i) { return f0[rows[i]]; }) / sum_w;
    mean2 = pairwise_sum_index(0, m, [&](std::size_t i) {
              const double v = f0[rows[i]];
              return v * v;
            }) / sum_w;
  } else {
    const double* w = weights->den.data();
    sum_w = pairwise_sum_index(0, m, [&](std::size_t i) { return w[rows[i]]; });
    if (!(sum_w > 0.0)) throw std::runtime_error("total_indices: weight sum is not positive");
    mean1 = pairwise_sum_index(0, m, [&](std::size_t i) {
              return w[rows[i]] * f0[rows[i]];
            }) / sum_w;
    mean2 = pairwise_sum_index(0, m, [&](std::size_t i) {
              return (w[rows[i]] * f0[rows[i]]) * f0[rows[i]];
            }) / sum_w;
  }
  const double variance = mean2 - mean1 * mean1;
  if (!(variance > 1e-14 * std::max(1.0, mean2)))
    throw std::runtime_error("total_indices: constant model (sample variance is zero)");

  IndexVector t(static_cast<std::size_t>(s.p), 0.0);
  for (int k = 0; k < s.p; ++k) {
    const double* fk = s.Fk[static_cast<std::size_t>(k)].data();
    double numerator;
    if (weights == nullptr) {
      numerator = 0.5 * pairwise_sum_index(0, m, [&](std::size_t i) {
                    const double d = f0[rows[i]] - fk[rows[i]];
                    return d * d;
                  }) / static_cast<double>(m);
    } else {
      const double* wk = weights->pair.row(static_cast<std::size_t>(k)).data();
      const double sum_wk = pairwise_sum_index(0, m, [&](std::size_t i) { return wk[rows[i]]; });
      if (!(sum_wk > 0.0))
        throw std::runtime_error("total_indices: pair weight sum is not positive for variable " +
                                 std::to_string(k + 1));
      numerator = 0.5 * pairwise_sum_index(0, m, [&](std::size_t i) {
                    const double d = f0[rows[i]] - fk[rows[i]];
                    return (wk[rows[i]] * d) * d;
                  }) / sum_wk;
    }
    t[static_cast<std::size_t>(k)] = numerator / variance;
  }
  return t;
}

inline IndexVector total_indices_rows(const SampleSet& s, std::span<const std::int32_t> rows) {
  return weighted_total_indices(s, rows, nullptr);
}

// Nominal total Sobol' indices. Under independent inputs these live in [0,1]
// up to Monte Carlo noise; estimates outside [-0.05, 1.05] signal a broken
// setup rather than noise and are rejected. Values are never clamped here.
inline IndexVector total_indices(const SampleSet& s) {
  IndexVector t = total_indices_rows(s, all_rows(s.n));
  for (std::size_t k = 0; k < t.size(); ++k)
    if (!(t[k] >= -0.05 && t[k] <= 1.05))
      throw std::runtime_error("total_indices: estimate for variable " + std::to_string(k + 1) +
                               " is outside [-0.05, 1.05]; increase the sample size");
  return t;
}

inline IndexVector normalized_indices(const IndexVector& t) {
  const double total = pairwise_sum(t);
  if (!(total > 0.0))
    throw std::runtime_error("normalized_indices: total indices sum to zero");
  IndexVector out(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = t[k] / total;
  return out;
}

// Half-sample row subsets for subsample standard deviations. The same subset
// is applied to X0 and every Xk so the pick-freeze pairing stays intact.
inline std::vector<std::vector<std::int32_t>> subsample_row_sets(std::size_t n, int reps,
                                                                 std::uint64_t seed) {
  if (reps < 2) throw std::invalid_argument("subsample_row_sets: need at least 2 replicates");
  const std::size_t m = n / 2;
  std::vector<std::vector<std::int32_t>> sets(static_cast<std::size_t>(reps));
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<std::int32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < m; ++i) {
      const double u = rng::uniform01(seed, rng::kStreamSubsample + static_cast<std::uint64_t>(rep), i);
      const std::size_t j = i + static_cast<std::size_t>(u * static_cast<double>(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    std::sort(idx.begin(), idx.end());
    sets[static_cast<std::size_t>(rep)] = std::move(idx);
  }
  return sets;
}

using RowEstimator = std::function<IndexVector(const SampleSet&, std::span<const std::int32_t>)>;

// Standard deviation, across `reps` half-sample replicates, of each component
// of the estimator. Deterministic given the seed; replicate subsets depend
// only on (n, reps, seed) so nominal and perturbed runs can be paired.
inline std::vector<double> subsample_std(const SampleSet& s, const RowEstimator& estimator,
                                         int reps = 50, std::uint64_t seed = 0) {
  if (s.n < 4) throw std::invalid_argument("subsample_std: need at least 4 samples");
  const auto sets = subsample_row_sets(s.n, reps, seed);
  std::vector<IndexVector> estimates(sets.size());
  for (std::size_t r = 0; r < sets.size(); ++r) estimates[r] = estimator(s, sets[r]);

  const std::size_t p = estimates.front().size();
  std::vector<double> sd(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    const double mean = pairwise_sum_index(0, estimates.size(), [&](std::size_t r) {
                          return estimates[r][k];
                        }) / static_cast<double>(estimates.size());
    const double ss = pairwise_sum_index(0, estimates.size(), [&](std::size_t r) {
      const double d = estimates[r][k] - mean;
      return d * d;
    });
    sd[k] = std::sqrt(ss / static_cast<double>(estimates.size() - 1));
  }
  return sd;
}

}  // namespace sobolrob
