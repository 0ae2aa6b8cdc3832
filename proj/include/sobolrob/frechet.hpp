#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sobolrob/partition.hpp"
#include "sobolrob/sobol.hpp"
#include "sobolrob/summation.hpp"
#include "sobolrob/types.hpp"

namespace sobolrob {

// Quantities shared by the derivative estimator and the reweighting path:
// box membership of every X0 and Xk row plus the complement marginal
// phi_{~k}(x_{~k}) at each X0 row.
struct PairContext {
  std::vector<std::int32_t> box0;               // n
  std::vector<std::vector<std::int32_t>> boxk;  // p x n
  Mat phic;                                     // p x n
};

inline PairContext make_pair_context(const SampleSet& s, const Partition& part,
                                     const ProductDensity& density) {
  if (part.assignment.size() != s.n)
    throw std::invalid_argument("make_pair_context: partition and sample set disagree on n");
  PairContext ctx;
  ctx.box0 = part.assignment;
  ctx.boxk.resize(static_cast<std::size_t>(s.p));
  ctx.phic = Mat(static_cast<std::size_t>(s.p), s.n);
  for (int k = 0; k < s.p; ++k) {
    auto& bk = ctx.boxk[static_cast<std::size_t>(k)];
    bk.resize(s.n);
    const Mat& xk = s.Xk[static_cast<std::size_t>(k)];
    for (std::size_t j = 0; j < s.n; ++j) {
      bk[j] = part.locate(xk.row(j));
      ctx.phic(static_cast<std::size_t>(k), j) = density.complement_excluding(s.X0.row(j), k);
    }
  }
  return ctx;
}

// d_hat T_k along each indicator basis direction, plus the normalized-index
// analogue. Estimated from the stored pick-freeze pairs: no new model
// evaluations.
struct DerivativeTable {
  Mat dT;             // p x M
  Mat dN;             // p x M
  double G_hat = 0.0;
  IndexVector T_hat;
};

// Quotient rule applied to T_k / sum_i T_i; columns of the result sum to zero
// because the normalized indices sum to one identically.
inline Mat normalized_derivative_table(const DerivativeTable& table) {
  const std::size_t p = table.dT.rows, m = table.dT.cols;
  const double total = pairwise_sum(table.T_hat);
  if (!(total > 0.0))
    throw std::runtime_error("normalized_derivative_table: total indices sum to zero");
  Mat dn(p, m);
  for (std::size_t i = 0; i < m; ++i) {
    double col = 0.0;
    for (std::size_t k = 0; k < p; ++k) col += table.dT(k, i);
    for (std::size_t k = 0; k < p; ++k)
      dn(k, i) = (total * table.dT(k, i) - table.T_hat[k] * col) / (total * total);
  }
  return dn;
}

inline DerivativeTable derivative_table(const SampleSet& s, const Partition& part,
                                        const PairContext& ctx) {
  const std::size_t n = s.n;
  const std::size_t m_boxes = static_cast<std::size_t>(part.size());
  DerivativeTable table;
  table.T_hat = total_indices(s);

  const double n_real = static_cast<double>(n);
  const double mean_f = pairwise_sum(s.F0) / n_real;
  const double mean_f2 =
      pairwise_sum_index(0, n, [&](std::size_t j) { return s.F0[j] * s.F0[j]; }) / n_real;
  table.G_hat = mean_f2 - mean_f * mean_f;
  if (!(table.G_hat > 0.0))
    throw std::runtime_error("derivative_table: constant model (zero variance)");

  // dG per box needs only X0 sums bucketed by box membership.
  std::vector<double> g_f2(m_boxes, 0.0), g_f(m_boxes, 0.0), g_1(m_boxes, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto b = static_cast<std::size_t>(ctx.box0[j]);
    const double inv_phi = 1.0 / s.Phi0[j];
    g_f2[b] += s.F0[j] * s.F0[j] * inv_phi;
    g_f[b] += s.F0[j] * inv_phi;
    g_1[b] += inv_phi;
  }
  std::vector<double> d_g(m_boxes);
  for (std::size_t i = 0; i < m_boxes; ++i)
    d_g[i] = (g_f2[i] - 2.0 * mean_f * g_f[i] + g_1[i] * mean_f * mean_f) / n_real;

  table.dT = Mat(static_cast<std::size_t>(s.p), m_boxes);
  std::vector<double> term_resampled(m_boxes), term_base(m_boxes), term_face(m_boxes);
  for (int k = 0; k < s.p; ++k) {
    std::fill(term_resampled.begin(), term_resampled.end(), 0.0);
    std::fill(term_base.begin(), term_base.end(), 0.0);
    std::fill(term_face.begin(), term_face.end(), 0.0);
    const auto& fk = s.Fk[static_cast<std::size_t>(k)];
    const auto& phik = s.PhiK[static_cast<std::size_t>(k)];
    const auto& bk = ctx.boxk[static_cast<std::size_t>(k)];
    for (std::size_t j = 0; j < n; ++j) {
      const double d = s.F0[j] - fk[j];
      const double d2 = d * d;
      term_base[static_cast<std::size_t>(ctx.box0[j])] += d2 / s.Phi0[j];
      term_resampled[static_cast<std::size_t>(bk[j])] += d2 / phik[j];
      const double face_scale = d2 / ctx.phic(static_cast<std::size_t>(k), j);
      part.for_each_line_box(s.X0.row(j), k, [&](std::int32_t i) {
        term_face[static_cast<std::size_t>(i)] +=
            face_scale * part.boxes[static_cast<std::size_t>(i)].intervals[static_cast<std::size_t>(k)].length();
      });
    }
    for (std::size_t i = 0; i < m_boxes; ++i) {
      const double d_f = (term_resampled[i] + term_base[i] - term_face[i]) / (2.0 * n_real);
      table.dT(static_cast<std::size_t>(k), i) =
          d_f / table.G_hat - table.T_hat[static_cast<std::size_t>(k)] * d_g[i] / table.G_hat;
    }
  }
  table.dN = normalized_derivative_table(table);
  return table;
}

inline DerivativeTable derivative_table(const SampleSet& s, const Partition& part,
                                        const ProductDensity& density) {
  return derivative_table(s, part, make_pair_context(s, part, density));
}

// The estimator is linear in the perturbation, so the derivative along any
// piecewise-constant direction is the plain dot product with the table row.
inline double derivative_along(std::span<const double> d_row, std::span<const double> coeffs) {
  if (d_row.size() != coeffs.size())
    throw std::invalid_argument("derivative_along: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < d_row.size(); ++i) sum += d_row[i] * coeffs[i];
  return sum;
}

struct Target {
  enum class Kind { TotalIndex, NormalizedIndex };
  Kind kind = Kind::TotalIndex;
  int k = 0;  // 0-based variable index
  std::string label() const {
    return (kind == Kind::TotalIndex ? "T" : "N") + std::to_string(k + 1);
  }
  bool operator==(const Target&) const = default;
};

// Basis coefficients of the locally optimal perturbation subject to the
// density floors: a_i = sign(d_i) b_i with sign(0) = 0, and the attained
// maximum of |d . a| is sum_i |d_i| b_i.
struct PerturbationDirection {
  std::vector<double> a;
  Target target;
  double norm_value = 0.0;
};

inline PerturbationDirection optimal_direction(std::span<const double> d_row,
                                               std::span<const double> floors, Target target) {
  if (d_row.size() != floors.size())
    throw std::invalid_argument("optimal_direction: size mismatch");
  PerturbationDirection dir;
  dir.target = target;
  dir.a.resize(d_row.size(), 0.0);
  for (std::size_t i = 0; i < d_row.size(); ++i) {
    if (!std::isfinite(d_row[i]) || !(floors[i] >= 0.0))
      throw std::invalid_argument("optimal_direction: derivatives must be finite, floors >= 0");
    if (d_row[i] > 0.0)
      dir.a[i] = floors[i];
    else if (d_row[i] < 0.0)
      dir.a[i] = -floors[i];
  }
  dir.norm_value = pairwise_sum_index(0, d_row.size(), [&](std::size_t i) {
    return std::abs(d_row[i]) * floors[i];
  });
  return dir;
}

}  // namespace sobolrob
