#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sobolrob/densities.hpp"
#include "sobolrob/summation.hpp"
#include "sobolrob/types.hpp"

namespace sobolrob {

struct SplitRule {
  int dim = -1;
  double threshold = 0.0;
};

struct TreeNode {
  SplitRule split;               // valid for internal nodes
  std::int32_t left = -1, right = -1;
  std::int32_t box = -1;         // leaf payload, -1 for internal nodes
  bool is_leaf() const { return box >= 0; }
};

// Partition of Omega into closed boxes whose interiors tile the domain.
// Membership is left-closed/right-open per dimension, with the box touching
// the top edge of Omega closed on that side; this fixes row assignment on
// shared faces. Tree-backed partitions answer point and axis-line queries by
// descent; partitions built from explicit boxes fall back to a linear scan.
struct Partition {
  std::vector<Box> boxes;
  std::vector<double> floors;            // b_i, filled by compute_floors
  std::vector<double> volumes;           // vhat_i, filled by estimate_volumes
  std::vector<std::int32_t> counts;      // X0 rows per box
  std::vector<std::int32_t> assignment;  // X0 row -> box
  std::vector<Interval> omega;
  std::vector<TreeNode> nodes;
  std::int32_t root = -1;

  int size() const { return static_cast<int>(boxes.size()); }

  bool interval_holds(int dim, const Interval& iv, double x) const {
    if (x < iv.lo || x > iv.hi) return false;
    if (x < iv.hi) return true;
    return iv.hi == omega[static_cast<std::size_t>(dim)].hi;
  }

  std::int32_t locate(std::span<const double> x) const {
    if (root >= 0) {
      std::int32_t node = root;
      while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const auto& nd = nodes[static_cast<std::size_t>(node)];
        node = x[static_cast<std::size_t>(nd.split.dim)] < nd.split.threshold ? nd.left : nd.right;
      }
      return nodes[static_cast<std::size_t>(node)].box;
    }
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      bool inside = true;
      for (std::size_t d = 0; d < omega.size() && inside; ++d)
        inside = interval_holds(static_cast<int>(d), boxes[i].intervals[d], x[d]);
      if (inside) return static_cast<std::int32_t>(i);
    }
    throw std::runtime_error("Partition::locate: point is not covered by any box");
  }

  // Visit every box whose projection orthogonal to `dim` contains x_{~dim}:
  // the column of boxes stacked along that axis through x.
  template <class Visit>
  void for_each_line_box(std::span<const double> x, int dim, Visit&& visit) const {
    if (root >= 0) {
      std::int32_t stack[128];
      int top = 0;
      stack[top++] = root;
      std::vector<std::int32_t> deep;  // spill for pathologically deep trees
      while (top > 0 || !deep.empty()) {
        std::int32_t node;
        if (top > 0) {
          node = stack[--top];
        } else {
          node = deep.back();
          deep.pop_back();
        }
        const auto& nd = nodes[static_cast<std::size_t>(node)];
        if (nd.is_leaf()) {
          visit(nd.box);
          continue;
        }
        auto push = [&](std::int32_t child) {
          if (top < 128)
            stack[top++] = child;
          else
            deep.push_back(child);
        };
        if (nd.split.dim == dim) {
          push(nd.left);
          push(nd.right);
        } else {
          push(x[static_cast<std::size_t>(nd.split.dim)] < nd.split.threshold ? nd.left : nd.right);
        }
      }
      return;
    }
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      bool inside = true;
      for (std::size_t d = 0; d < omega.size() && inside; ++d) {
        if (static_cast<int>(d) == dim) continue;
        inside = interval_holds(static_cast<int>(d), boxes[i].intervals[d], x[d]);
      }
      if (inside) visit(static_cast<std::int32_t>(i));
    }
  }
};

namespace detail {

inline void assign_rows(Partition& part, const Mat& x0) {
  part.assignment.resize(x0.rows);
  part.counts.assign(part.boxes.size(), 0);
  for (std::size_t i = 0; i < x0.rows; ++i) {
    const std::int32_t b = part.locate(x0.row(i));
    part.assignment[i] = b;
    ++part.counts[static_cast<std::size_t>(b)];
  }
}

struct CartBuilder {
  const Mat& x0;
  std::span<const double> f0;
  int min_leaf;
  std::span<const int> dims;
  Partition& part;

  std::int32_t build(std::vector<std::int32_t>& rows, const Box& bounds) {
    const std::size_t m = rows.size();
    double sum_y = 0.0, sum_y2 = 0.0;
    for (const std::int32_t r : rows) {
      sum_y += f0[static_cast<std::size_t>(r)];
      sum_y2 += f0[static_cast<std::size_t>(r)] * f0[static_cast<std::size_t>(r)];
    }
    const double sse_node = sum_y2 - sum_y * sum_y / static_cast<double>(m);

    int best_dim = -1;
    double best_threshold = 0.0;
    double best_sse = sse_node;
    if (m >= 2 * static_cast<std::size_t>(min_leaf)) {
      std::vector<std::int32_t> order(rows);
      std::vector<double> vals(m), ys(m);
      for (const int dim : dims) {
        std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
          return x0(static_cast<std::size_t>(a), static_cast<std::size_t>(dim)) <
                 x0(static_cast<std::size_t>(b), static_cast<std::size_t>(dim));
        });
        for (std::size_t i = 0; i < m; ++i) {
          vals[i] = x0(static_cast<std::size_t>(order[i]), static_cast<std::size_t>(dim));
          ys[i] = f0[static_cast<std::size_t>(order[i])];
        }
        double left_y = 0.0, left_y2 = 0.0;
        for (std::size_t s = 1; s < m; ++s) {
          left_y += ys[s - 1];
          left_y2 += ys[s - 1] * ys[s - 1];
          if (s < static_cast<std::size_t>(min_leaf) || m - s < static_cast<std::size_t>(min_leaf))
            continue;
          if (!(vals[s - 1] < vals[s])) continue;  // candidates sit between distinct values
          const double threshold = 0.5 * (vals[s - 1] + vals[s]);
          if (!(vals[s - 1] < threshold && threshold < vals[s])) continue;  // fp-degenerate gap
          const double right_y = sum_y - left_y, right_y2 = sum_y2 - left_y2;
          const double sse = (left_y2 - left_y * left_y / static_cast<double>(s)) +
                             (right_y2 - right_y * right_y / static_cast<double>(m - s));
          // Strict improvement scan in (dim asc, threshold asc) order doubles
          // as the tie-break: first optimum wins.
          if (sse < best_sse) {
            best_sse = sse;
            best_dim = dim;
            best_threshold = threshold;
          }
        }
      }
    }

    if (best_dim < 0) {
      TreeNode leaf;
      leaf.box = static_cast<std::int32_t>(part.boxes.size());
      part.boxes.push_back(bounds);
      part.nodes.push_back(leaf);
      return static_cast<std::int32_t>(part.nodes.size() - 1);
    }

    std::vector<std::int32_t> left_rows, right_rows;
    left_rows.reserve(m);
    right_rows.reserve(m);
    for (const std::int32_t r : rows)
      (x0(static_cast<std::size_t>(r), static_cast<std::size_t>(best_dim)) < best_threshold
           ? left_rows
           : right_rows)
          .push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    Box left_box = bounds, right_box = bounds;
    left_box.intervals[static_cast<std::size_t>(best_dim)].hi = best_threshold;
    right_box.intervals[static_cast<std::size_t>(best_dim)].lo = best_threshold;

    const std::size_t self = part.nodes.size();
    part.nodes.emplace_back();
    part.nodes[self].split = {best_dim, best_threshold};
    const std::int32_t left_id = build(left_rows, left_box);
    const std::int32_t right_id = build(right_rows, right_box);
    part.nodes[self].left = left_id;
    part.nodes[self].right = right_id;
    return static_cast<std::int32_t>(self);
  }
};

}  // namespace detail

// Greedy CART partition of Omega fit on (X0, F0): recursive binary splits
// minimizing the summed squared error of per-leaf constant fits, admissible
// only when both children keep at least `min_leaf` rows. Candidate thresholds
// are midpoints between consecutive distinct sample values in each allowed
// dimension. With fewer than 2*min_leaf rows the root is the single box.
inline Partition fit_tree(const Mat& x0, std::span<const double> f0, int min_leaf,
                          std::span<const int> allowed_dims, std::vector<Interval> omega) {
  if (x0.rows < 2 || f0.size() != x0.rows)
    throw std::invalid_argument("fit_tree: need X0 and matching F0 with at least 2 rows");
  if (min_leaf < 1) throw std::invalid_argument("fit_tree: min_leaf must be >= 1");
  if (omega.size() != x0.cols) throw std::invalid_argument("fit_tree: omega dimension mismatch");
  if (allowed_dims.empty()) throw std::invalid_argument("fit_tree: allowed_dims must be nonempty");
  std::vector<int> dims(allowed_dims.begin(), allowed_dims.end());
  std::sort(dims.begin(), dims.end());
  dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
  for (const int d : dims)
    if (d < 0 || d >= static_cast<int>(x0.cols))
      throw std::out_of_range("fit_tree: allowed dimension out of range");

  Partition part;
  part.omega = std::move(omega);
  std::vector<std::int32_t> rows(x0.rows);
  std::iota(rows.begin(), rows.end(), 0);
  Box root_box{part.omega};
  detail::CartBuilder builder{x0, f0, min_leaf, dims, part};
  part.root = builder.build(rows, root_box);
  detail::assign_rows(part, x0);
  return part;
}

inline std::vector<int> all_dims(int p) {
  std::vector<int> dims(static_cast<std::size_t>(p));
  std::iota(dims.begin(), dims.end(), 0);
  return dims;
}

// Split every box into q cells at the empirical quantiles of the given
// coordinate of its own X0 rows; a quantile is the midpoint between the
// bracketing order statistics. Duplicate or degenerate thresholds merge
// cells, and boxes with fewer than q rows stay unsplit. Floors and volumes
// are invalidated and must be recomputed.
inline Partition refine_by_quantiles(const Partition& part, const Mat& x0, int dim, int q) {
  if (q < 2) throw std::invalid_argument("refine_by_quantiles: q must be >= 2");
  if (dim < 0 || dim >= static_cast<int>(x0.cols))
    throw std::out_of_range("refine_by_quantiles: dim out of range");
  if (part.assignment.size() != x0.rows)
    throw std::invalid_argument("refine_by_quantiles: partition was built from a different X0");

  std::vector<std::vector<double>> values(part.boxes.size());
  for (std::size_t i = 0; i < x0.rows; ++i)
    values[static_cast<std::size_t>(part.assignment[i])].push_back(
        x0(i, static_cast<std::size_t>(dim)));

  Partition out;
  out.omega = part.omega;
  out.nodes = part.nodes;
  out.root = part.root;

  std::vector<std::int32_t> leaf_node_of_box(part.boxes.size(), -1);
  for (std::size_t ni = 0; ni < out.nodes.size(); ++ni)
    if (out.nodes[ni].is_leaf()) leaf_node_of_box[static_cast<std::size_t>(out.nodes[ni].box)] = static_cast<std::int32_t>(ni);

  for (std::size_t b = 0; b < part.boxes.size(); ++b) {
    const Box& box = part.boxes[b];
    const Interval span = box.intervals[static_cast<std::size_t>(dim)];
    auto& v = values[b];
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();

    std::vector<double> thresholds;
    if (m >= static_cast<std::size_t>(q)) {
      for (int j = 1; j < q; ++j) {
        std::size_t k = static_cast<std::size_t>(j) * m / static_cast<std::size_t>(q);
        k = std::clamp<std::size_t>(k, 1, m - 1);
        const double t = 0.5 * (v[k - 1] + v[k]);
        if (t <= span.lo || t >= span.hi) continue;
        if (!thresholds.empty() && t <= thresholds.back()) continue;
        thresholds.push_back(t);
      }
    }

    std::vector<std::int32_t> cell_boxes;
    double lo = span.lo;
    for (std::size_t c = 0; c <= thresholds.size(); ++c) {
      const double hi = c < thresholds.size() ? thresholds[c] : span.hi;
      Box cell = box;
      cell.intervals[static_cast<std::size_t>(dim)] = {lo, hi};
      cell_boxes.push_back(static_cast<std::int32_t>(out.boxes.size()));
      out.boxes.push_back(std::move(cell));
      lo = hi;
    }

    if (!out.nodes.empty()) {
      // Replace the original leaf by a chain of binary splits on `dim`.
      std::int32_t node = leaf_node_of_box[b];
      for (std::size_t c = 0; c < thresholds.size(); ++c) {
        TreeNode leaf;
        leaf.box = cell_boxes[c];
        out.nodes.push_back(leaf);
        const std::int32_t leaf_id = static_cast<std::int32_t>(out.nodes.size() - 1);
        out.nodes.emplace_back();
        const std::int32_t next = static_cast<std::int32_t>(out.nodes.size() - 1);
        out.nodes[static_cast<std::size_t>(node)].split = {dim, thresholds[c]};
        out.nodes[static_cast<std::size_t>(node)].box = -1;
        out.nodes[static_cast<std::size_t>(node)].left = leaf_id;
        out.nodes[static_cast<std::size_t>(node)].right = next;
        node = next;
      }
      out.nodes[static_cast<std::size_t>(node)].split = {};
      out.nodes[static_cast<std::size_t>(node)].left = -1;
      out.nodes[static_cast<std::size_t>(node)].right = -1;
      out.nodes[static_cast<std::size_t>(node)].box = cell_boxes.back();
    }
  }
  detail::assign_rows(out, x0);
  return out;
}

// Monte Carlo volume per box from the existing data: the importance-sampling
// identity E[1{X in R_i}/phi(X)] = vol(R_i). Using these (rather than exact
// volumes) keeps the downstream perturbation weights consistent with the
// sample-based normalizer. Empty boxes get volume zero and are flagged by
// counts[i] == 0; optimal directions force a_i = 0 there.
inline std::vector<double> estimate_volumes(const Partition& part, const Mat& x0,
                                            std::span<const double> phi0) {
  if (part.assignment.size() != x0.rows || phi0.size() != x0.rows)
    throw std::invalid_argument("estimate_volumes: size mismatch with the partition's X0");
  for (std::size_t i = 0; i < phi0.size(); ++i)
    if (!(phi0[i] > 0.0)) throw std::invalid_argument("estimate_volumes: Phi0 must be positive");
  std::vector<double> v(part.boxes.size(), 0.0);
  for (std::size_t i = 0; i < x0.rows; ++i)
    v[static_cast<std::size_t>(part.assignment[i])] += 1.0 / phi0[i];
  for (auto& vi : v) vi /= static_cast<double>(x0.rows);
  return v;
}

// Exact per-box infima of the nominal density.
inline std::vector<double> compute_floors(const Partition& part, const ProductDensity& density) {
  std::vector<double> b(part.boxes.size(), 0.0);
  for (std::size_t i = 0; i < part.boxes.size(); ++i) b[i] = density.inf_on_box(part.boxes[i]);
  return b;
}

// Partition from explicit boxes (tests, hand-made grids). Rows are assigned by
// the same membership convention as tree-backed partitions.
inline Partition partition_from_boxes(std::vector<Box> boxes, std::vector<Interval> omega,
                                      const Mat* x0 = nullptr) {
  if (boxes.empty()) throw std::invalid_argument("partition_from_boxes: no boxes");
  for (const auto& b : boxes)
    if (b.intervals.size() != omega.size())
      throw std::invalid_argument("partition_from_boxes: box dimension mismatch");
  Partition part;
  part.boxes = std::move(boxes);
  part.omega = std::move(omega);
  if (x0 != nullptr) detail::assign_rows(part, *x0);
  return part;
}

}  // namespace sobolrob
