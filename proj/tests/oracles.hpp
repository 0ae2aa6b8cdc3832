// Test-side oracles, independent of the library's estimation paths: plain
// quadrature, exhaustive scans, and empirical-distribution statistics.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace oracles {

// Composite Simpson rule with 2*half_panels subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int half_panels = 20000) {
  const int n = 2 * half_panels;
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Kolmogorov-Smirnov statistic of a sample against a reference CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double u = cdf(sample[i]);
    d = std::max(d, std::abs(u - static_cast<double>(i) / n));
    d = std::max(d, std::abs(u - static_cast<double>(i + 1) / n));
  }
  return d;
}

// Minimum of f over an inclusive uniform grid.
inline double grid_min(const std::function<double(double)>& f, double a, double b,
                       int points = 1000) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i)
    m = std::min(m, f(a + (b - a) * static_cast<double>(i) / (points - 1)));
  return m;
}

// Exhaustive best axis split by summed squared error of per-side constant
// fits, requiring at least min_leaf samples on both sides. SSE is computed by
// the two-pass mean/deviation form, deliberately different arithmetic from
// any production code path.
struct BestSplit {
  int dim = -1;
  double threshold = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

inline BestSplit brute_force_best_split(const std::vector<std::vector<double>>& x,
                                        const std::vector<double>& y, int min_leaf) {
  const std::size_t n = y.size();
  const std::size_t p = x.front().size();
  auto sse_of = [&](const std::vector<double>& vals) {
    if (vals.empty()) return 0.0;
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double sse = 0.0;
    for (double v : vals) sse += (v - mean) * (v - mean);
    return sse;
  };
  BestSplit best;
  for (std::size_t dim = 0; dim < p; ++dim) {
    std::vector<double> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = x[i][dim];
    std::vector<double> sorted = coords;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t s = 1; s < n; ++s) {
      if (!(sorted[s - 1] < sorted[s])) continue;
      const double t = 0.5 * (sorted[s - 1] + sorted[s]);
      std::vector<double> left, right;
      for (std::size_t i = 0; i < n; ++i) (coords[i] < t ? left : right).push_back(y[i]);
      if (left.size() < static_cast<std::size_t>(min_leaf) ||
          right.size() < static_cast<std::size_t>(min_leaf))
        continue;
      const double sse = sse_of(left) + sse_of(right);
      if (sse < best.sse) best = {static_cast<int>(dim), t, sse};
    }
  }
  return best;
}

// Maximum of |d . a| over all sign patterns a_i in {-b_i, 0, b_i}.
inline double enumerate_best_objective(std::span<const double> d, std::span<const double> b) {
  const std::size_t m = d.size();
  std::size_t patterns = 1;
  for (std::size_t i = 0; i < m; ++i) patterns *= 3;
  double best = 0.0;
  for (std::size_t code = 0; code < patterns; ++code) {
    std::size_t c = code;
    double dot = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const int s = static_cast<int>(c % 3) - 1;
      c /= 3;
      dot += d[i] * (s * b[i]);
    }
    best = std::max(best, std::abs(dot));
  }
  return best;
}

// ---------------------------------------------------------------------------
// 2-D total Sobol' index by tensor quadrature under an arbitrary bounded,
// piecewise-smooth (and possibly unnormalized) density eta. Uses the
// operator forms
//   G      = I[f^2 eta] - I[f eta]^2 / I[eta]
//   F_k    = I[f^2 eta] - Int_{x_{~k}} ( Int f eta dx_k )^2 / eta_{~k}  dx_{~k}
//   T_k    = F_k / G,
// which are invariant to scaling eta. Breakpoints must contain every
// discontinuity so Gauss-Legendre panels see smooth integrands.
// ---------------------------------------------------------------------------

using Fn2 = std::function<double(double, double)>;

inline double gl_cells(const std::vector<double>& breaks, const std::function<double(double)>& g) {
  using gauss = boost::math::quadrature::gauss<double, 25>;
  double total = 0.0;
  for (std::size_t c = 0; c + 1 < breaks.size(); ++c)
    total += gauss::integrate(g, breaks[c], breaks[c + 1]);
  return total;
}

inline double total_index_2d(const Fn2& f, const Fn2& eta, const std::vector<double>& breaks_x,
                             const std::vector<double>& breaks_y, int k) {
  auto swap_args = [](const Fn2& g) {
    return [g](double a, double b) { return g(b, a); };
  };
  // Orient so that coordinate 0 is the resampled one.
  const Fn2 fo = k == 0 ? f : swap_args(f);
  const Fn2 eo = k == 0 ? eta : swap_args(eta);
  const std::vector<double>& bx = k == 0 ? breaks_x : breaks_y;
  const std::vector<double>& by = k == 0 ? breaks_y : breaks_x;

  const double int_eta = gl_cells(by, [&](double y) {
    return gl_cells(bx, [&](double x) { return eo(x, y); });
  });
  const double int_f_eta = gl_cells(by, [&](double y) {
    return gl_cells(bx, [&](double x) { return fo(x, y) * eo(x, y); });
  });
  const double int_f2_eta = gl_cells(by, [&](double y) {
    return gl_cells(bx, [&](double x) { return fo(x, y) * fo(x, y) * eo(x, y); });
  });
  const double cross = gl_cells(by, [&](double y) {
    const double slice_eta = gl_cells(bx, [&](double x) { return eo(x, y); });
    const double slice_f_eta = gl_cells(bx, [&](double x) { return fo(x, y) * eo(x, y); });
    return slice_f_eta * slice_f_eta / slice_eta;
  });

  const double g = int_f2_eta - int_f_eta * int_f_eta / int_eta;
  const double f_num = int_f2_eta - cross;
  return f_num / g;
}

}  // namespace oracles
