#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "sobolrob/parallel.hpp"
#include "sobolrob/rng.hpp"
#include "sobolrob/types.hpp"

namespace sobolrob {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool operator==(const Interval&) const = default;
};

inline void check_interval(const Interval& iv, const std::string& what) {
  if (!(std::isfinite(iv.lo) && std::isfinite(iv.hi) && iv.lo < iv.hi))
    throw std::invalid_argument(what + ": interval must be finite with lo < hi");
}

// Axis-aligned hyperrectangle, one interval per input dimension.
struct Box {
  std::vector<Interval> intervals;
  bool operator==(const Box&) const = default;
};

// Product of interval lengths over the index set u. For an indicator of this
// box this is the integral over the u-coordinates at any point whose
// complementary coordinates lie in the box's projection; the caller applies
// that projection test.
inline double box_face_measure(const Box& box, std::span<const int> u) {
  if (u.empty()) throw std::invalid_argument("box_face_measure: u must be nonempty");
  double m = 1.0;
  for (int j : u) {
    if (j < 0 || j >= static_cast<int>(box.intervals.size()))
      throw std::out_of_range("box_face_measure: dimension index out of range");
    m *= box.intervals[j].length();
  }
  return m;
}

enum class MarginalFamily { Uniform, BetaShape, TruncatedNormal };

// One compactly supported univariate marginal: uniform, a Beta with the
// standard pdf ~ t^(alpha-1) (1-t)^(beta-1) rescaled from [0,1] to the
// support, or a normal truncated to the support. Construction checks that the
// density integrates to one (1e-10, graded Gauss-Legendre panels so endpoint
// singularities of Beta shapes below one are handled).
class Marginal {
 public:
  static Marginal uniform(Interval support) {
    return Marginal(MarginalFamily::Uniform, 0.0, 0.0, support);
  }
  static Marginal beta_shape(double alpha, double beta, Interval support) {
    if (!(alpha > 0.0) || !(beta > 0.0))
      throw std::invalid_argument("Marginal: Beta shape parameters must be positive");
    return Marginal(MarginalFamily::BetaShape, alpha, beta, support);
  }
  static Marginal truncated_normal(double mean, double sd, Interval support) {
    if (!(sd > 0.0) || !std::isfinite(mean))
      throw std::invalid_argument("Marginal: truncated normal needs finite mean and sd > 0");
    return Marginal(MarginalFamily::TruncatedNormal, mean, sd, support);
  }

  MarginalFamily family() const { return family_; }
  const Interval& support() const { return support_; }
  double param_a() const { return a_; }  // Beta alpha / normal mean
  double param_b() const { return b_; }  // Beta beta  / normal sd

  // Density in x-space; zero outside the closed support.
  double pdf(double x) const {
    const double w = support_.length();
    if (!support_.contains(x)) return 0.0;
    switch (family_) {
      case MarginalFamily::Uniform:
        return 1.0 / w;
      case MarginalFamily::BetaShape:
        return pdf_unit((x - support_.lo) / w) / w;
      case MarginalFamily::TruncatedNormal: {
        const double z = (x - a_) / b_;
        return std::exp(-0.5 * z * z) * inv_norm_;
      }
    }
    return 0.0;
  }

  double cdf(double x) const {
    if (x <= support_.lo) return 0.0;
    if (x >= support_.hi) return 1.0;
    switch (family_) {
      case MarginalFamily::Uniform:
        return (x - support_.lo) / support_.length();
      case MarginalFamily::BetaShape:
        return boost::math::ibeta(a_, b_, (x - support_.lo) / support_.length());
      case MarginalFamily::TruncatedNormal:
        return (std_normal_cdf((x - a_) / b_) - z_lo_cdf_) / z_mass_;
    }
    return 0.0;
  }

  // Inverse CDF for u in (0,1); results are clamped into the closed support.
  double inverse_cdf(double u) const {
    if (!(u > 0.0 && u < 1.0))
      throw std::domain_error("Marginal::inverse_cdf: u must lie strictly in (0,1)");
    double x = support_.lo;
    switch (family_) {
      case MarginalFamily::Uniform:
        x = support_.lo + u * support_.length();
        break;
      case MarginalFamily::BetaShape:
        x = support_.lo + boost::math::ibeta_inv(a_, b_, u) * support_.length();
        break;
      case MarginalFamily::TruncatedNormal: {
        const double pz = z_lo_cdf_ + u * z_mass_;
        x = a_ + b_ * std_normal_quantile(pz);
        break;
      }
    }
    return std::clamp(x, support_.lo, support_.hi);
  }

  // Infimum of the pdf over the closed subinterval. Uniform is constant and
  // the truncated normal is unimodal, so endpoints suffice; Beta additionally
  // has an interior antimode when both shapes are below one.
  double inf_on(const Interval& sub) const {
    if (!(sub.lo >= support_.lo && sub.hi <= support_.hi && sub.lo < sub.hi))
      throw std::invalid_argument("Marginal::inf_on: interval must lie inside the support");
    double m = std::min(pdf(sub.lo), pdf(sub.hi));
    if (family_ == MarginalFamily::BetaShape && a_ < 1.0 && b_ < 1.0) {
      const double t_anti = (1.0 - a_) / (2.0 - a_ - b_);
      const double x_anti = support_.lo + t_anti * support_.length();
      if (x_anti > sub.lo && x_anti < sub.hi) m = std::min(m, pdf(x_anti));
    }
    return m;
  }

 private:
  Marginal(MarginalFamily f, double a, double b, Interval s)
      : family_(f), a_(a), b_(b), support_(s) {
    check_interval(support_, "Marginal");
    switch (family_) {
      case MarginalFamily::Uniform:
        break;
      case MarginalFamily::BetaShape:
        log_beta_ = std::lgamma(a_) + std::lgamma(b_) - std::lgamma(a_ + b_);
        break;
      case MarginalFamily::TruncatedNormal: {
        z_lo_cdf_ = std_normal_cdf((support_.lo - a_) / b_);
        const double z_hi_cdf = std_normal_cdf((support_.hi - a_) / b_);
        z_mass_ = z_hi_cdf - z_lo_cdf_;
        if (!(z_mass_ > 0.0))
          throw std::invalid_argument("Marginal: truncated normal support carries no mass");
        inv_norm_ = 1.0 / (b_ * std::sqrt(2.0 * M_PI) * z_mass_);
        break;
      }
    }
    verify_normalization();
  }

  // Unit-coordinate Beta density; t may carry full precision near 0 or 1.
  double pdf_unit(double t) const {
    if (t < 0.0 || t > 1.0) return 0.0;
    if (t == 0.0) {
      if (a_ > 1.0) return 0.0;
      if (a_ == 1.0) return std::exp(-log_beta_);
      return std::numeric_limits<double>::infinity();
    }
    if (t == 1.0) {
      if (b_ > 1.0) return 0.0;
      if (b_ == 1.0) return std::exp(-log_beta_);
      return std::numeric_limits<double>::infinity();
    }
    return std::exp((a_ - 1.0) * std::log(t) + (b_ - 1.0) * std::log1p(-t) - log_beta_);
  }

  // pdf transported to t in [0,1], evaluated from the exact distance d to the
  // nearer endpoint so grading can approach the edges far below one ulp of 1.
  double pdf_unit_edge(double d, bool from_hi) const {
    switch (family_) {
      case MarginalFamily::Uniform:
        return 1.0;
      case MarginalFamily::BetaShape:
        return from_hi
                   ? std::exp((a_ - 1.0) * std::log1p(-d) + (b_ - 1.0) * std::log(d) - log_beta_)
                   : std::exp((a_ - 1.0) * std::log(d) + (b_ - 1.0) * std::log1p(-d) - log_beta_);
      case MarginalFamily::TruncatedNormal: {
        const double t = from_hi ? 1.0 - d : d;  // smooth family: rounding is harmless
        return pdf(support_.lo + t * support_.length()) * support_.length();
      }
    }
    return 0.0;
  }

  void verify_normalization() const {
    using gauss = boost::math::quadrature::gauss<double, 15>;
    // Geometrically graded panels toward both endpoints. Beta shapes below one
    // have integrable endpoint singularities; the grading resolves them.
    auto half = [&](bool from_hi) {
      double mass = 0.0;
      double outer = 0.5;
      for (int level = 0; level < 340; ++level) {
        const double inner = (level == 339) ? 0.0 : outer * 0.5;
        mass += gauss::integrate([&](double d) { return pdf_unit_edge(d, from_hi); }, inner, outer);
        outer = inner;
        if (outer == 0.0) break;
      }
      return mass;
    };
    const double mass = half(false) + half(true);
    if (!(std::abs(mass - 1.0) <= 1e-10))
      throw std::invalid_argument("Marginal: density does not integrate to 1 (error " +
                                  std::to_string(mass - 1.0) + ")");
  }

  static double std_normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }
  static double std_normal_quantile(double p) {
    return -M_SQRT2 * boost::math::erfc_inv(2.0 * p);
  }

  MarginalFamily family_;
  double a_ = 0.0, b_ = 0.0;
  Interval support_;
  double log_beta_ = 0.0;
  double z_lo_cdf_ = 0.0, z_mass_ = 1.0, inv_norm_ = 1.0;
};

// Independent product density with compact support. All sampling is inverse
// CDF over Philox streams: one seed fixes every matrix, and parallel
// evaluation cannot change the draws.
class ProductDensity {
 public:
  explicit ProductDensity(std::vector<Marginal> marginals) : marginals_(std::move(marginals)) {
    if (marginals_.empty())
      throw std::invalid_argument("ProductDensity: need at least one marginal");
  }

  int dimension() const { return static_cast<int>(marginals_.size()); }
  const Marginal& marginal(int j) const { return marginals_.at(j); }

  std::vector<Interval> support() const {
    std::vector<Interval> omega;
    omega.reserve(marginals_.size());
    for (const auto& m : marginals_) omega.push_back(m.support());
    return omega;
  }

  bool in_support(std::span<const double> x) const {
    if (x.size() != marginals_.size()) return false;
    for (std::size_t j = 0; j < marginals_.size(); ++j)
      if (!marginals_[j].support().contains(x[j])) return false;
    return true;
  }

  double pdf(std::span<const double> x) const {
    require_point(x);
    double v = 1.0;
    for (std::size_t j = 0; j < marginals_.size(); ++j) v *= marginals_[j].pdf(x[j]);
    return v;
  }

  Mat sample(std::size_t n, std::uint64_t seed, int threads = 1) const {
    if (n < 1) throw std::invalid_argument("ProductDensity::sample: n must be >= 1");
    const std::size_t p = marginals_.size();
    Mat X(n, p);
    parallel_for(n, threads, [&](std::size_t i) {
      for (std::size_t j = 0; j < p; ++j)
        X(i, j) = marginals_[j].inverse_cdf(
            rng::uniform01(seed, rng::kStreamSample, i * p + j));
    });
    return X;
  }

  // Pick-freeze companion matrix: X0 with column k redrawn from marginal k.
  // Valid as a draw from X | X_{~k} because the density is a product.
  Mat pick_freeze(const Mat& X0, int k, std::uint64_t seed) const {
    if (k < 0 || k >= dimension())
      throw std::out_of_range("ProductDensity::pick_freeze: column index out of range");
    if (X0.cols != marginals_.size())
      throw std::invalid_argument("ProductDensity::pick_freeze: X0 has wrong dimension");
    Mat X = X0;
    for (std::size_t i = 0; i < X.rows; ++i)
      X(i, k) = marginals_[k].inverse_cdf(
          rng::uniform01(seed, rng::kStreamPickFreeze + static_cast<std::uint64_t>(k), i));
    return X;
  }

  // Product of the marginals not in u; the u-coordinates integrate out to one.
  double complement_marginal(std::span<const double> x, std::span<const int> u) const {
    require_point(x);
    if (u.empty()) throw std::invalid_argument("complement_marginal: u must be nonempty");
    std::vector<char> in_u(marginals_.size(), 0);
    for (int j : u) {
      if (j < 0 || j >= dimension())
        throw std::out_of_range("complement_marginal: index out of range");
      in_u[j] = 1;
    }
    double v = 1.0;
    for (std::size_t j = 0; j < marginals_.size(); ++j)
      if (!in_u[j]) v *= marginals_[j].pdf(x[j]);
    return v;
  }

  // Fast path for singleton u = {k}; no bounds re-check on x.
  double complement_excluding(std::span<const double> x, int k) const {
    double v = 1.0;
    for (int j = 0; j < dimension(); ++j)
      if (j != k) v *= marginals_[j].pdf(x[j]);
    return v;
  }

  // Infimum of the joint density over the closed box.
  double inf_on_box(const Box& box) const {
    if (box.intervals.size() != marginals_.size())
      throw std::invalid_argument("inf_on_box: box dimension mismatch");
    double v = 1.0;
    for (std::size_t j = 0; j < marginals_.size(); ++j)
      v *= marginals_[j].inf_on(box.intervals[j]);
    return v;
  }

 private:
  void require_point(std::span<const double> x) const {
    if (x.size() != marginals_.size())
      throw std::invalid_argument("ProductDensity: point has wrong dimension");
    for (std::size_t j = 0; j < marginals_.size(); ++j)
      if (!marginals_[j].support().contains(x[j]))
        throw std::domain_error("ProductDensity: coordinate " + std::to_string(j) +
                                " outside the support");
  }

  std::vector<Marginal> marginals_;
};

}  // namespace sobolrob
