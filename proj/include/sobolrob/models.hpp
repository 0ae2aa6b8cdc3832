#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sobolrob/types.hpp"

namespace sobolrob::models {

// Multiplicative benchmark on [0,1]^10 with coefficients a_k = k-1: the first
// factors dominate, the trailing ones are nearly inert.
inline double g_function(std::span<const double> x) {
  if (x.size() != 10) throw std::invalid_argument("g_function: expects 10 inputs");
  double v = 1.0;
  for (int k = 0; k < 10; ++k) {
    const double a = static_cast<double>(k);
    v *= (std::abs(4.0 * x[static_cast<std::size_t>(k)] - 2.0) + a) / (1.0 + a);
  }
  return v;
}

// Closed-form total index of the g-function for variable k (0-based), using
// the per-factor variances D_k = 1/(3 (1+a_k)^2).
inline double g_function_total_index(int k) {
  if (k < 0 || k >= 10) throw std::out_of_range("g_function_total_index: k out of range");
  std::array<double, 10> d{};
  double prod_all = 1.0;
  for (int j = 0; j < 10; ++j) {
    const double one_plus_a = 1.0 + static_cast<double>(j);
    d[static_cast<std::size_t>(j)] = 1.0 / (3.0 * one_plus_a * one_plus_a);
    prod_all *= 1.0 + d[static_cast<std::size_t>(j)];
  }
  const double prod_rest = prod_all / (1.0 + d[static_cast<std::size_t>(k)]);
  return d[static_cast<std::size_t>(k)] * prod_rest / (prod_all - 1.0);
}

inline double linear3(std::span<const double> x) {
  if (x.size() != 3) throw std::invalid_argument("linear3: expects 3 inputs");
  return 1.5 * x[0] + 1.25 * x[1] + x[2];
}

// Lorenz convection system integrated with classical fixed-step RK4. The
// quantity of interest is the ratio y3/y2 at the final time.
struct LorenzParams {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
  std::array<double, 3> alpha{1.0, 1.0, 1.0};
  double t_end = 1.0;
  double step = 1e-3;
};

inline double lorenz_qoi(const LorenzParams& prm) {
  if (!(prm.step > 0.0)) throw std::invalid_argument("lorenz_qoi: step must be positive");
  const double steps_real = prm.t_end / prm.step;
  const long long steps = std::llround(steps_real);
  if (steps < 1 || std::abs(steps_real - static_cast<double>(steps)) > 1e-9)
    throw std::invalid_argument("lorenz_qoi: t_end must be an integer number of steps");

  double y1 = prm.alpha[0], y2 = prm.alpha[1], y3 = prm.alpha[2];
  const double h = prm.step;
  auto f1 = [&](double a, double b) { return prm.sigma * (b - a); };
  auto f2 = [&](double a, double b, double c) { return a * (prm.rho - c) - b; };
  auto f3 = [&](double a, double b, double c) { return a * b - prm.beta * c; };
  for (long long s = 0; s < steps; ++s) {
    const double k1a = f1(y1, y2), k1b = f2(y1, y2, y3), k1c = f3(y1, y2, y3);
    const double a2 = y1 + 0.5 * h * k1a, b2 = y2 + 0.5 * h * k1b, c2 = y3 + 0.5 * h * k1c;
    const double k2a = f1(a2, b2), k2b = f2(a2, b2, c2), k2c = f3(a2, b2, c2);
    const double a3 = y1 + 0.5 * h * k2a, b3 = y2 + 0.5 * h * k2b, c3 = y3 + 0.5 * h * k2c;
    const double k3a = f1(a3, b3), k3b = f2(a3, b3, c3), k3c = f3(a3, b3, c3);
    const double a4 = y1 + h * k3a, b4 = y2 + h * k3b, c4 = y3 + h * k3c;
    const double k4a = f1(a4, b4), k4b = f2(a4, b4, c4), k4c = f3(a4, b4, c4);
    y1 += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    y2 += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
    y3 += h / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
    if (!(std::isfinite(y1) && std::isfinite(y2) && std::isfinite(y3)))
      throw std::runtime_error("lorenz_qoi: state blew up at step " + std::to_string(s));
  }
  if (std::abs(y2) < 1e-12)
    throw std::domain_error("lorenz_qoi: y2 at the final time is numerically zero");
  return y3 / y2;
}

// Pipeline-facing wrapper: x = (sigma, rho, beta, alpha1, alpha2, alpha3).
inline double lorenz_model(std::span<const double> x) {
  if (x.size() != 6) throw std::invalid_argument("lorenz: expects 6 inputs");
  LorenzParams prm;
  prm.sigma = x[0];
  prm.rho = x[1];
  prm.beta = x[2];
  prm.alpha = {x[3], x[4], x[5]};
  return lorenz_qoi(prm);
}

namespace detail {

// In-place lower Cholesky; returns false when the matrix is not SPD.
inline bool cholesky(Mat& a) {
  const std::size_t n = a.rows;
  for (std::size_t k = 0; k < n; ++k) {
    double diag = a(k, k);
    for (std::size_t j = 0; j < k; ++j) diag -= a(k, j) * a(k, j);
    if (!(diag > 0.0)) return false;
    a(k, k) = std::sqrt(diag);
    for (std::size_t i = k + 1; i < n; ++i) {
      double v = a(i, k);
      for (std::size_t j = 0; j < k; ++j) v -= a(i, j) * a(k, j);
      a(i, k) = v / a(k, k);
    }
  }
  return true;
}

inline std::vector<double> cholesky_solve(const Mat& chol, std::span<const double> b) {
  const std::size_t n = chol.rows;
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) y[i] -= chol(i, j) * y[j];
    y[i] /= chol(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t j = ii + 1; j < n; ++j) y[ii] -= chol(j, ii) * y[j];
    y[ii] /= chol(ii, ii);
  }
  return y;
}

}  // namespace detail

// Analytic total Sobol' indices of f(X) = c'X for Gaussian X with covariance
// Sigma: T_k = c_k^2 Var(X_k | X_{~k}) / Var(c'X), with the conditional
// variance given by the Schur complement. Analysis-only oracle; Gaussian
// inputs have unbounded support and never enter the perturbation pipeline.
inline IndexVector linear_gaussian_total_indices(std::span<const double> c, const Mat& sigma) {
  const std::size_t p = c.size();
  if (sigma.rows != p || sigma.cols != p)
    throw std::invalid_argument("linear_gaussian_total_indices: dimension mismatch");
  double total_var = 0.0;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) total_var += c[i] * sigma(i, j) * c[j];
  if (!(total_var > 0.0))
    throw std::invalid_argument("linear_gaussian_total_indices: total variance must be positive");

  IndexVector t(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    double cond_var = sigma(k, k);
    if (p > 1) {
      Mat rest(p - 1, p - 1);
      std::vector<double> cross(p - 1);
      std::size_t ri = 0;
      for (std::size_t i = 0; i < p; ++i) {
        if (i == k) continue;
        cross[ri] = sigma(i, k);
        std::size_t rj = 0;
        for (std::size_t j = 0; j < p; ++j) {
          if (j == k) continue;
          rest(ri, rj++) = sigma(i, j);
        }
        ++ri;
      }
      if (!detail::cholesky(rest))
        throw std::runtime_error("linear_gaussian_total_indices: singular conditioning block");
      const auto solved = detail::cholesky_solve(rest, cross);
      for (std::size_t i = 0; i < p - 1; ++i) cond_var -= cross[i] * solved[i];
    }
    t[k] = c[k] * c[k] * cond_var / total_var;
  }
  return t;
}

// Models addressable by name from run configurations.
struct ModelInfo {
  const char* name;
  int dimension;
  double (*fn)(std::span<const double>);
};

inline const ModelInfo* find_model(std::string_view name) {
  static constexpr ModelInfo kModels[] = {
      {"gfunction", 10, &g_function},
      {"linear3", 3, &linear3},
      {"lorenz", 6, &lorenz_model},
  };
  for (const auto& m : kModels)
    if (name == m.name) return &m;
  return nullptr;
}

}  // namespace sobolrob::models
