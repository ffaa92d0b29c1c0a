#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mcse/error.hpp"
#include "mcse/noise.hpp"
#include "mcse/value_field.hpp"

namespace mcse {

// Terms more than this many nats below the largest one are dropped from a
// log-sum-exp; with at most ~1e5 cells their total is below 1e-17 relative.
inline constexpr double kLogSumCutoff = 50.0;

namespace detail {

// log sum_t exp(lambda (V_t - Vmax) + lf_t) - log sum_t exp(lambda (V_t - Vmax))
inline double log_softmax_mixture(std::span<const double> values, double vmax, std::span<const double> log_kernel,
                                  double lambda, std::vector<double>& scratch) {
  const std::size_t n = values.size();
  scratch.resize(n);
  double umax = -INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = lambda * (values[i] - vmax) + log_kernel[i];
    scratch[i] = u;
    umax = u > umax ? u : umax;
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = scratch[i] - umax;
    if (u > -kLogSumCutoff) num += std::exp(u);
    const double s = lambda * (values[i] - vmax);
    if (s > -kLogSumCutoff) den += std::exp(s);
  }
  return umax + std::log(num) - std::log(den);
}

// -0.5 * Mahalanobis^2 of (executed - t) for every cell t.
inline void log_kernel_terms(const ActionGrid& grid, const Sym2& precision, Vec2 executed, std::vector<double>& out) {
  out.resize(grid.size());
  const int side = grid.side();
  for (int r = 0; r < side; ++r) {
    const double dy = executed.y - grid.cell(r, 0).y;
    const double cy = precision.yy * dy * dy;
    const double by = 2.0 * precision.xy * dy;
    double* row = &out[static_cast<std::size_t>(r) * side];
    for (int c = 0; c < side; ++c) {
      const double dx = executed.x - grid.cell(r, c).x;
      row[c] = -0.5 * (precision.xx * dx * dx + by * dx + cy);
    }
  }
}

}  // namespace detail

// log P(x | sigma, lambda): the density of executed action x under a softmax
// choice of target over the grid cells followed by Gaussian execution noise,
//   P(x) = sum_t exp(lambda V_t) f(x - t) / sum_t exp(lambda V_t).
// Evaluated entirely in log space so that it never underflows.
inline double log_likelihood(const ValueField& field, const BivariateNormal& noise, double lambda, Vec2 executed) {
  thread_local std::vector<double> log_kernel;
  thread_local std::vector<double> scratch;
  detail::log_kernel_terms(field.grid, noise.precision(), executed, log_kernel);
  const double out =
      noise.log_norm() + detail::log_softmax_mixture(field.values, field.max_value, log_kernel, lambda, scratch);
  if (!std::isfinite(out)) throw InvalidObservation("non-finite likelihood for executed action");
  return out;
}

inline double likelihood(const ValueField& field, const BivariateNormal& noise, double lambda, Vec2 executed) {
  return std::exp(log_likelihood(field, noise, lambda, executed));
}

// Same quantity for several rationality levels sharing one value field; the
// noise terms are computed once.
inline std::vector<double> log_likelihoods(const ValueField& field, const BivariateNormal& noise,
                                           std::span<const double> lambdas, Vec2 executed) {
  thread_local std::vector<double> log_kernel;
  thread_local std::vector<double> scratch;
  detail::log_kernel_terms(field.grid, noise.precision(), executed, log_kernel);
  std::vector<double> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    const double v =
        noise.log_norm() + detail::log_softmax_mixture(field.values, field.max_value, log_kernel, lambda, scratch);
    if (!std::isfinite(v)) throw InvalidObservation("non-finite likelihood for executed action");
    out.push_back(v);
  }
  return out;
}

}  // namespace mcse
