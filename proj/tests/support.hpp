#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "isovar/dist.hpp"

namespace isovar::testing {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  /// Standard error of the mean assuming independent draws.
  double se = 0.0;
};

inline Moments moments(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / (n - 1.0);
  return {mean, var, std::sqrt(var / n)};
}

/// Standard error of the mean of a correlated series by non-overlapping batch
/// means.
inline double batch_means_se(std::span<const double> xs, std::size_t batches = 50) {
  const std::size_t len = xs.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b)
    means.push_back(std::accumulate(xs.begin() + b * len, xs.begin() + (b + 1) * len, 0.0) / len);
  return moments(means).se;
}

/// Asymptotic Kolmogorov tail Q(t) = 2 sum_k (-1)^(k-1) exp(-2 k^2 t^2).
inline double kolmogorov_tail(double t) {
  if (t < 0.2) return 1.0;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) q += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * t * t);
  return std::clamp(q, 0.0, 1.0);
}

/// One-sample Kolmogorov-Smirnov p-value against a continuous CDF.
inline double ks_pvalue(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sn = std::sqrt(n);
  return kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
}

/// Two-sample Kolmogorov-Smirnov p-value.
inline double ks2_pvalue(std::vector<double> xs, std::vector<double> ys) {
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double n = static_cast<double>(xs.size());
  const double m = static_cast<double>(ys.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < xs.size() && j < ys.size()) {
    const double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] <= v) ++i;
    while (j < ys.size() && ys[j] <= v) ++j;
    d = std::max(d, std::abs(i / n - j / m));
  }
  const double ne = std::sqrt(n * m / (n + m));
  return kolmogorov_tail((ne + 0.12 + 0.11 / ne) * d);
}

/// Integral of f over (0, inf).
inline double integrate_half_line(const std::function<double(double)>& f) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate(f);
}

/// Integral of f over [a, b].
inline double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12);
}

/// E[X^k] under GIG(a, b, p), from the unnormalized kernel by quadrature.
/// The kernel is rescaled by its value at the mode to stay finite.
inline double gig_raw_moment(const dist::GigParams& g, int k) {
  const double l = g.p - 1.0;
  const double mode = g.b > 0.0 ? (l + std::sqrt(l * l + g.a * g.b)) / g.a : std::max(l, 0.0) * 2.0 / g.a + 1e-300;
  const double log_ref = dist::gig_log_kernel(std::max(mode, 1e-300), g);
  const auto kern = [&](double x) { return std::exp(dist::gig_log_kernel(x, g) - log_ref); };
  // Split at the mode so exp_sinh sees a monotone tail.
  const auto piece = [&](int power) {
    const auto f = [&](double x) { return std::pow(x, power) * kern(x); };
    boost::math::quadrature::tanh_sinh<double> ts;
    const double left = mode > 0.0 ? ts.integrate(f, 0.0, mode) : 0.0;
    const double right = integrate_half_line([&](double u) { return f(mode + u); });
    return left + right;
  };
  return piece(k) / piece(0);
}

}  // namespace isovar::testing
