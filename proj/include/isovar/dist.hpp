#pragma once

#include <cstddef>
#include <optional>

#include "isovar/rng.hpp"

/// Random variates and densities used by the Gibbs sampler.
///
/// Gamma uses the shape/rate convention: Ga(x | shape, rate) is proportional
/// to x^(shape-1) exp(-rate x). GIG(a, b, p) has density proportional to
/// x^(p-1) exp(-(a x + b / x) / 2).
namespace isovar::dist {

/// Rejection loops give up after this many attempts with NumericError.
inline constexpr std::size_t kMaxRejections = 1'000'000;

/// Marsaglia-Tsang squeeze; shape < 1 is boosted through shape + 1.
double sample_gamma(double shape, double rate, Rng& rng);

double gamma_log_density(double x, double shape, double rate);

/// N(mu, var) conditioned on x >= lower. Inverse-CDF through the upper tail
/// when the standardized bound is at most 4, exponential-envelope rejection
/// beyond that. The result is never below `lower`.
double sample_truncnorm_lower(double mu, double var, double lower, Rng& rng);

/// Standard normal upper tail probability 1 - Phi(x).
double normal_upper_tail(double x);

/// Density of log(eps^2) for eps ~ N(0, 1).
double logchi2_density(double eps);

/// log K_nu(x) for x > 0, any real nu. Trapezoid rule on the integral
/// representation K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt, done in
/// log space so it neither overflows nor underflows.
double log_bessel_k(double nu, double x);

struct GigParams {
  double a = 1.0;
  double b = 1.0;
  double p = 0.0;

  /// a > 0, b >= 0, and p > 0 whenever b == 0.
  void check() const;
};

/// Below this b (relative to max(1, a)) a GIG with p > 0 is sampled by
/// independence Metropolis-Hastings with a Gamma(p, a/2) proposal.
inline constexpr double kGigSmallB = 1e-14;

enum class GigRegime {
  gamma_mh,           ///< b ~ 0: independence MH with Gamma proposal
  small_omega,        ///< |p| < 1 and sqrt(ab) small: piecewise hat rejection
  ratio_of_uniforms,  ///< everything else
};

GigRegime gig_regime(const GigParams& params);

/// Unnormalized log density; -inf for x <= 0.
double gig_log_kernel(double x, const GigParams& params);

/// Normalized density. Requires b > 0.
double gig_density(double x, const GigParams& params);

struct GigDraw {
  double value = 0.0;
  GigRegime regime = GigRegime::ratio_of_uniforms;
  /// False only for a rejected MH proposal, in which case value == prev.
  bool accepted = true;
};

/// Draws from GIG(a, b, p). In the gamma_mh regime `prev` is the current
/// state of the chain; without it the proposal is returned as is.
GigDraw sample_gig(const GigParams& params, Rng& rng, std::optional<double> prev = std::nullopt);

/// MH acceptance probability for the gamma_mh regime.
double gig_mh_acceptance(double x_new, double x_old, const GigParams& params);

}  // namespace isovar::dist
