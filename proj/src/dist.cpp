#include "isovar/dist.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "isovar/error.hpp"

namespace isovar::dist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void rejection_cap(const char* who) {
  throw NumericError(std::string(who) + ": rejection loop hit the iteration cap");
}

}  // namespace

double sample_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0 && rate > 0.0 && std::isfinite(shape) && std::isfinite(rate)))
    throw DomainError("gamma: shape and rate must be positive and finite");
  if (shape < 1.0) {
    const double boosted = sample_gamma(shape + 1.0, 1.0, rng);
    const double u = rng.uniform_open();
    return std::exp(std::log(boosted) + std::log(u) / shape - std::log(rate));
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (std::size_t it = 0; it < kMaxRejections; ++it) {
    const double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
  rejection_cap("gamma");
}

double gamma_log_density(double x, double shape, double rate) {
  if (!(x > 0.0)) return -kInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double sample_truncnorm_lower(double mu, double var, double lower, Rng& rng) {
  if (!(var > 0.0) || !std::isfinite(var)) throw DomainError("truncnorm: variance must be positive and finite");
  const double sd = std::sqrt(var);
  const double alpha = (lower - mu) / sd;
  if (alpha <= 4.0) {
    const double tail = normal_upper_tail(alpha);
    const double q = rng.uniform_open() * tail;
    const double z = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
    return std::max(lower, mu + sd * z);
  }
  // Exponential envelope with the optimal rate for the standardized bound.
  const double rate = 0.5 * (alpha + std::sqrt(alpha * alpha + 4.0));
  for (std::size_t it = 0; it < kMaxRejections; ++it) {
    const double z = alpha + rng.exponential() / rate;
    const double d = z - rate;
    if (std::log(rng.uniform_open()) <= -0.5 * d * d) return std::max(lower, mu + sd * z);
  }
  rejection_cap("truncnorm");
}

double logchi2_density(double eps) {
  return std::exp(0.5 * (eps - std::exp(eps))) / std::sqrt(2.0 * std::numbers::pi);
}

namespace {

// log cosh(y) without overflow.
double log_cosh(double y) {
  y = std::abs(y);
  return y + std::log1p(std::exp(-2.0 * y)) - std::numbers::ln2;
}

}  // namespace

double log_bessel_k(double nu, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("bessel_k: argument must be positive and finite");
  nu = std::abs(nu);
  const auto g = [&](double t) { return -x * std::cosh(t) + log_cosh(nu * t); };

  // Peak of the integrand: t = 0 when nu^2 <= x, otherwise the single root of
  // g'(t) = -x sinh t + nu tanh(nu t).
  double peak = 0.0;
  if (nu * nu > x) {
    double lo = 0.0;
    double hi = std::asinh(nu / x) + 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (-x * std::sinh(mid) + nu * std::tanh(nu * mid) > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    peak = 0.5 * (lo + hi);
  }
  const double g_max = g(peak);
  const double h = std::min(0.05, 0.25 / std::sqrt(x * std::cosh(peak) + nu * nu));

  // The integrand is even in t, so the trapezoid sum on [0, inf) is
  // h * (f(0)/2 + sum_k f(kh)).
  double sum = 0.5 * std::exp(g(0.0) - g_max);
  constexpr double kCutoff = 60.0;
  for (std::size_t k = 1; k < 50'000'000; ++k) {
    const double t = static_cast<double>(k) * h;
    const double d = g(t) - g_max;
    sum += std::exp(d);
    if (t > peak && d < -kCutoff) break;
  }
  return g_max + std::log(h * sum);
}

void GigParams::check() const {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("gig: a must be positive and finite");
  if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("gig: b must be nonnegative and finite");
  if (!std::isfinite(p)) throw DomainError("gig: p must be finite");
  if (b == 0.0 && !(p > 0.0)) throw DomainError("gig: b == 0 requires p > 0");
}

GigRegime gig_regime(const GigParams& params) {
  if (params.b < kGigSmallB * std::max(1.0, params.a) && params.p > 0.0) return GigRegime::gamma_mh;
  const double lambda = std::abs(params.p);
  const double omega = std::sqrt(params.a * params.b);
  if (lambda > 2.0 || omega > 3.0) return GigRegime::ratio_of_uniforms;
  if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) return GigRegime::ratio_of_uniforms;
  return GigRegime::small_omega;
}

double gig_log_kernel(double x, const GigParams& params) {
  if (!(x > 0.0)) return -kInf;
  return (params.p - 1.0) * std::log(x) - 0.5 * (params.a * x + params.b / x);
}

double gig_density(double x, const GigParams& params) {
  params.check();
  if (!(params.b > 0.0)) throw DomainError("gig_density: b must be positive (use the gamma density for b = 0)");
  if (!(x > 0.0)) return 0.0;
  const double omega = std::sqrt(params.a * params.b);
  const double log_norm =
      0.5 * params.p * std::log(params.a / params.b) - std::numbers::ln2 - log_bessel_k(params.p, omega);
  return std::exp(log_norm + gig_log_kernel(x, params));
}

double gig_mh_acceptance(double x_new, double x_old, const GigParams& params) {
  const double rate = 0.5 * params.a;
  const double log_ratio = gig_log_kernel(x_new, params) + gamma_log_density(x_old, params.p, rate) -
                           gig_log_kernel(x_old, params) - gamma_log_density(x_new, params.p, rate);
  if (std::isnan(log_ratio)) return 0.0;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

namespace {

// The samplers below draw from the standardized GIG with density proportional
// to x^(lambda-1) exp(-omega/2 (x + 1/x)), lambda >= 0, omega > 0.

double gig_mode(double lambda, double omega) {
  if (lambda >= 1.0) return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// Ratio-of-uniforms without mode shift (Dagpunar; Lehner).
double rou_noshift(double lambda, double omega, Rng& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
  for (std::size_t it = 0; it < kMaxRejections; ++it) {
    const double u = um * rng.uniform_open();
    const double v = rng.uniform_open();
    const double x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
  rejection_cap("gig");
}

// Ratio-of-uniforms with shift by the mode; the bounding rectangle comes from
// the roots of a cubic (Cardano).
double rou_shift(double lambda, double omega, Rng& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
  const double fi = std::acos(std::clamp(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)), -1.0, 1.0));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
  const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

  for (std::size_t it = 0; it < kMaxRejections; ++it) {
    const double u = uminus + rng.uniform_open() * (uplus - uminus);
    const double v = rng.uniform_open();
    const double x = u / v + xm;
    if (x > 0.0 && std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
  rejection_cap("gig");
}

// Gamma(lambda, omega/2) envelope, accepting with probability
// exp(-omega / (2x)). Exact; used when omega is so small that the
// ratio-of-uniforms rectangle overflows.
double gamma_envelope(double lambda, double omega, Rng& rng) {
  for (std::size_t it = 0; it < kMaxRejections; ++it) {
    const double x = sample_gamma(lambda, 0.5 * omega, rng);
    if (std::log(rng.uniform_open()) <= -0.5 * omega / x) return x;
  }
  rejection_cap("gig");
}

// Hoermann-Leydold rejection for 0 <= lambda < 1 and small omega: constant
// hat on [0, x0], x^(lambda-1) hat up to 2/omega, exponential tail beyond.
// All hat constants are divided by the density at the mode so that tiny
// omega neither overflows nor underflows.
double small_omega(double lambda, double omega, Rng& rng) {
  // Three-piece hat: constant on (0, x0], k1 x^(lambda-1) on (x0, 2/omega],
  // k2 exp(-omega x / 2) beyond. Pieces are chosen from log-areas and
  // inverted from a uniform within the piece, so no constant is formed at
  // the density's own scale.
  const double xm = gig_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double log_k0 = (lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm);
  const bool has_middle = x0 < 2.0 / omega;
  const double lo = has_middle ? 2.0 / omega : x0;
  const double log_k1 = -omega;
  const double log_k2 = (lambda - 1.0) * std::log(lo);
  const double log_x0 = std::log(x0);
  const double log_two_over_omega = std::log(2.0 / omega);

  std::array<double, 3> log_area{};
  log_area[0] = log_k0 + log_x0;
  if (!has_middle) {
    log_area[1] = -kInf;
  } else if (lambda == 0.0) {
    log_area[1] = log_k1 + std::log(log_two_over_omega - log_x0);
  } else {
    // log((2/omega)^lambda - x0^lambda) - log(lambda)
    const double a = lambda * log_two_over_omega;
    const double b = lambda * log_x0;
    log_area[1] = log_k1 + a + std::log(-std::expm1(b - a)) - std::log(lambda);
  }
  log_area[2] = log_k2 + std::log(2.0 / omega) - 0.5 * omega * lo;
  const double top = *std::max_element(log_area.begin(), log_area.end());
  std::array<double, 3> w{};
  for (std::size_t k = 0; k < 3; ++k) w[k] = std::exp(log_area[k] - top);
  const double total = w[0] + w[1] + w[2];

  for (std::size_t it = 0; it < kMaxRejections; ++it) {
    const double v = total * rng.uniform();
    const double u = rng.uniform_open();
    double x = 0.0;
    double log_h = 0.0;
    if (v < w[0]) {
      x = x0 * u;
      log_h = log_k0;
    } else if (v < w[0] + w[1]) {
      if (lambda == 0.0) {
        x = std::exp(log_x0 + u * (log_two_over_omega - log_x0));
      } else {
        const double a = std::pow(x0, lambda);
        x = std::pow(a + u * (std::pow(2.0 / omega, lambda) - a), 1.0 / lambda);
      }
      log_h = log_k1 + (lambda - 1.0) * std::log(x);
    } else {
      x = lo - 2.0 / omega * std::log1p(-u);
      log_h = log_k2 - 0.5 * omega * x;
    }
    if (!(x > 0.0) || !std::isfinite(x)) continue;
    const double log_f = (lambda - 1.0) * std::log(x) - 0.5 * omega * (x + 1.0 / x);
    if (std::log(rng.uniform_open()) + log_h <= log_f) return x;
  }
  rejection_cap("gig");
}

double sample_standard_gig(double lambda, double omega, Rng& rng, GigRegime regime) {
  if (regime == GigRegime::small_omega) return small_omega(lambda, omega, rng);
  if (lambda >= 1.0 && omega < 1e-6) return gamma_envelope(lambda, omega, rng);
  if (lambda > 2.0 || omega > 3.0) return rou_shift(lambda, omega, rng);
  return rou_noshift(lambda, omega, rng);
}

}  // namespace

GigDraw sample_gig(const GigParams& params, Rng& rng, std::optional<double> prev) {
  params.check();
  const GigRegime regime = gig_regime(params);
  if (regime == GigRegime::gamma_mh) {
    const double proposal = sample_gamma(params.p, 0.5 * params.a, rng);
    if (!prev || !(*prev > 0.0)) return {proposal, regime, true};
    const double alpha = gig_mh_acceptance(proposal, *prev, params);
    if (rng.uniform() < alpha) return {proposal, regime, true};
    return {*prev, regime, false};
  }
  const double lambda = std::abs(params.p);
  const double omega = std::sqrt(params.a * params.b);
  const double scale = std::sqrt(params.b / params.a);
  const double y = sample_standard_gig(lambda, omega, rng, regime);
  const double x = params.p < 0.0 ? scale / y : scale * y;
  if (!(x > 0.0) || !std::isfinite(x)) throw NumericError("gig: draw left (0, inf)");
  return {x, regime, true};
}

}  // namespace isovar::dist
