#include "isovar/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "isovar/dist.hpp"
#include "isovar/error.hpp"

namespace isovar::gibbs {

void GibbsConfig::check() const {
  if (n_samples == 0) throw DomainError("gibbs: n_samples must be positive");
  if (thinning == 0) throw DomainError("gibbs: thinning must be positive");
  if (!(gamma2 > 0.0) || !std::isfinite(gamma2)) throw DomainError("gibbs: gamma2 must be positive");
}

void GibbsState::check(double gamma2) const {
  const std::size_t n = eta.size();
  if (n == 0) throw DomainError("state: empty");
  if (tau.size() != n || nu.size() != n || s.size() != n) throw DomainError("state: inconsistent sizes");
  if (!(eta[0] >= std::log(gamma2))) throw DomainError("state: eta_1 below log gamma^2");
  for (std::size_t j = 1; j < n; ++j)
    if (!(eta[j] >= 0.0)) throw DomainError("state: negative increment eta_" + std::to_string(j + 1));
  for (std::size_t j = 0; j < n; ++j) {
    if (!(tau[j] > 0.0) || !(nu[j] > 0.0)) throw DomainError("state: tau and nu must be positive");
    if (s[j] < 0 || s[j] >= static_cast<int>(dist::MixtureTable::kSize)) throw DomainError("state: label out of range");
  }
  if (!(lambda > 0.0) || !(xi > 0.0)) throw DomainError("state: lambda and xi must be positive");
}

void GigDiagnostics::merge(const GigDiagnostics& other) {
  mh_steps += other.mh_steps;
  mh_accepted += other.mh_accepted;
  small_omega_draws += other.small_omega_draws;
  rou_draws += other.rou_draws;
}

double GigDiagnostics::mh_acceptance_rate() const {
  return mh_steps == 0 ? 1.0 : static_cast<double>(mh_accepted) / static_cast<double>(mh_steps);
}

void PosteriorDraws::merge(const PosteriorDraws& other) {
  if (rows == 0 && n == 0) {
    *this = other;
    return;
  }
  if (other.n != n || other.times != times) throw DomainError("draws: cannot merge chains over different times");
  sigma2.insert(sigma2.end(), other.sigma2.begin(), other.sigma2.end());
  eta.insert(eta.end(), other.eta.begin(), other.eta.end());
  lambda_trace.insert(lambda_trace.end(), other.lambda_trace.begin(), other.lambda_trace.end());
  rows += other.rows;
  gig.merge(other.gig);
}

std::vector<double> eta_to_sigma2(std::span<const double> eta) {
  std::vector<double> out(eta.size());
  double cum = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    cum += eta[i];
    if (!(cum <= kMaxLogVariance)) throw NumericError("divergence: log variance exceeded the overflow guard");
    out[i] = std::exp(cum);
  }
  return out;
}

std::vector<int> update_s(std::span<const double> z, std::span<const double> eta, const dist::MixtureTable& table,
                          SUpdateMode mode, Rng& rng) {
  if (z.size() != eta.size()) throw DomainError("update_s: z and eta lengths differ");
  constexpr std::size_t K = dist::MixtureTable::kSize;
  std::vector<int> s(z.size());
  std::array<double, K> logp{};
  double level = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    level += eta[i];
    if (mode == SUpdateMode::prior) {
      for (std::size_t k = 0; k < K; ++k) logp[k] = std::log(table[k].weight);
    } else {
      const double resid = z[i] - level;
      for (std::size_t k = 0; k < K; ++k) {
        const double d = resid - table[k].mean;
        logp[k] = std::log(table[k].weight) - 0.5 * std::log(table[k].variance) - 0.5 * d * d / table[k].variance;
      }
    }
    const double top = *std::max_element(logp.begin(), logp.end());
    std::array<double, K> cdf{};
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      total += std::exp(logp[k] - top);
      cdf[k] = total;
    }
    const double u = rng.uniform() * total;
    std::size_t k = 0;
    while (k + 1 < K && u >= cdf[k]) ++k;
    s[i] = static_cast<int>(k);
  }
  return s;
}

namespace {

void check_sizes(std::span<const double> z, std::span<const int> s, std::span<const double> eta) {
  if (z.size() != s.size() || z.size() != eta.size() || z.empty())
    throw DomainError("gibbs: z, s and eta must have the same nonzero length");
}

}  // namespace

DataMoments eta1_data_moments(std::span<const double> z, std::span<const int> s, std::span<const double> eta,
                              const dist::MixtureTable& table) {
  return etaj_data_moments(0, z, s, eta, table);
}

DataMoments etaj_data_moments(std::size_t j, std::span<const double> z, std::span<const int> s,
                              std::span<const double> eta, const dist::MixtureTable& table) {
  check_sizes(z, s, eta);
  if (j >= z.size()) throw DomainError("gibbs: increment index out of range");
  double others = 0.0;  // sum_{l <= i, l != j} eta_l
  for (std::size_t l = 0; l < j; ++l) others += eta[l];
  double precision = 0.0;
  double weighted = 0.0;
  for (std::size_t i = j; i < z.size(); ++i) {
    if (i > j) others += eta[i];
    const auto& c = table[static_cast<std::size_t>(s[i])];
    const double k = z[i] - c.mean - others;
    precision += 1.0 / c.variance;
    weighted += k / c.variance;
  }
  return {weighted / precision, 1.0 / precision};
}

TruncatedNormal eta1_conditional(const DataMoments& data, double tau1, double gamma2) {
  const double log_gamma2 = std::log(gamma2);
  const double denom = data.var + tau1;
  return {(tau1 * data.mean + data.var * log_gamma2) / denom, data.var * tau1 / denom, log_gamma2};
}

TruncatedNormal etaj_conditional(const DataMoments& data, double prior_var) {
  const double denom = data.var + prior_var;
  return {prior_var * data.mean / denom, data.var * prior_var / denom, 0.0};
}

double draw(const TruncatedNormal& d, Rng& rng) {
  if (!(d.var > 0.0) || !std::isfinite(d.mean)) return std::max(d.mean, d.lower);
  return dist::sample_truncnorm_lower(d.mean, d.var, d.lower, rng);
}

EtaRecursion::EtaRecursion(std::span<const double> z, std::span<const int> s, std::span<const double> eta,
                           const dist::MixtureTable& table)
    : k_(z.size()), precision_(z.size()), suffix_(z.size() + 1, 0.0) {
  check_sizes(z, s, eta);
  double increments = 0.0;  // eta_2 + ... + eta_i
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (i > 0) increments += eta[i];
    const auto& c = table[static_cast<std::size_t>(s[i])];
    k_[i] = z[i] - c.mean - increments;
    precision_[i] = 1.0 / c.variance;
  }
  for (std::size_t i = z.size(); i-- > 0;) suffix_[i] = suffix_[i + 1] + precision_[i];
}

DataMoments EtaRecursion::moments() const {
  double weighted = 0.0;
  for (std::size_t i = j_; i < k_.size(); ++i) weighted += k_[i] * precision_[i];
  return {weighted / suffix_[j_], 1.0 / suffix_[j_]};
}

void EtaRecursion::advance(std::span<const double> eta) {
  if (j_ + 1 >= k_.size()) throw DomainError("EtaRecursion: advanced past the last increment");
  const double shift = eta[j_ + 1] - eta[j_];
  ++j_;
  for (std::size_t i = j_; i < k_.size(); ++i) k_[i] += shift;
}

double update_eta1(std::span<const double> z, std::span<const int> s, std::span<const double> eta, double tau1,
                   double gamma2, const dist::MixtureTable& table, Rng& rng) {
  return draw(eta1_conditional(eta1_data_moments(z, s, eta, table), tau1, gamma2), rng);
}

double update_eta_j(std::size_t j, std::span<const double> z, std::span<const int> s, std::span<const double> eta,
                    double tau_j, double lambda, const dist::MixtureTable& table, Rng& rng) {
  if (j == 0) throw DomainError("update_eta_j: j must be an increment index (>= 1)");
  return draw(etaj_conditional(etaj_data_moments(j, z, s, eta, table), lambda * tau_j), rng);
}

void sweep_eta(std::span<const double> z, GibbsState& state, double gamma2, const dist::MixtureTable& table,
               Rng& rng) {
  std::vector<double>& eta = state.eta;
  EtaRecursion rec(z, state.s, eta, table);
  eta[0] = draw(eta1_conditional(rec.moments(), state.tau[0], gamma2), rng);
  for (std::size_t j = 1; j < eta.size(); ++j) {
    rec.advance(eta);
    eta[j] = draw(etaj_conditional(rec.moments(), state.lambda * state.tau[j]), rng);
  }
}

namespace {

double gig_step(const dist::GigParams& params, double prev, Rng& rng, GigDiagnostics* diag) {
  const dist::GigDraw d = dist::sample_gig(params, rng, prev);
  if (diag != nullptr) {
    switch (d.regime) {
      case dist::GigRegime::gamma_mh:
        ++diag->mh_steps;
        if (d.accepted) ++diag->mh_accepted;
        break;
      case dist::GigRegime::small_omega:
        ++diag->small_omega_draws;
        break;
      case dist::GigRegime::ratio_of_uniforms:
        ++diag->rou_draws;
        break;
    }
  }
  return d.value;
}

}  // namespace

double update_nu1(double tau1, Rng& rng) { return dist::sample_gamma(1.5, 1.0 + tau1, rng); }

double update_tau1(double eta1, double nu1, double gamma2, double tau1_prev, Rng& rng, GigDiagnostics* diag) {
  const double d = eta1 - std::log(gamma2);
  return gig_step({2.0 * nu1, d * d, 0.5}, tau1_prev, rng, diag);
}

double update_nu_j(double tau_j, Rng& rng) { return dist::sample_gamma(1.0, 1.0 + tau_j, rng); }

double update_tau_j(double eta_j, double nu_j, double lambda, double tau_j_prev, Rng& rng, GigDiagnostics* diag) {
  const double b = std::max(eta_j * eta_j / lambda, kMinGigB);
  return gig_step({2.0 * nu_j, b, 0.0}, tau_j_prev, rng, diag);
}

double update_xi(double lambda, Rng& rng) { return dist::sample_gamma(1.0, 1.0 + lambda, rng); }

double update_lambda(std::span<const double> eta, std::span<const double> tau, double xi, double lambda_prev,
                     Rng& rng, GigDiagnostics* diag) {
  const std::size_t n = eta.size();
  double b = 0.0;
  for (std::size_t j = 1; j < n; ++j) b += eta[j] * eta[j] / tau[j];
  if (!std::isfinite(b)) throw NumericError("divergence: lambda conditional has infinite scale");
  const double p = (2.0 - static_cast<double>(n)) / 2.0;
  if (n > 1) b = std::max(b, kMinGigB);
  return gig_step({2.0 * xi, b, p}, lambda_prev, rng, diag);
}

void update_hyperparams(GibbsState& st, double gamma2, Rng& rng, GigDiagnostics* diag) {
  const std::size_t n = st.size();
  st.nu[0] = update_nu1(st.tau[0], rng);
  st.tau[0] = update_tau1(st.eta[0], st.nu[0], gamma2, st.tau[0], rng, diag);
  for (std::size_t j = 1; j < n; ++j) st.nu[j] = update_nu_j(st.tau[j], rng);
  for (std::size_t j = 1; j < n; ++j) st.tau[j] = update_tau_j(st.eta[j], st.nu[j], st.lambda, st.tau[j], rng, diag);
  st.xi = update_xi(st.lambda, rng);
  st.lambda = update_lambda(st.eta, st.tau, st.xi, st.lambda, rng, diag);
}

GibbsState initial_state(const observation::ResidualSeries& resid, double gamma2, const dist::MixtureTable& table,
                         Rng& rng) {
  const std::size_t n = resid.size();
  if (n == 0) throw DomainError("gibbs: empty residual series");
  double mean_sq = 0.0;
  for (double r : resid.residuals) mean_sq += r * r;
  mean_sq /= static_cast<double>(n);

  GibbsState st;
  st.eta.assign(n, 1e-3);
  st.eta[0] = mean_sq > 0.0 ? std::max(std::log(gamma2), std::log(mean_sq)) : std::log(gamma2);
  st.tau.assign(n, 1.0);
  st.nu.assign(n, 1.0);
  st.lambda = 1.0;
  st.xi = 1.0;
  st.s = update_s(resid.log_squares, st.eta, table, SUpdateMode::prior, rng);
  return st;
}

void gibbs_sweep(std::span<const double> z, GibbsState& state, double gamma2, SUpdateMode mode,
                 const dist::MixtureTable& table, Rng& rng, GigDiagnostics* diag) {
  state.s = update_s(z, state.eta, table, mode, rng);
  sweep_eta(z, state, gamma2, table, rng);
  update_hyperparams(state, gamma2, rng, diag);
}

PosteriorDraws run_gibbs(const observation::ResidualSeries& resid, const GibbsConfig& config, std::uint64_t chain) {
  config.check();
  const std::size_t n = resid.size();
  if (n == 0) throw DomainError("gibbs: empty residual series");
  if (resid.log_squares.size() != n) throw DomainError("gibbs: residual series is inconsistent");
  const dist::MixtureTable& table = dist::log_chi2_mixture();
  Rng rng(config.seed, chain);

  PosteriorDraws out;
  out.times = resid.times;
  out.n = n;
  out.sigma2.reserve(config.n_samples * n);
  out.lambda_trace.reserve(config.n_samples);
  if (config.store_eta) out.eta.reserve(config.n_samples * n);

  GibbsState state = initial_state(resid, config.gamma2, table, rng);
  const std::size_t total = config.burn_in + config.n_samples * config.thinning;
  for (std::size_t sweep = 1; sweep <= total; ++sweep) {
    std::vector<double> sigma2;
    try {
      gibbs_sweep(resid.log_squares, state, config.gamma2, config.s_mode, table, rng, &out.gig);
      sigma2 = eta_to_sigma2(state.eta);
    } catch (const NumericError& e) {
      throw NumericError("sweep " + std::to_string(sweep) + ": " + e.what());
    }
    if (sweep <= config.burn_in || (sweep - config.burn_in) % config.thinning != 0) continue;
    // exp of cumulative sums can round below gamma^2 or out of order only at
    // the last ulp; pin the retained path to the constraint.
    sigma2[0] = std::max(sigma2[0], config.gamma2);
    for (std::size_t i = 1; i < n; ++i) sigma2[i] = std::max(sigma2[i], sigma2[i - 1]);
    out.sigma2.insert(out.sigma2.end(), sigma2.begin(), sigma2.end());
    if (config.store_eta) out.eta.insert(out.eta.end(), state.eta.begin(), state.eta.end());
    out.lambda_trace.push_back(state.lambda);
    ++out.rows;
  }
  return out;
}

PosteriorDraws run_chains(const observation::ResidualSeries& resid, const GibbsConfig& config,
                          std::size_t chains) {
  if (chains == 0) throw DomainError("gibbs: chains must be positive");
  if (chains == 1) return run_gibbs(resid, config, 0);
  std::vector<PosteriorDraws> results(chains);
  std::vector<std::exception_ptr> errors(chains);
  {
    std::vector<std::jthread> workers;
    workers.reserve(chains);
    for (std::size_t c = 0; c < chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          results[c] = run_gibbs(resid, config, c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  PosteriorDraws merged;
  for (const auto& r : results) merged.merge(r);
  return merged;
}

}  // namespace isovar::gibbs
