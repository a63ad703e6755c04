#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "isovar/mixture.hpp"
#include "isovar/observe.hpp"
#include "isovar/rng.hpp"

/// Gibbs sampler for monotone error variances
///
///   gamma^2 <= sigma_1^2 <= ... <= sigma_n^2,
///
/// parametrized by log-increments eta_1 = log sigma_1^2 and
/// eta_j = log sigma_j^2 - log sigma_{j-1}^2 (j >= 2), with priors
///
///   eta_1 | tau_1        ~ N_{>= log gamma^2}(log gamma^2, tau_1)
///   tau_1 | nu_1 ~ Ga(1, nu_1),     nu_1 ~ Ga(1/2, 1)
///   eta_j | tau_j, lambda ~ N_{>= 0}(0, lambda tau_j)
///   tau_j | nu_j ~ Ga(1/2, nu_j),   nu_j ~ Ga(1/2, 1)
///   lambda | xi  ~ Ga(1/2, xi),     xi   ~ Ga(1/2, 1).
///
/// The data enter through z_i = log r_i^2 = log sigma_i^2 + log eps_i^2, with
/// the log-chi-squared error replaced by a 10-component normal mixture and
/// per-observation labels s_i.
///
/// Indices are 0-based throughout: eta[0] is the level, eta[j] for j >= 1 are
/// the increments, and labels s[i] lie in [0, 10).
namespace isovar::gibbs {

enum class SUpdateMode {
  /// s_i drawn from its full conditional given z_i and the current path.
  posterior,
  /// s_i drawn from the mixture weights alone.
  prior,
};

struct GibbsConfig {
  std::size_t n_samples = 2500;
  std::size_t burn_in = 500;
  std::uint64_t seed = 0;
  double gamma2 = 0.0;
  SUpdateMode s_mode = SUpdateMode::posterior;
  std::size_t thinning = 1;
  bool store_eta = false;

  void check() const;
};

struct GibbsState {
  std::vector<double> eta;
  std::vector<double> tau;
  std::vector<double> nu;
  double lambda = 1.0;
  double xi = 1.0;
  std::vector<int> s;

  std::size_t size() const { return eta.size(); }
  /// Throws DomainError if a support constraint is violated.
  void check(double gamma2) const;
};

struct GigDiagnostics {
  std::size_t mh_steps = 0;
  std::size_t mh_accepted = 0;
  std::size_t small_omega_draws = 0;
  std::size_t rou_draws = 0;

  void merge(const GigDiagnostics& other);
  double mh_acceptance_rate() const;
};

/// Retained sweeps. sigma2 is row-major [rows x n].
struct PosteriorDraws {
  std::vector<double> times;
  std::size_t n = 0;
  std::size_t rows = 0;
  std::vector<double> sigma2;
  /// Same layout as sigma2; empty unless GibbsConfig::store_eta.
  std::vector<double> eta;
  std::vector<double> lambda_trace;
  GigDiagnostics gig;

  std::span<const double> row(std::size_t r) const { return {sigma2.data() + r * n, n}; }
  /// Appends the rows of another chain over the same times.
  void merge(const PosteriorDraws& other);
};

/// Cumulative sums above this are treated as a diverged chain.
inline constexpr double kMaxLogVariance = 700.0;

/// sigma_i^2 = exp(eta_1 + ... + eta_i).
std::vector<double> eta_to_sigma2(std::span<const double> eta);

/// Resamples every label. Returns labels in [0, 10).
std::vector<int> update_s(std::span<const double> z, std::span<const double> eta, const dist::MixtureTable& table,
                          SUpdateMode mode, Rng& rng);

/// Likelihood-side moments of one increment given the labels: the normal
/// N(mean, var) that the mixture likelihood alone implies for eta_j.
struct DataMoments {
  double mean = 0.0;
  double var = 0.0;
};

struct TruncatedNormal {
  double mean = 0.0;
  double var = 0.0;
  double lower = 0.0;
};

/// Direct O(n) evaluation for eta_1 (j = 0).
DataMoments eta1_data_moments(std::span<const double> z, std::span<const int> s, std::span<const double> eta,
                              const dist::MixtureTable& table);

/// Direct O(n) evaluation for increment j >= 1.
DataMoments etaj_data_moments(std::size_t j, std::span<const double> z, std::span<const int> s,
                              std::span<const double> eta, const dist::MixtureTable& table);

/// Conjugate combination with the N_{>= log gamma^2}(log gamma^2, tau_1) prior.
TruncatedNormal eta1_conditional(const DataMoments& data, double tau1, double gamma2);

/// Conjugate combination with the N_{>= 0}(0, prior_var) prior,
/// prior_var = lambda * tau_j.
TruncatedNormal etaj_conditional(const DataMoments& data, double prior_var);

/// Truncated normal draw; a zero variance collapses to max(mean, lower).
double draw(const TruncatedNormal& dist, Rng& rng);

/// Walks j = 0, 1, ..., n-1 maintaining
///   k_{i,j} = z_i - m_{s_i} - sum_{l <= i, l != j} eta_l    (i >= j)
/// through k_{i,j} = k_{i,j-1} - eta_{j-1} + eta_j, and the suffix
/// precisions sum_{i >= j} 1 / v_{s_i}^2 through a backward recursion.
/// One pass costs O(n^2).
class EtaRecursion {
 public:
  EtaRecursion(std::span<const double> z, std::span<const int> s, std::span<const double> eta,
               const dist::MixtureTable& table);

  std::size_t index() const { return j_; }
  DataMoments moments() const;
  /// Moves to j + 1 using the current eta (eta[j] may have been redrawn).
  void advance(std::span<const double> eta);
  double k(std::size_t i) const { return k_[i]; }
  double suffix_precision() const { return suffix_[j_]; }

 private:
  std::vector<double> k_;
  std::vector<double> precision_;
  std::vector<double> suffix_;
  std::size_t j_ = 0;
};

double update_eta1(std::span<const double> z, std::span<const int> s, std::span<const double> eta, double tau1,
                   double gamma2, const dist::MixtureTable& table, Rng& rng);

double update_eta_j(std::size_t j, std::span<const double> z, std::span<const int> s, std::span<const double> eta,
                    double tau_j, double lambda, const dist::MixtureTable& table, Rng& rng);

/// Redraws eta_1 then eta_2..eta_n in order, in place.
void sweep_eta(std::span<const double> z, GibbsState& state, double gamma2, const dist::MixtureTable& table,
               Rng& rng);

/// Smallest b passed to the tau_j and lambda GIG draws (p <= 0 there, so b = 0
/// would be improper).
inline constexpr double kMinGigB = 1e-300;

double update_nu1(double tau1, Rng& rng);
double update_tau1(double eta1, double nu1, double gamma2, double tau1_prev, Rng& rng,
                   GigDiagnostics* diag = nullptr);
double update_nu_j(double tau_j, Rng& rng);
double update_tau_j(double eta_j, double nu_j, double lambda, double tau_j_prev, Rng& rng,
                    GigDiagnostics* diag = nullptr);
double update_xi(double lambda, Rng& rng);
/// GIG(2 xi, sum_{j>=2} eta_j^2 / tau_j, (2 - n) / 2).
double update_lambda(std::span<const double> eta, std::span<const double> tau, double xi, double lambda_prev,
                     Rng& rng, GigDiagnostics* diag = nullptr);

/// nu_1, tau_1, nu_j, tau_j, xi, lambda in that order.
void update_hyperparams(GibbsState& state, double gamma2, Rng& rng, GigDiagnostics* diag = nullptr);

/// eta_1 = max(log gamma^2, log mean r^2), eta_j = 1e-3, tau = nu = 1,
/// lambda = xi = 1, labels from the mixture weights.
GibbsState initial_state(const observation::ResidualSeries& resid, double gamma2, const dist::MixtureTable& table,
                         Rng& rng);

/// One full sweep in the order s, eta_1, eta_j, nu_1, tau_1, nu_j, tau_j,
/// xi, lambda.
void gibbs_sweep(std::span<const double> z, GibbsState& state, double gamma2, SUpdateMode mode,
                 const dist::MixtureTable& table, Rng& rng, GigDiagnostics* diag = nullptr);

/// Runs one chain on the stream Rng(config.seed, chain).
PosteriorDraws run_gibbs(const observation::ResidualSeries& resid, const GibbsConfig& config,
                         std::uint64_t chain = 0);

/// Runs `chains` independent chains concurrently and merges them in chain
/// order.
PosteriorDraws run_chains(const observation::ResidualSeries& resid, const GibbsConfig& config,
                          std::size_t chains);

}  // namespace isovar::gibbs
