#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "isovar/gibbs.hpp"
#include "isovar/rng.hpp"

namespace isovar::posterior {

enum class Target { sigma, error_sd, abs_residual, abs_error };

std::string_view target_name(Target target);

/// Per-index mean and central credible interval.
struct SummarySeries {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
  double level = 0.95;
  Target target = Target::sigma;

  std::size_t size() const { return times.size(); }
};

/// 1-based nearest rank ceil(q * count), clamped to [1, count].
std::size_t nearest_rank(double q, std::size_t count);

/// Mean and nearest-rank central interval of sigma_i = sqrt(sigma_i^2).
SummarySeries summarize_sigma(const gibbs::PosteriorDraws& draws, double level);

/// Same for sqrt(max(sigma_i^2 - gamma^2, 0)).
SummarySeries summarize_error_sd(const gibbs::PosteriorDraws& draws, double gamma2, double level);

/// One normal draw per retained row and index, N(0, sigma_i^2) for
/// abs_residual or N(0, sigma_i^2 - gamma^2) for abs_error. The mean is the
/// mean absolute value; the band is the central `level` interval of the
/// signed draws folded through |.|, i.e. [0, max(|lower|, |upper|)] when it
/// straddles zero. The standard normals are consumed row by row, index by
/// index, so both targets see the same noise for the same rng state.
SummarySeries predictive_abs(const gibbs::PosteriorDraws& draws, double gamma2, Target target, double level,
                             Rng& rng);

/// Fraction of indices with lower_i <= truth_i <= upper_i.
double coverage_check(const SummarySeries& summary, std::span<const double> truth);

}  // namespace isovar::posterior
