#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>

namespace isovar::dist {

struct MixtureComponent {
  double weight;
  double mean;
  double variance;
};

/// Ten-component normal mixture approximating the log-chi-squared(1) law.
struct MixtureTable {
  static constexpr std::size_t kSize = 10;
  std::array<MixtureComponent, kSize> components;

  const MixtureComponent& operator[](std::size_t k) const { return components[k]; }
  std::size_t size() const { return kSize; }

  /// Weights positive and summing to 1 within 1e-9, variances positive.
  void check() const;
  double mean() const;
  /// E[eps^2] under the mixture.
  double second_moment() const;
};

/// Moment-matched constants (Omori, Chib, Shephard and Nakajima, 2007).
const MixtureTable& log_chi2_mixture();

/// sum_k w_k N(eps; m_k, v_k^2).
double mixture_density(double eps, const MixtureTable& table);

/// Writes "k weight mean variance" rows, 1-based k.
void dump_table(std::ostream& os, const MixtureTable& table);

}  // namespace isovar::dist
