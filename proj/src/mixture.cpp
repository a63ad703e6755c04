#include "isovar/mixture.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "isovar/error.hpp"

namespace isovar::dist {

void MixtureTable::check() const {
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw DomainError("mixture: weights must be positive");
    if (!(c.variance > 0.0)) throw DomainError("mixture: variances must be positive");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("mixture: weights must sum to 1");
}

double MixtureTable::mean() const {
  double m = 0.0;
  for (const auto& c : components) m += c.weight * c.mean;
  return m;
}

double MixtureTable::second_moment() const {
  double m2 = 0.0;
  for (const auto& c : components) m2 += c.weight * (c.variance + c.mean * c.mean);
  return m2;
}

const MixtureTable& log_chi2_mixture() {
  static const MixtureTable table{{{
      {0.00609, 1.92677, 0.11265},
      {0.04775, 1.34744, 0.17788},
      {0.13057, 0.73504, 0.26768},
      {0.20674, 0.02266, 0.40611},
      {0.22715, -0.85173, 0.62699},
      {0.18842, -1.97278, 0.98583},
      {0.12047, -3.46788, 1.57469},
      {0.05591, -5.55246, 2.54498},
      {0.01575, -8.68384, 4.16591},
      {0.00115, -14.65000, 7.33342},
  }}};
  return table;
}

double mixture_density(double eps, const MixtureTable& table) {
  double g = 0.0;
  for (const auto& c : table.components) {
    const double d = eps - c.mean;
    g += c.weight * std::exp(-0.5 * d * d / c.variance) / std::sqrt(2.0 * std::numbers::pi * c.variance);
  }
  return g;
}

void dump_table(std::ostream& os, const MixtureTable& table) {
  os << "k weight mean variance\n";
  char line[128];
  for (std::size_t k = 0; k < table.size(); ++k) {
    const auto& c = table[k];
    std::snprintf(line, sizeof line, "%zu %.5f %.5f %.5f\n", k + 1, c.weight, c.mean, c.variance);
    os << line;
  }
}

}  // namespace isovar::dist
