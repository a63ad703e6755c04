#include "isovar/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "isovar/error.hpp"

namespace isovar::posterior {

std::string_view target_name(Target target) {
  switch (target) {
    case Target::sigma:
      return "sigma";
    case Target::error_sd:
      return "error_sd";
    case Target::abs_residual:
      return "abs_residual";
    case Target::abs_error:
      return "abs_error";
  }
  return "unknown";
}

std::size_t nearest_rank(double q, std::size_t count) {
  if (count == 0) throw DomainError("nearest_rank: empty sample");
  const double x = q * static_cast<double>(count);
  auto rank = static_cast<std::size_t>(std::max(0.0, std::ceil(x - 1e-9)));
  return std::clamp<std::size_t>(rank, 1, count);
}

namespace {

void check_inputs(const gibbs::PosteriorDraws& draws, double level) {
  if (draws.rows == 0 || draws.n == 0) throw DomainError("summary: no draws");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("summary: level must lie in (0, 1)");
}

// Summarizes values[r * n + i] column by column. With `fold` the values are
// signed draws and the summary is of their absolute value: the central
// interval of the signed draws mapped through |.|.
SummarySeries summarize_columns(const gibbs::PosteriorDraws& draws, std::vector<double> values, double level,
                                Target target, bool fold = false) {
  const std::size_t n = draws.n;
  const std::size_t rows = draws.rows;
  SummarySeries out;
  out.times = draws.times;
  if (out.times.size() != n) out.times.assign(n, 0.0);
  out.mean.resize(n);
  out.lower.resize(n);
  out.upper.resize(n);
  out.level = level;
  out.target = target;

  const double tail = 0.5 * (1.0 - level);
  const std::size_t lo_rank = nearest_rank(tail, rows);
  const std::size_t hi_rank = nearest_rank(1.0 - tail, rows);
  std::vector<double> column(rows);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < rows; ++r) column[r] = values[r * n + i];
    std::sort(column.begin(), column.end());
    double sum = 0.0;
    for (double v : column) sum += fold ? std::abs(v) : v;
    out.mean[i] = sum / static_cast<double>(rows);
    const double lo = column[lo_rank - 1];
    const double hi = column[hi_rank - 1];
    if (!fold) {
      out.lower[i] = lo;
      out.upper[i] = hi;
    } else {
      out.lower[i] = lo <= 0.0 && hi >= 0.0 ? 0.0 : std::min(std::abs(lo), std::abs(hi));
      out.upper[i] = std::max(std::abs(lo), std::abs(hi));
    }
  }
  return out;
}

SummarySeries summarize_transform(const gibbs::PosteriorDraws& draws, double level, Target target,
                                  const std::function<double(double)>& transform) {
  check_inputs(draws, level);
  std::vector<double> values(draws.sigma2.size());
  std::transform(draws.sigma2.begin(), draws.sigma2.end(), values.begin(), transform);
  return summarize_columns(draws, std::move(values), level, target);
}

}  // namespace

SummarySeries summarize_sigma(const gibbs::PosteriorDraws& draws, double level) {
  return summarize_transform(draws, level, Target::sigma, [](double s2) { return std::sqrt(s2); });
}

SummarySeries summarize_error_sd(const gibbs::PosteriorDraws& draws, double gamma2, double level) {
  return summarize_transform(draws, level, Target::error_sd,
                             [gamma2](double s2) { return std::sqrt(std::max(s2 - gamma2, 0.0)); });
}

SummarySeries predictive_abs(const gibbs::PosteriorDraws& draws, double gamma2, Target target, double level,
                             Rng& rng) {
  check_inputs(draws, level);
  if (target != Target::abs_residual && target != Target::abs_error)
    throw DomainError("predictive_abs: target must be abs_residual or abs_error");
  const double offset = target == Target::abs_error ? gamma2 : 0.0;
  std::vector<double> values(draws.sigma2.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double sd = std::sqrt(std::max(draws.sigma2[k] - offset, 0.0));
    values[k] = sd * rng.normal();
  }
  return summarize_columns(draws, std::move(values), level, target, true);
}

double coverage_check(const SummarySeries& summary, std::span<const double> truth) {
  if (truth.size() != summary.size() || summary.lower.size() != summary.size() ||
      summary.upper.size() != summary.size())
    throw DomainError("coverage_check: length mismatch");
  if (truth.empty()) throw DomainError("coverage_check: empty series");
  std::size_t inside = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (summary.lower[i] <= truth[i] && truth[i] <= summary.upper[i]) ++inside;
  return static_cast<double>(inside) / static_cast<double>(truth.size());
}

}  // namespace isovar::posterior
