#include "isovar/baseline.hpp"

#include <algorithm>

#include "isovar/error.hpp"

namespace isovar::baseline {

std::vector<double> pava(std::span<const double> y) {
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  blocks.reserve(y.size());
  for (double v : y) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      const Block top = blocks.back();
      blocks.pop_back();
      blocks.back().sum += top.sum;
      blocks.back().count += top.count;
    }
  }
  std::vector<double> fit;
  fit.reserve(y.size());
  for (const Block& b : blocks) fit.insert(fit.end(), b.count, b.mean());
  return fit;
}

MlEstimate isotonic_mle(const observation::ResidualSeries& resid) {
  if (resid.size() == 0) throw DomainError("isotonic_mle: empty residual series");
  std::vector<double> r2(resid.size());
  std::transform(resid.residuals.begin(), resid.residuals.end(), r2.begin(), [](double r) { return r * r; });
  MlEstimate out{resid.times, pava(r2)};
  for (double& v : out.sigma2_hat) v = std::max(v, resid.noise_var);
  return out;
}

}  // namespace isovar::baseline
