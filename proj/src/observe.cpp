#include "isovar/observe.hpp"

#include <cmath>

#include "isovar/error.hpp"
#include "isovar/rng.hpp"

namespace isovar::observation {

ObservationOperator ObservationOperator::component(std::size_t index) {
  ObservationOperator op;
  op.kind_ = Kind::component;
  op.index_ = index;
  op.description_ = "component " + std::to_string(index);
  return op;
}

ObservationOperator ObservationOperator::velocity_magnitude() {
  ObservationOperator op;
  op.kind_ = Kind::velocity_magnitude;
  op.description_ = "velocity magnitude";
  return op;
}

ObservationOperator ObservationOperator::custom(std::string description,
                                                std::function<double(const ode::State&)> map) {
  ObservationOperator op;
  op.kind_ = Kind::custom;
  op.description_ = std::move(description);
  op.map_ = std::move(map);
  return op;
}

double ObservationOperator::operator()(const ode::State& x) const {
  switch (kind_) {
    case Kind::component:
      if (index_ >= x.size()) throw DomainError("observation: component index out of range");
      return x[index_];
    case Kind::velocity_magnitude: {
      if (x.size() % 2 != 0) throw DomainError("observation: velocity magnitude needs a (q, p) state");
      double s = 0.0;
      for (std::size_t i = x.size() / 2; i < x.size(); ++i) s += x[i] * x[i];
      return std::sqrt(s);
    }
    case Kind::custom:
      return map_(x);
  }
  return 0.0;
}

double log_square(double r) { return std::log(std::max(r * r, kResidualSquareFloor)); }

std::vector<double> time_range(double start, double end, double dt) {
  if (!(dt > 0.0)) throw DomainError("time_range: interval must be positive");
  if (end < start) throw DomainError("time_range: end before start");
  const auto n = static_cast<std::size_t>(std::floor((end - start) / dt + 1e-9)) + 1;
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = start + static_cast<double>(k) * dt;
  return t;
}

ObservationSeries observe(const ode::TrajectoryGrid& traj, const ObservationOperator& op,
                          const std::vector<double>& times, double gamma2, std::uint64_t seed) {
  if (!(gamma2 >= 0.0)) throw DomainError("observe: noise variance must be nonnegative");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw DomainError("observe: times must be strictly increasing");
  Rng rng(seed);
  const double sd = std::sqrt(gamma2);
  ObservationSeries obs{times, std::vector<double>(times.size()), gamma2};
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double noise = rng.normal();
    obs.values[i] = op(ode::sample_at(traj, times[i])) + sd * noise;
  }
  return obs;
}

ResidualSeries residuals(const ObservationSeries& obs, const ode::TrajectoryGrid& numeric,
                         const ObservationOperator& op) {
  if (obs.times.size() != obs.values.size()) throw DomainError("residuals: times/values length mismatch");
  std::vector<double> r(obs.times.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = obs.values[i] - op(ode::sample_at(numeric, obs.times[i]));
  return make_residuals(obs.times, std::move(r), obs.noise_var);
}

ResidualSeries make_residuals(std::vector<double> times, std::vector<double> residuals, double noise_var) {
  if (times.size() != residuals.size()) throw DomainError("residuals: times/residuals length mismatch");
  ResidualSeries out;
  out.log_squares.resize(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) out.log_squares[i] = log_square(residuals[i]);
  out.times = std::move(times);
  out.residuals = std::move(residuals);
  out.noise_var = noise_var;
  return out;
}

}  // namespace isovar::observation
