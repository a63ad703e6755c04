#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "isovar/ode.hpp"

namespace isovar::observation {

/// Scalar observation operator O: state -> R.
class ObservationOperator {
 public:
  enum class Kind { component, velocity_magnitude, custom };

  static ObservationOperator component(std::size_t index);
  /// Euclidean norm of the momentum half of a (q, p) state.
  static ObservationOperator velocity_magnitude();
  static ObservationOperator custom(std::string description, std::function<double(const ode::State&)> map);

  double operator()(const ode::State& x) const;

  Kind kind() const { return kind_; }
  std::size_t index() const { return index_; }
  const std::string& description() const { return description_; }

 private:
  Kind kind_ = Kind::component;
  std::size_t index_ = 0;
  std::string description_;
  std::function<double(const ode::State&)> map_;
};

struct ObservationSeries {
  std::vector<double> times;
  std::vector<double> values;
  double noise_var = 0.0;
};

/// Residuals r_i = v_i - O(x_i) and their log-squares z_i = log r_i^2.
struct ResidualSeries {
  std::vector<double> times;
  std::vector<double> residuals;
  std::vector<double> log_squares;
  double noise_var = 0.0;

  std::size_t size() const { return residuals.size(); }
};

/// r^2 is floored here before the log so exact zeros stay finite.
inline constexpr double kResidualSquareFloor = 1e-300;

double log_square(double r);

/// start, start + dt, ... up to end (inclusive within rounding).
std::vector<double> time_range(double start, double end, double dt);

/// v_i = O(x(t_i)) + e_i with e_i ~ N(0, gamma2), one normal draw per time in
/// order from a generator seeded with `seed`.
ObservationSeries observe(const ode::TrajectoryGrid& traj, const ObservationOperator& op,
                          const std::vector<double>& times, double gamma2, std::uint64_t seed);

ResidualSeries residuals(const ObservationSeries& obs, const ode::TrajectoryGrid& numeric,
                         const ObservationOperator& op);

/// Builds a residual series from raw residuals (e.g. read from disk).
ResidualSeries make_residuals(std::vector<double> times, std::vector<double> residuals, double noise_var);

}  // namespace isovar::observation
