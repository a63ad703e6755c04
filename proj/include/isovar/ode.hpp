#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace isovar::ode {

using State = std::vector<double>;
using VectorField = std::function<State(const State&)>;

/// Autonomous ODE dx/dt = f(x).
///
/// When `hamiltonian_split` is set the state is laid out as (q, p) with equal
/// halves, dq/dt depends only on p and dp/dt only on q.
struct OdeModel {
  std::size_t dimension = 0;
  VectorField vector_field;
  std::string name;
  bool hamiltonian_split = false;

  /// Evaluates f and checks the output dimension.
  State operator()(const State& x) const;
};

/// Time grid with one state per time.
struct TrajectoryGrid {
  std::vector<double> times;
  std::vector<State> states;

  std::size_t size() const { return times.size(); }
  std::size_t dimension() const { return states.empty() ? 0 : states.front().size(); }
  void check() const;
};

/// FitzHugh-Nagumo parameters; state is (V, R).
struct FnParams {
  double a = 0.2;
  double b = 0.2;
  double c = 3.0;

  bool operator==(const FnParams&) const = default;
};

/// Kepler problem with semi-major axis 1; the initial state sits at
/// pericentre.
struct KeplerParams {
  double e = 0.6;

  bool operator==(const KeplerParams&) const = default;
};

inline constexpr double kKeplerSingularRadius2 = 1e-12;

State fn_vector_field(const FnParams& params, const State& state);

/// Throws NumericError when |q|^2 < singular_radius2.
State kepler_vector_field(const State& state, double singular_radius2 = kKeplerSingularRadius2);

OdeModel fn_model(const FnParams& params);
OdeModel kepler_model(double singular_radius2 = kKeplerSingularRadius2);
/// dq/dt = p, dp/dt = -q.
OdeModel harmonic_oscillator_model();

State fn_initial_state();
State kepler_initial_state(const KeplerParams& params);

TrajectoryGrid integrate_explicit_euler(const OdeModel& model, const State& x0, double t0, double h,
                                        std::size_t n_steps);

/// Momentum first with the force at the old position, then position with the
/// new momentum.
TrajectoryGrid integrate_symplectic_euler(const OdeModel& model, const State& x0, double t0, double h,
                                          std::size_t n_steps);

struct ReferenceOptions {
  double abstol = 1e-8;
  double reltol = 1e-8;
  /// Spacing of the stored output grid. The adaptive integrator lands on
  /// every output node exactly.
  double output_step = 0.02;
  double initial_step = 1e-3;
  /// Steps below min_step_factor * max(1, |t|) raise NumericError.
  double min_step_factor = 1e-14;
  std::size_t max_steps = 50'000'000;
};

/// Adaptive Dormand-Prince 5(4) solution on [t0, t1], stored on a uniform
/// grid of spacing options.output_step (last node at t1).
TrajectoryGrid integrate_reference(const OdeModel& model, const State& x0, double t0, double t1,
                                   const ReferenceOptions& options = {});

/// Linear interpolation between bracketing nodes; exact at nodes. A tolerance
/// of 1e-9 relative to the span is allowed at both ends.
State sample_at(const TrajectoryGrid& traj, double t);

}  // namespace isovar::ode
