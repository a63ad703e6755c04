#include "isovar/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "isovar/error.hpp"

namespace isovar::ode {

State OdeModel::operator()(const State& x) const {
  if (x.size() != dimension) throw DomainError(name + ": state dimension mismatch");
  State dx = vector_field(x);
  if (dx.size() != dimension) throw DomainError(name + ": vector field returned wrong dimension");
  return dx;
}

void TrajectoryGrid::check() const {
  if (times.size() != states.size()) throw DomainError("trajectory: times/states count mismatch");
  for (const auto& x : states)
    if (x.size() != states.front().size()) throw DomainError("trajectory: states differ in dimension");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw DomainError("trajectory: times must be strictly increasing");
  }
}

State fn_vector_field(const FnParams& params, const State& state) {
  const double v = state[0];
  const double r = state[1];
  return {params.c * (v - v * v * v / 3.0 + r), -(v - params.a + params.b * r) / params.c};
}

State kepler_vector_field(const State& state, double singular_radius2) {
  const double q1 = state[0];
  const double q2 = state[1];
  const double r2 = q1 * q1 + q2 * q2;
  if (r2 < singular_radius2) throw NumericError("kepler: state too close to the origin");
  const double r3 = r2 * std::sqrt(r2);
  return {state[2], state[3], -q1 / r3, -q2 / r3};
}

OdeModel fn_model(const FnParams& params) {
  if (params.c == 0.0) throw DomainError("fitzhugh-nagumo: c must be nonzero");
  return {2, [params](const State& x) { return fn_vector_field(params, x); }, "fitzhugh-nagumo", false};
}

OdeModel kepler_model(double singular_radius2) {
  return {4, [singular_radius2](const State& x) { return kepler_vector_field(x, singular_radius2); }, "kepler",
          true};
}

OdeModel harmonic_oscillator_model() {
  return {2, [](const State& x) { return State{x[1], -x[0]}; }, "harmonic-oscillator", true};
}

State fn_initial_state() { return {1.0, -1.0}; }

State kepler_initial_state(const KeplerParams& params) {
  if (!(params.e >= 0.0 && params.e < 1.0)) throw DomainError("kepler: eccentricity must lie in [0, 1)");
  return {1.0 - params.e, 0.0, 0.0, std::sqrt((1.0 + params.e) / (1.0 - params.e))};
}

namespace {

void check_step(double h, std::size_t n_steps) {
  if (!(h > 0.0)) throw DomainError("integrator: step size must be positive");
  if (n_steps == 0) throw DomainError("integrator: n_steps must be positive");
}

TrajectoryGrid start_grid(double t0, const State& x0, std::size_t n_steps) {
  TrajectoryGrid grid;
  grid.times.reserve(n_steps + 1);
  grid.states.reserve(n_steps + 1);
  grid.times.push_back(t0);
  grid.states.push_back(x0);
  return grid;
}

}  // namespace

TrajectoryGrid integrate_explicit_euler(const OdeModel& model, const State& x0, double t0, double h,
                                        std::size_t n_steps) {
  check_step(h, n_steps);
  TrajectoryGrid grid = start_grid(t0, x0, n_steps);
  State x = x0;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const State dx = model(x);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += h * dx[i];
    grid.times.push_back(t0 + static_cast<double>(k) * h);
    grid.states.push_back(x);
  }
  return grid;
}

TrajectoryGrid integrate_symplectic_euler(const OdeModel& model, const State& x0, double t0, double h,
                                          std::size_t n_steps) {
  check_step(h, n_steps);
  if (!model.hamiltonian_split) throw DomainError(model.name + ": symplectic Euler needs a (q, p) split model");
  if (model.dimension % 2 != 0) throw DomainError(model.name + ": split model must have even dimension");
  const std::size_t half = model.dimension / 2;
  TrajectoryGrid grid = start_grid(t0, x0, n_steps);
  State x = x0;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const State force = model(x);
    for (std::size_t i = half; i < x.size(); ++i) x[i] += h * force[i];
    const State velocity = model(x);
    for (std::size_t i = 0; i < half; ++i) x[i] += h * velocity[i];
    grid.times.push_back(t0 + static_cast<double>(k) * h);
    grid.states.push_back(x);
  }
  return grid;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kB5{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr std::array<double, 7> kB4{5179.0 / 57600, 0.0,           7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

struct StepResult {
  State x;
  double error_norm;
};

StepResult dopri_step(const OdeModel& model, const State& x, double h, const ReferenceOptions& opt) {
  const std::size_t d = x.size();
  std::array<State, 7> k;
  k[0] = model(x);
  State tmp(d);
  for (std::size_t s = 1; s < 7; ++s) {
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < s; ++j) acc += kA[s][j] * k[j][i];
      tmp[i] = x[i] + h * acc;
    }
    k[s] = model(tmp);
  }
  // Stage 7 was evaluated at the 5th-order solution (FSAL), which is tmp.
  double sum = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double diff = 0.0;
    for (std::size_t s = 0; s < 7; ++s) diff += (kB5[s] - kB4[s]) * k[s][i];
    const double scale = opt.abstol + opt.reltol * std::max(std::abs(x[i]), std::abs(tmp[i]));
    const double e = h * diff / scale;
    sum += e * e;
  }
  return {tmp, std::sqrt(sum / static_cast<double>(d))};
}

}  // namespace

TrajectoryGrid integrate_reference(const OdeModel& model, const State& x0, double t0, double t1,
                                   const ReferenceOptions& options) {
  if (!(options.abstol > 0.0 && options.reltol > 0.0)) throw DomainError("reference: tolerances must be positive");
  if (!(options.output_step > 0.0)) throw DomainError("reference: output_step must be positive");
  if (!(t1 > t0)) throw DomainError("reference: empty time span");

  const auto n_out = static_cast<std::size_t>(std::ceil((t1 - t0) / options.output_step - 1e-9));
  TrajectoryGrid grid = start_grid(t0, x0, n_out);

  State x = x0;
  double t = t0;
  double h = std::min(options.initial_step, options.output_step);
  std::size_t steps = 0;
  for (std::size_t node = 1; node <= n_out; ++node) {
    const double target = node == n_out ? t1 : t0 + static_cast<double>(node) * options.output_step;
    while (t < target) {
      if (++steps > options.max_steps) throw NumericError("reference: step budget exhausted");
      const bool last = h >= target - t;
      const double step = last ? target - t : h;
      StepResult res = dopri_step(model, x, step, options);
      if (res.error_norm <= 1.0) {
        x = std::move(res.x);
        t = last ? target : t + step;
      }
      const double factor =
          res.error_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(res.error_norm, -0.2), 0.2, 5.0);
      // After a clipped step keep the unclipped step size unless it failed.
      if (!(last && res.error_norm <= 1.0)) h = step * factor;
      if (h < options.min_step_factor * std::max(1.0, std::abs(t)))
        throw NumericError("reference: step size underflow at t=" + std::to_string(t));
    }
    grid.times.push_back(target);
    grid.states.push_back(x);
  }
  return grid;
}

State sample_at(const TrajectoryGrid& traj, double t) {
  if (traj.times.empty()) throw DomainError("sample_at: empty trajectory");
  const double t_lo = traj.times.front();
  const double t_hi = traj.times.back();
  const double slack = 1e-9 * std::max(1.0, t_hi - t_lo);
  if (t < t_lo - slack || t > t_hi + slack) throw DomainError("sample_at: time " + std::to_string(t) + " out of range");
  if (t <= t_lo) return traj.states.front();
  if (t >= t_hi) return traj.states.back();
  const auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
  const auto hi = static_cast<std::size_t>(it - traj.times.begin());
  const std::size_t lo = hi - 1;
  if (traj.times[lo] == t) return traj.states[lo];
  const double w = (t - traj.times[lo]) / (traj.times[hi] - traj.times[lo]);
  State out(traj.states[lo].size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * traj.states[lo][i] + w * traj.states[hi][i];
  return out;
}

}  // namespace isovar::ode
