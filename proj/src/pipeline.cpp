#include "isovar/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "isovar/baseline.hpp"
#include "isovar/error.hpp"
#include "isovar/gibbs.hpp"
#include "isovar/io.hpp"
#include "isovar/posterior.hpp"
#include "isovar/rng.hpp"

namespace isovar::pipeline {

using config::RunConfig;

namespace {

constexpr std::uint64_t kNoiseTag = 1;
constexpr std::uint64_t kPredictiveTag = 3;

ode::OdeModel make_model(const RunConfig& c) {
  switch (c.model) {
    case config::ModelKind::fn:
      return ode::fn_model(c.fn);
    case config::ModelKind::kepler:
      return ode::kepler_model();
    case config::ModelKind::custom_csv:
      break;
  }
  throw ConfigError("model.name", "no vector field for custom-csv");
}

ode::State initial_state(const RunConfig& c) {
  return c.model == config::ModelKind::fn ? ode::fn_initial_state() : ode::kepler_initial_state(c.kepler);
}

std::size_t step_count(double span, double h) {
  const double steps = std::round(span / h);
  if (std::abs(steps * h - span) > 1e-9 * std::max(1.0, span))
    throw ConfigError("integrator.step", "must divide t_end - t0");
  return static_cast<std::size_t>(steps);
}

std::vector<double> observed(const ode::TrajectoryGrid& traj, const observation::ObservationOperator& op) {
  std::vector<double> out;
  out.reserve(traj.size());
  for (const auto& x : traj.states) out.push_back(op(x));
  return out;
}

observation::ResidualSeries load_residuals(const RunConfig& c, const fs::path& path) {
  return io::read_residuals(path, c.noise_var());
}

void append(std::vector<fs::path>& out, const std::vector<fs::path>& more) {
  out.insert(out.end(), more.begin(), more.end());
}

}  // namespace

observation::ObservationOperator make_operator(const RunConfig& c) {
  if (c.op == config::OperatorKind::velocity_magnitude) return observation::ObservationOperator::velocity_magnitude();
  return observation::ObservationOperator::component(c.component);
}

Simulation simulate(const RunConfig& c) {
  c.validate();
  Simulation sim;
  if (c.model == config::ModelKind::custom_csv) {
    sim.numeric = io::read_trajectory_csv(c.numeric_file);
    sim.reference = io::read_trajectory_csv(c.reference_file);
  } else {
    const ode::OdeModel model = make_model(c);
    const ode::State x0 = initial_state(c);
    const std::size_t steps = step_count(c.t_end - c.t0, c.step);
    ode::ReferenceOptions ref;
    ref.abstol = c.abstol;
    ref.reltol = c.reltol;
    ref.output_step = c.obs_interval / static_cast<double>(c.refine);
    switch (c.integrator) {
      case config::IntegratorKind::explicit_euler:
        sim.numeric = ode::integrate_explicit_euler(model, x0, c.t0, c.step, steps);
        break;
      case config::IntegratorKind::symplectic_euler:
        sim.numeric = ode::integrate_symplectic_euler(model, x0, c.t0, c.step, steps);
        break;
      case config::IntegratorKind::reference: {
        ode::ReferenceOptions num = ref;
        num.output_step = c.step;
        sim.numeric = ode::integrate_reference(model, x0, c.t0, c.t_end, num);
        break;
      }
    }
    sim.reference = ode::integrate_reference(model, x0, c.t0, c.t_end, ref);
  }

  const auto op = make_operator(c);
  if (!sim.numeric.states.empty() && op.kind() == observation::ObservationOperator::Kind::component &&
      op.index() >= sim.numeric.states.front().size())
    throw ConfigError("observation.component", "out of range for the trajectory dimension");
  const auto times = observation::time_range(c.obs_start, c.obs_end, c.obs_interval);
  sim.observations = observation::observe(sim.reference, op, times, c.noise_var(), derive_seed(c.seed, kNoiseTag));
  sim.residuals = observation::residuals(sim.observations, sim.numeric, op);
  sim.errors.reserve(times.size());
  for (double t : times) sim.errors.push_back(op(ode::sample_at(sim.reference, t)) - op(ode::sample_at(sim.numeric, t)));
  return sim;
}

std::vector<fs::path> cmd_simulate(const RunConfig& c) {
  const Simulation sim = simulate(c);
  const fs::path dir = c.out_dir;
  const auto op = make_operator(c);
  std::vector<fs::path> out{dir / "observations.csv", dir / "numeric.dat", dir / "reference.dat",
                            dir / "residuals.csv", dir / "errors.csv"};
  io::write_observations(out[0], sim.observations);
  io::write_dat(out[1], sim.numeric.times, observed(sim.numeric, op));
  io::write_dat(out[2], sim.reference.times, observed(sim.reference, op));
  io::write_residuals(out[3], sim.residuals);
  io::write_csv2(out[4], "t,error", sim.residuals.times, sim.errors);
  return out;
}

fs::path draws_file_name(const RunConfig& c) {
  return c.draws_format == config::DrawsFormat::binary ? "draws.bin" : "draws.csv";
}

std::vector<fs::path> cmd_fit(const RunConfig& c, const fs::path& residuals_path) {
  c.validate();
  const auto resid = load_residuals(c, residuals_path);
  const auto draws = gibbs::run_chains(resid, c.gibbs_config(), c.chains);
  const fs::path dir = c.out_dir;
  std::vector<fs::path> out{dir / draws_file_name(c), dir / "trace.csv"};
  if (c.draws_format == config::DrawsFormat::binary)
    io::write_draws_binary(out[0], draws);
  else
    io::write_draws_csv(out[0], draws);
  io::write_trace(out[1], draws);
  return out;
}

std::vector<fs::path> cmd_summarize(const RunConfig& c, const fs::path& draws_path,
                                    const std::optional<fs::path>& residuals_path) {
  c.validate();
  gibbs::PosteriorDraws draws;
  if (draws_path.extension() == ".csv") {
    if (!residuals_path) throw ConfigError("residuals", "CSV draws need the residuals file for their times");
    draws = io::read_draws_csv(draws_path, load_residuals(c, *residuals_path).times);
  } else {
    draws = io::read_draws_binary(draws_path);
  }
  const double gamma2 = c.noise_var();
  const fs::path dir = c.out_dir;
  std::vector<fs::path> out;
  using posterior::Target;
  append(out, io::write_summary(dir, posterior::target_name(Target::sigma),
                                posterior::summarize_sigma(draws, c.sigma_level)));
  append(out, io::write_summary(dir, posterior::target_name(Target::error_sd),
                                posterior::summarize_error_sd(draws, gamma2, c.sigma_level)));
  for (const Target t : {Target::abs_residual, Target::abs_error}) {
    Rng rng(derive_seed(c.seed, kPredictiveTag));
    append(out, io::write_summary(dir, posterior::target_name(t),
                                  posterior::predictive_abs(draws, gamma2, t, c.predictive_level, rng)));
  }
  return out;
}

std::vector<fs::path> cmd_baseline(const RunConfig& c, const fs::path& residuals_path) {
  c.validate();
  const auto resid = load_residuals(c, residuals_path);
  const fs::path path = fs::path(c.out_dir) / "ml.dat";
  io::write_ml(path, baseline::isotonic_mle(resid));
  return {path};
}

std::vector<fs::path> cmd_quantify(const RunConfig& c) {
  c.validate();
  const fs::path dir = c.out_dir;
  fs::create_directories(dir);
  std::vector<fs::path> out;
  {
    const fs::path cfg = dir / "config.ini";
    std::ofstream os(cfg);
    if (!os) throw io::ParseError("cannot open " + cfg.string() + " for writing");
    os << config::serialize_config(c);
    out.push_back(cfg);
  }
  append(out, cmd_simulate(c));
  const fs::path resid = dir / "residuals.csv";
  const auto fitted = cmd_fit(c, resid);
  append(out, fitted);
  append(out, cmd_summarize(c, fitted.front(), resid));
  append(out, cmd_baseline(c, resid));

  const fs::path manifest = dir / "manifest.txt";
  std::ofstream os(manifest);
  if (!os) throw io::ParseError("cannot open " + manifest.string() + " for writing");
  for (const auto& p : out) os << sha256_file(p) << "  " << p.filename().string() << '\n';
  os.close();
  out.push_back(manifest);
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io::ParseError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest init failed");
  std::array<char, 1 << 16> buf{};
  while (is) {
    is.read(buf.data(), buf.size());
    if (is.gcount() > 0 && EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount())) != 1)
      throw std::runtime_error("sha256: digest update failed");
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) throw std::runtime_error("sha256: digest final failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 0xF];
  }
  return s;
}

std::string algorithm_description() {
  return R"(Gibbs sweep (one retained draw per sweep after burn-in):
  1. s_i      labels, p(s_i = k) proportional to w_k N(z_i - sum_{l<=i} eta_l; m_k, v_k^2)
              (--s-mode prior draws s_i from the weights w_k alone)
  2. eta_1    N_{>= log gamma^2}(mu_1, w_1^2),
              mu_1  = (tau_1 mu~ + w~^2 log gamma^2) / (w~^2 + tau_1),
              w_1^2 = w~^2 tau_1 / (w~^2 + tau_1)
  3. eta_j    j = 2..n in order, N_{>= 0}(mu_j, w_j^2),
              mu_j  = lambda tau_j mu~ / (w~^2 + lambda tau_j),
              w_j^2 = w~^2 lambda tau_j / (w~^2 + lambda tau_j)
              where mu~, w~^2 are the likelihood-only moments from
              k_{i,j} = z_i - m_{s_i} - sum_{l<=i, l!=j} eta_l, i >= j
  4. nu_1     Ga(3/2, 1 + tau_1)
  5. tau_1    GIG(2 nu_1, (eta_1 - log gamma^2)^2, 1/2)
  6. nu_j     Ga(1, 1 + tau_j)
  7. tau_j    GIG(2 nu_j, eta_j^2 / lambda, 0)
  8. xi       Ga(1, 1 + lambda)
  9. lambda   GIG(2 xi, sum_{j>=2} eta_j^2 / tau_j, (2 - n) / 2)

Conventions:
  - The second tau assignment in the sweep updates tau_j, not tau_1.
  - The eta_1 mean weights log gamma^2 by the likelihood variance w~^2.
  - The eta_j variance uses the local scale tau_j of the same increment.
  - GIG(a, b, p) has density proportional to x^{p-1} exp(-(a x + b / x) / 2);
    Ga(shape, rate).
  - For b below 1e-14 max(1, a) with p > 0 the GIG draw is an independence
    Metropolis-Hastings step with a Ga(p, a/2) proposal.
)";
}

}  // namespace isovar::pipeline
