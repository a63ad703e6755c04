#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "isovar/gibbs.hpp"
#include "isovar/ode.hpp"

namespace isovar::config {

enum class ModelKind { fn, kepler, custom_csv };
enum class IntegratorKind { explicit_euler, symplectic_euler, reference };
enum class OperatorKind { component, velocity_magnitude };
enum class DrawsFormat { binary, csv };

/// Everything one pipeline run needs. The file grammar is INI-style:
/// `[section]` headers, `key = value` lines, `;` or `#` comments. See
/// configs/*.ini for complete examples.
struct RunConfig {
  // [run]
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  // [model]
  ModelKind model = ModelKind::fn;
  ode::FnParams fn;
  ode::KeplerParams kepler;
  double t0 = 0.0;
  /// custom-csv only: trajectory CSV files with header "t,x1,...,xd".
  std::string numeric_file;
  std::string reference_file;

  // [integrator]
  IntegratorKind integrator = IntegratorKind::explicit_euler;
  double step = 0.1;
  double t_end = 50.0;

  // [reference]
  double abstol = 1e-8;
  double reltol = 1e-8;
  /// Reference output grid is `refine` times finer than the observation
  /// interval.
  std::size_t refine = 10;

  // [observation]
  OperatorKind op = OperatorKind::component;
  std::size_t component = 0;
  double obs_start = 5.0;
  double obs_end = 50.0;
  double obs_interval = 0.2;
  std::optional<double> gamma2;

  // [gibbs]
  std::size_t burn_in = 500;
  std::size_t samples = 2500;
  std::size_t thinning = 1;
  gibbs::SUpdateMode s_mode = gibbs::SUpdateMode::posterior;
  std::size_t chains = 1;
  bool store_eta = false;
  DrawsFormat draws_format = DrawsFormat::binary;

  // [summary]
  double sigma_level = 0.95;
  double predictive_level = 0.90;

  bool operator==(const RunConfig&) const = default;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;

  /// Noise variance; throws ConfigError if absent.
  double noise_var() const;

  gibbs::GibbsConfig gibbs_config() const;
};

/// Parses config text. Syntax errors carry `source:line`; semantic errors
/// carry `section.key`. Unknown sections or keys are rejected.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Applies ISOVAR_SEED and ISOVAR_OUT if set.
void apply_environment(RunConfig& config);

}  // namespace isovar::config
