#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "isovar/config.hpp"
#include "isovar/observe.hpp"
#include "isovar/ode.hpp"

namespace isovar::pipeline {

namespace fs = std::filesystem;

struct Simulation {
  ode::TrajectoryGrid numeric;
  ode::TrajectoryGrid reference;
  observation::ObservationSeries observations;
  observation::ResidualSeries residuals;
  /// Discretization error O(x_ref(t_i)) - O(x_num(t_i)) at the observation
  /// times.
  std::vector<double> errors;
};

observation::ObservationOperator make_operator(const config::RunConfig& config);

/// Integrates (or loads) both trajectories, observes the reference with
/// noise and forms residuals against the numeric solution.
Simulation simulate(const config::RunConfig& config);

/// Writes observations.csv, numeric.dat, reference.dat, residuals.csv and
/// errors.csv into config.out_dir. The .dat files hold t and O(x(t)) on the
/// integrator grids.
std::vector<fs::path> cmd_simulate(const config::RunConfig& config);

/// Reads residuals, runs config.chains chains and writes draws.bin (or
/// draws.csv) and trace.csv.
std::vector<fs::path> cmd_fit(const config::RunConfig& config, const fs::path& residuals_path);

/// Writes <target>_mean.dat, _lower.dat, _upper.dat and _summary.csv for
/// sigma, error_sd, abs_residual and abs_error. CSV draws take their times
/// from residuals_path.
std::vector<fs::path> cmd_summarize(const config::RunConfig& config, const fs::path& draws_path,
                                    const std::optional<fs::path>& residuals_path = std::nullopt);

/// Writes ml.dat.
std::vector<fs::path> cmd_baseline(const config::RunConfig& config, const fs::path& residuals_path);

/// simulate, fit, summarize and baseline, then manifest.txt with one
/// "sha256  name" line per output file. Returns every written path
/// including the manifest.
std::vector<fs::path> cmd_quantify(const config::RunConfig& config);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

/// Human-readable sampler description, including index conventions.
std::string algorithm_description();

fs::path draws_file_name(const config::RunConfig& config);

}  // namespace isovar::pipeline
