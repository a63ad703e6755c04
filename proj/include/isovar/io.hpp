#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "isovar/baseline.hpp"
#include "isovar/gibbs.hpp"
#include "isovar/observe.hpp"
#include "isovar/ode.hpp"
#include "isovar/posterior.hpp"

/// Text and binary file formats. Numbers are written in shortest round-trip
/// form with '.' as the decimal separator regardless of locale.
namespace isovar::io {

namespace fs = std::filesystem;

/// Thrown for unreadable or malformed files; carries path and line.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_double(double v);
double parse_double(std::string_view text);

/// Whitespace-separated rows "t x_1 ... x_d".
void write_trajectory(const fs::path& path, const ode::TrajectoryGrid& traj);
ode::TrajectoryGrid read_trajectory(const fs::path& path);

/// CSV trajectory with header "t,x1,...,xd".
void write_trajectory_csv(const fs::path& path, const ode::TrajectoryGrid& traj);
ode::TrajectoryGrid read_trajectory_csv(const fs::path& path);

/// Two-column plot data "t value", space separated, newline terminated.
void write_dat(const fs::path& path, const std::vector<double>& times, const std::vector<double>& values);
/// Reads a two-column .dat file.
void read_dat(const fs::path& path, std::vector<double>& times, std::vector<double>& values);

/// Two-column CSV with the given header, e.g. "t,value".
void write_csv2(const fs::path& path, std::string_view header, const std::vector<double>& a,
                const std::vector<double>& b);
void read_csv2(const fs::path& path, std::string_view header, std::vector<double>& a, std::vector<double>& b);

void write_observations(const fs::path& path, const observation::ObservationSeries& obs);
observation::ObservationSeries read_observations(const fs::path& path, double noise_var);
void write_residuals(const fs::path& path, const observation::ResidualSeries& resid);
observation::ResidualSeries read_residuals(const fs::path& path, double noise_var);

/// <dir>/<prefix>_mean.dat, _lower.dat, _upper.dat and _summary.csv
/// ("t,mean,lower,upper"). Returns the written paths.
std::vector<fs::path> write_summary(const fs::path& dir, std::string_view prefix,
                                    const posterior::SummarySeries& summary);

void write_ml(const fs::path& path, const baseline::MlEstimate& ml);

/// One row per retained sweep, header "sigma2_1,...,sigma2_n".
void write_draws_csv(const fs::path& path, const gibbs::PosteriorDraws& draws);
/// Times are not stored in the CSV form and must be supplied.
gibbs::PosteriorDraws read_draws_csv(const fs::path& path, const std::vector<double>& times);

inline constexpr char kDrawsMagic[8] = {'I', 'S', 'O', 'V', 'D', 'R', 'W', '\0'};
inline constexpr unsigned char kDrawsVersion = 1;

/// Binary layout, all little-endian:
///   8 bytes magic "ISOVDRW\0", 1 byte version,
///   u64 n, u64 rows, n f64 times, rows * n f64 sigma^2 (row-major).
void write_draws_binary(const fs::path& path, const gibbs::PosteriorDraws& draws);
gibbs::PosteriorDraws read_draws_binary(const fs::path& path);

/// "draw,lambda", one row per retained sweep.
void write_trace(const fs::path& path, const gibbs::PosteriorDraws& draws);

}  // namespace isovar::io
