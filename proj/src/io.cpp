#include "isovar/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>

namespace isovar::io {

namespace {

std::ofstream open_out(const fs::path& path, bool binary = false) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw ParseError("cannot open " + path.string() + " for writing");
  return os;
}

std::ifstream open_in(const fs::path& path, bool binary = false) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw ParseError("cannot open " + path.string());
  return is;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_at(std::string_view text, const fs::path& path, std::size_t line) {
  try {
    return parse_double(trim(text));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": " + e.what());
  }
}

void put_u64(std::ostream& os, std::uint64_t v) {
  char bytes[8];
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
  os.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& is, const fs::path& path) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw ParseError(path.string() + ": truncated draws file");
  std::uint64_t v = 0;
  for (int k = 7; k >= 0; --k) v = (v << 8) | bytes[k];
  return v;
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& is, const fs::path& path) { return std::bit_cast<double>(get_u64(is, path)); }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

double parse_double(std::string_view text) {
  double v = 0.0;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParseError("not a number: '" + std::string(text) + "'");
  return v;
}

void write_trajectory(const fs::path& path, const ode::TrajectoryGrid& traj) {
  auto os = open_out(path);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_double(traj.times[k]);
    for (double x : traj.states[k]) os << ' ' << format_double(x);
    os << '\n';
  }
}

ode::TrajectoryGrid read_trajectory(const fs::path& path) {
  auto is = open_in(path);
  ode::TrajectoryGrid traj;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto cols = split_ws(line);
    if (cols.empty() || cols.front().front() == '#') continue;
    if (cols.size() < 2)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected at least two columns");
    traj.times.push_back(parse_at(cols[0], path, lineno));
    ode::State x;
    for (std::size_t c = 1; c < cols.size(); ++c) x.push_back(parse_at(cols[c], path, lineno));
    if (!traj.states.empty() && x.size() != traj.states.front().size())
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": inconsistent column count");
    traj.states.push_back(std::move(x));
  }
  try {
    traj.check();
  } catch (const std::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return traj;
}

void write_trajectory_csv(const fs::path& path, const ode::TrajectoryGrid& traj) {
  auto os = open_out(path);
  os << 't';
  const std::size_t dim = traj.size() ? traj.states.front().size() : 0;
  for (std::size_t c = 0; c < dim; ++c) os << ",x" << c + 1;
  os << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_double(traj.times[k]);
    for (double x : traj.states[k]) os << ',' << format_double(x);
    os << '\n';
  }
}

ode::TrajectoryGrid read_trajectory_csv(const fs::path& path) {
  auto is = open_in(path);
  ode::TrajectoryGrid traj;
  std::string line;
  if (!std::getline(is, line) || trim(line).empty() || trim(line).front() != 't')
    throw ParseError(path.string() + ":1: expected header \"t,x1,...\"");
  const std::size_t dim = split(trim(line), ',').size() - 1;
  if (dim == 0) throw ParseError(path.string() + ":1: header names no state columns");
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cols = split(trim(line), ',');
    if (cols.size() != dim + 1)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim + 1) +
                       " columns");
    traj.times.push_back(parse_at(cols[0], path, lineno));
    ode::State x;
    for (std::size_t c = 1; c < cols.size(); ++c) x.push_back(parse_at(cols[c], path, lineno));
    traj.states.push_back(std::move(x));
  }
  try {
    traj.check();
  } catch (const std::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return traj;
}

void write_dat(const fs::path& path, const std::vector<double>& times, const std::vector<double>& values) {
  if (times.size() != values.size()) throw ParseError("write_dat: length mismatch");
  auto os = open_out(path);
  for (std::size_t i = 0; i < times.size(); ++i) os << format_double(times[i]) << ' ' << format_double(values[i]) << '\n';
}

void read_dat(const fs::path& path, std::vector<double>& times, std::vector<double>& values) {
  const ode::TrajectoryGrid t = read_trajectory(path);
  times = t.times;
  values.clear();
  for (const auto& s : t.states) {
    if (s.size() != 1) throw ParseError(path.string() + ": expected exactly two columns");
    values.push_back(s[0]);
  }
}

void write_csv2(const fs::path& path, std::string_view header, const std::vector<double>& a,
                const std::vector<double>& b) {
  if (a.size() != b.size()) throw ParseError("write_csv2: length mismatch");
  auto os = open_out(path);
  os << header << '\n';
  for (std::size_t i = 0; i < a.size(); ++i) os << format_double(a[i]) << ',' << format_double(b[i]) << '\n';
}

void read_csv2(const fs::path& path, std::string_view header, std::vector<double>& a, std::vector<double>& b) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line) || trim(line) != header)
    throw ParseError(path.string() + ":1: expected header '" + std::string(header) + "'");
  a.clear();
  b.clear();
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 2) throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected two fields");
    a.push_back(parse_at(cols[0], path, lineno));
    b.push_back(parse_at(cols[1], path, lineno));
  }
}

void write_observations(const fs::path& path, const observation::ObservationSeries& obs) {
  write_csv2(path, "t,value", obs.times, obs.values);
}

observation::ObservationSeries read_observations(const fs::path& path, double noise_var) {
  observation::ObservationSeries obs;
  read_csv2(path, "t,value", obs.times, obs.values);
  obs.noise_var = noise_var;
  return obs;
}

void write_residuals(const fs::path& path, const observation::ResidualSeries& resid) {
  write_csv2(path, "t,residual", resid.times, resid.residuals);
}

observation::ResidualSeries read_residuals(const fs::path& path, double noise_var) {
  std::vector<double> t;
  std::vector<double> r;
  read_csv2(path, "t,residual", t, r);
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw ParseError(path.string() + ": times must be strictly increasing");
  return observation::make_residuals(std::move(t), std::move(r), noise_var);
}

std::vector<fs::path> write_summary(const fs::path& dir, std::string_view prefix,
                                    const posterior::SummarySeries& summary) {
  const std::string p(prefix);
  std::vector<fs::path> paths{dir / (p + "_mean.dat"), dir / (p + "_lower.dat"), dir / (p + "_upper.dat"),
                              dir / (p + "_summary.csv")};
  write_dat(paths[0], summary.times, summary.mean);
  write_dat(paths[1], summary.times, summary.lower);
  write_dat(paths[2], summary.times, summary.upper);
  auto os = open_out(paths[3]);
  os << "t,mean,lower,upper\n";
  for (std::size_t i = 0; i < summary.size(); ++i)
    os << format_double(summary.times[i]) << ',' << format_double(summary.mean[i]) << ','
       << format_double(summary.lower[i]) << ',' << format_double(summary.upper[i]) << '\n';
  return paths;
}

void write_ml(const fs::path& path, const baseline::MlEstimate& ml) { write_dat(path, ml.times, ml.sigma2_hat); }

void write_draws_csv(const fs::path& path, const gibbs::PosteriorDraws& draws) {
  auto os = open_out(path);
  for (std::size_t i = 0; i < draws.n; ++i) os << (i ? "," : "") << "sigma2_" << i + 1;
  os << '\n';
  for (std::size_t r = 0; r < draws.rows; ++r) {
    const auto row = draws.row(r);
    for (std::size_t i = 0; i < draws.n; ++i) os << (i ? "," : "") << format_double(row[i]);
    os << '\n';
  }
}

gibbs::PosteriorDraws read_draws_csv(const fs::path& path, const std::vector<double>& times) {
  auto is = open_in(path);
  std::string line;
  if (!std::getline(is, line)) throw ParseError(path.string() + ": empty draws file");
  const auto header = split(trim(line), ',');
  gibbs::PosteriorDraws draws;
  draws.n = header.size();
  for (std::size_t i = 0; i < draws.n; ++i)
    if (trim(header[i]) != "sigma2_" + std::to_string(i + 1))
      throw ParseError(path.string() + ":1: unexpected header field '" + std::string(header[i]) + "'");
  if (times.size() != draws.n) throw ParseError(path.string() + ": column count does not match the time grid");
  draws.times = times;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != draws.n)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": wrong number of fields");
    for (const auto c : cols) draws.sigma2.push_back(parse_at(c, path, lineno));
    ++draws.rows;
  }
  return draws;
}

void write_draws_binary(const fs::path& path, const gibbs::PosteriorDraws& draws) {
  auto os = open_out(path, true);
  os.write(kDrawsMagic, sizeof kDrawsMagic);
  os.put(static_cast<char>(kDrawsVersion));
  put_u64(os, draws.n);
  put_u64(os, draws.rows);
  for (std::size_t i = 0; i < draws.n; ++i) put_f64(os, i < draws.times.size() ? draws.times[i] : 0.0);
  for (double v : draws.sigma2) put_f64(os, v);
  if (!os) throw ParseError("failed writing " + path.string());
}

gibbs::PosteriorDraws read_draws_binary(const fs::path& path) {
  auto is = open_in(path, true);
  char magic[sizeof kDrawsMagic];
  if (!is.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kDrawsMagic))
    throw ParseError(path.string() + ": not a draws file (bad magic)");
  const int version = is.get();
  if (version != kDrawsVersion) throw ParseError(path.string() + ": unsupported draws version " + std::to_string(version));
  gibbs::PosteriorDraws draws;
  draws.n = get_u64(is, path);
  draws.rows = get_u64(is, path);
  const auto file_size = fs::file_size(path);
  const std::uint64_t expected = 8 + 1 + 16 + 8 * (draws.n + draws.n * draws.rows);
  if (draws.n != 0 && draws.rows > (file_size / 8) / draws.n) throw ParseError(path.string() + ": size mismatch");
  if (file_size != expected) throw ParseError(path.string() + ": size mismatch");
  draws.times.resize(draws.n);
  for (auto& t : draws.times) t = get_f64(is, path);
  draws.sigma2.resize(draws.n * draws.rows);
  for (auto& v : draws.sigma2) v = get_f64(is, path);
  return draws;
}

void write_trace(const fs::path& path, const gibbs::PosteriorDraws& draws) {
  auto os = open_out(path);
  os << "draw,lambda\n";
  for (std::size_t r = 0; r < draws.lambda_trace.size(); ++r)
    os << r + 1 << ',' << format_double(draws.lambda_trace[r]) << '\n';
}

}  // namespace isovar::io
