#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "isovar/config.hpp"
#include "isovar/error.hpp"
#include "isovar/io.hpp"
#include "isovar/mixture.hpp"
#include "isovar/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> s_mode;
  std::optional<std::size_t> chains;
  std::optional<std::string> residuals;
  std::optional<std::string> draws;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "Config file")->required();
  sub->add_option("--seed", o.seed, "Override [run] seed");
  sub->add_option("--out", o.out, "Override [run] out directory");
}

void add_sampler(CLI::App* sub, Overrides& o) {
  sub->add_option("--s-mode", o.s_mode, "Label update: posterior or prior")
      ->check(CLI::IsMember({"posterior", "prior"}));
  sub->add_option("--chains", o.chains, "Independent chains run concurrently")->check(CLI::PositiveNumber);
}

isovar::config::RunConfig resolve(const Overrides& o) {
  auto c = isovar::config::load_config(o.config_path);
  isovar::config::apply_environment(c);
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out_dir = *o.out;
  if (o.s_mode) c.s_mode = *o.s_mode == "prior" ? isovar::gibbs::SUpdateMode::prior : isovar::gibbs::SUpdateMode::posterior;
  if (o.chains) c.chains = *o.chains;
  c.validate();
  return c;
}

std::filesystem::path in_out(const isovar::config::RunConfig& c, const std::optional<std::string>& given,
                             const std::filesystem::path& name) {
  return given ? std::filesystem::path(*given) : std::filesystem::path(c.out_dir) / name;
}

void report(const std::vector<std::filesystem::path>& paths) {
  for (const auto& p : paths) std::cout << p.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian isotonic-variance quantification of ODE discretization error"};
  app.require_subcommand(0, 1);
  bool print_algorithm = false;
  app.add_flag("--print-algorithm", print_algorithm, "Describe the Gibbs sweep and exit");

  Overrides o;
  auto* simulate = app.add_subcommand("simulate", "Integrate, observe and write residuals");
  add_common(simulate, o);

  auto* fit = app.add_subcommand("fit", "Run the Gibbs sampler on residuals");
  add_common(fit, o);
  add_sampler(fit, o);
  fit->add_option("--residuals", o.residuals, "Residuals CSV (default <out>/residuals.csv)");

  auto* summarize = app.add_subcommand("summarize", "Posterior and predictive bands from draws");
  add_common(summarize, o);
  summarize->add_option("--draws", o.draws, "Draws file (default <out>/draws.bin or draws.csv)");
  summarize->add_option("--residuals", o.residuals, "Residuals CSV, for the times of CSV draws");

  auto* baseline = app.add_subcommand("baseline", "Isotonic maximum likelihood estimate");
  add_common(baseline, o);
  baseline->add_option("--residuals", o.residuals, "Residuals CSV (default <out>/residuals.csv)");

  auto* quantify = app.add_subcommand("quantify", "simulate, fit, summarize and baseline with a manifest");
  add_common(quantify, o);
  add_sampler(quantify, o);

  auto* dump_table = app.add_subcommand("dump-table", "Print the log-chi-square mixture table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (print_algorithm) {
    std::cout << isovar::pipeline::algorithm_description();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kExitConfig;
  }

  try {
    if (dump_table->parsed()) {
      isovar::dist::dump_table(std::cout, isovar::dist::log_chi2_mixture());
      return 0;
    }
    const auto c = resolve(o);
    if (simulate->parsed()) {
      report(isovar::pipeline::cmd_simulate(c));
    } else if (fit->parsed()) {
      report(isovar::pipeline::cmd_fit(c, in_out(c, o.residuals, "residuals.csv")));
    } else if (summarize->parsed()) {
      const auto resid = in_out(c, o.residuals, "residuals.csv");
      report(isovar::pipeline::cmd_summarize(c, in_out(c, o.draws, isovar::pipeline::draws_file_name(c)),
                                             std::filesystem::exists(resid) ? std::optional(resid) : std::nullopt));
    } else if (baseline->parsed()) {
      report(isovar::pipeline::cmd_baseline(c, in_out(c, o.residuals, "residuals.csv")));
    } else if (quantify->parsed()) {
      report(isovar::pipeline::cmd_quantify(c));
    }
  } catch (const isovar::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const isovar::io::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const isovar::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const isovar::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
