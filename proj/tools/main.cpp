#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bspade/bspade.h"
#include "commands.hpp"

namespace {

// Flag name (without dashes) -> config key. Flags are applied after the
// config file so they take precedence.
const std::vector<std::pair<std::string, std::string>> kValueFlags = {
    {"gamma", "gamma"},
    {"pump-waist-um", "pump_waist_um"},
    {"crystal-length-mm", "crystal_length_mm"},
    {"pump-wavelength-nm", "pump_wavelength_nm"},
    {"schmidt-waist-um", "schmidt_waist_um"},
    {"modes-k", "modes_k"},
    {"modes-l", "modes_l"},
    {"sep-start", "sep_start"},
    {"sep-stop", "sep_stop"},
    {"sep-step", "sep_step"},
    {"sep-convention", "sep_convention"},
    {"photons", "photons"},
    {"trials", "trials"},
    {"seed", "seed"},
    {"out-dir", "out_dir"},
    {"threads", "threads"},
    {"k-values", "k_values"},
    {"gamma-values", "gamma_values"},
    {"alpha", "alpha"},
    {"beta", "beta"},
};

struct Flags
{
  std::map<std::string, std::string> values;
  bool calibrate = false;
  std::string config;
};

void add_common(CLI::App* sub, Flags& flags)
{
  for (const auto& [flag, key] : kValueFlags)
    sub->add_option("--" + flag, flags.values[key]);
  sub->add_flag("--calibrate", flags.calibrate, "fit per-entry alpha/beta from labeled files");
  sub->add_option("--config", flags.config, "key = value file; flags override it");
}

} // namespace

int main(int argc, char** argv)
{
  using namespace bspade::cli;

  CLI::App app{"Separation estimation with bi-photon spatial-mode demultiplexing"};
  app.set_version_flag("--version", std::string(bspade_version()));
  app.require_subcommand(1);

  Flags flags;
  std::vector<std::string> files;
  auto* crlb = app.add_subcommand("crlb-curves", "CRLB per photon versus Schmidt number");
  auto* matrices = app.add_subcommand("matrices", "theoretical coincidence matrices over a separation grid");
  auto* estimate = app.add_subcommand("estimate", "maximum-likelihood separation from counts files");
  auto* compare = app.add_subcommand("compare", "Monte-Carlo standard error of SPADE versus direct imaging");
  auto* simulate = app.add_subcommand("simulate", "synthetic counts files over a separation grid");
  for (auto* sub : {crlb, matrices, estimate, compare, simulate})
    add_common(sub, flags);
  estimate->add_option("files", files, "counts files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    RunConfig config;
    if (!flags.config.empty())
      load_config_file(config, flags.config);
    auto* active = app.get_subcommands().front();
    for (const auto& [flag, key] : kValueFlags)
      if (active->count("--" + flag) > 0)
        config.set(key, flags.values[key]);
    if (flags.calibrate)
      config.calibrate = true;

    if (active == crlb)
      return cmd_crlb_curves(config, std::cerr);
    if (active == matrices)
      return cmd_matrices(config, std::cerr);
    if (active == estimate) {
      std::vector<std::filesystem::path> paths(files.begin(), files.end());
      return cmd_estimate(config, paths, std::cerr);
    }
    if (active == compare)
      return cmd_compare(config, std::cerr);
    return cmd_simulate(config, std::cerr);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
}
