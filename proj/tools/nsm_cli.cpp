#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "nsm/cli.hpp"

int main(int argc, char** argv)
{
  CLI::App app{"Noisy-storage security parameters, feasibility scans and protocol simulation"};
  app.require_subcommand(1, 1);

  std::string config_path, out_path, regime;
  std::uint64_t seed = 1;
  app.add_option("--config", config_path, "Config file with [source], [detector], [storage], [security], "
                                          "[protocol] and [scan] sections")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Seed for simulation runs");
  app.add_option("--out", out_path, "CSV output file (simulate: transcript file)");
  app.add_option("--regime", regime, "Security regime")->check(CLI::IsMember({"asymptotic", "finite"}));

  app.add_subcommand("params", "Source and detector probabilities");
  app.add_subcommand("region", "Feasibility scan over two parameters");
  app.add_subcommand("lambda", "Min-entropy rate, conditions and security error");
  app.add_subcommand("otrate", "Oblivious-transfer length per round over a sweep of M");
  app.add_subcommand("decoy", "Single-photon yield bound from decoy states");
  app.add_subcommand("simulate", "Run the protocol pipeline and summarize");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return nsm::cli::invalid;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  nsm::cli::Config cfg;
  try {
    if (!config_path.empty())
      cfg = nsm::cli::load_config(config_path);
    if (!regime.empty())
      cfg.security.regime = nsm::parse_regime(regime);
  } catch (const std::exception& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << '\n';
    return nsm::cli::invalid;
  }

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) {
      std::cerr << "error: cannot write " << out_path << '\n';
      return nsm::cli::invalid;
    }
  }
  if (command == "simulate")
    return nsm::cli::run_command(command, cfg, seed, std::cout, std::cerr, file.is_open() ? &file : nullptr);
  return nsm::cli::run_command(command, cfg, seed, file.is_open() ? file : std::cout, std::cerr);
}
