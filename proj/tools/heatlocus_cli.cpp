#include <cstdio>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "heatlocus/commands.hpp"
#include "heatlocus/io.hpp"

namespace {

/// traj.csv -> traj.json; anything else gets ".json" appended.
std::string sidecar_path(const std::string& out) {
  std::filesystem::path p(out);
  if (p.extension() == ".csv") return p.replace_extension(".json").string();
  return out + ".json";
}

int run(const std::string& command, const std::string& config_path, const std::optional<std::uint64_t>& seed,
        bool verify, std::string out_path) {
  using namespace heatlocus;
  try {
    const nlohmann::json config = load_config(config_path);
    if (out_path.empty() && config.contains("output")) {
      require(config.at("output").is_string(), ErrorKind::InvalidInput, "config: 'output' must be a string");
      out_path = config.at("output").get<std::string>();
    }
    RunOptions options;
    options.seed = seed;
    options.verify = verify;
    const CommandOutput out = run_command(command, config, options);
    if (out_path.empty()) {
      std::fwrite(out.primary.data(), 1, out.primary.size(), stdout);
      if (out.sidecar) std::fwrite(out.sidecar->data(), 1, out.sidecar->size(), stderr);
    } else {
      write_text(out_path, out.primary);
      if (out.sidecar) write_text(sidecar_path(out_path), *out.sidecar);
    }
    if (out.status == kExitContinuum) std::cerr << "heatlocus: refused: minimizers form a continuum\n";
    if (out.status == kExitNumerical) std::cerr << "heatlocus: verification fit does not match the prediction\n";
    return out.status;
  } catch (const Error& e) {
    std::cerr << "heatlocus: error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_status(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "heatlocus: error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Small-time heat-kernel asymptotics at conjugate and cut points"};
  app.require_subcommand(1);
  std::string config_path, out_path;
  std::optional<std::uint64_t> seed;
  bool verify = false;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"geodesic", "Integrate a normal geodesic; trajectory CSV plus {t_conj, t_cut, energy_drift} sidecar"},
      {"distance", "Distance and all minimizing geodesics between two points"},
      {"cutlocus", "Cut and conjugate times along sampled initial covectors (CSV)"},
      {"classify", "Hinged-energy profile and singularity type of each minimizer"},
      {"predict", "Small-time exponent, remainder and leading constant of the heat kernel"},
      {"laplace-check", "Quadrature oracle against the two-term Laplace expansion (CSV)"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Seed for low-discrepancy sampling (overrides the config)");
    sub->add_option("--out", out_path, "Output file (sidecars go next to it)");
    if (name == "predict") sub->add_flag("--verify", verify, "Fit the midpoint-integral exponent numerically");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return heatlocus::kExitInvalidConfig;
  }
  for (const CLI::App* sub : app.get_subcommands()) return run(sub->get_name(), config_path, seed, verify, out_path);
  return heatlocus::kExitInvalidConfig;
}
