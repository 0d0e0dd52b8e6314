// Command-line front end for the benchmark studies.
#include <exception>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ncbem/studies.hpp"

namespace {

struct CommonFlags {
  std::string preset;
  std::string config_path;
  std::string out_dir;
  std::string formulations;
  long long seed = -1;
  int threads = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--preset", flags.preset, "bundled preset name");
  cmd->add_option("--config", flags.config_path, "key = value configuration file");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--formulations", flags.formulations, "comma-separated formulation list");
  cmd->add_option("--seed", flags.seed, "random seed");
  cmd->add_option("--threads", flags.threads, "worker threads (0 = hardware)");
}

ncbem::StudyConfig resolve(const std::string& study, const CommonFlags& flags) {
  ncbem::StudyConfig config;
  if (!flags.preset.empty()) {
    config = ncbem::preset_config(flags.preset);
    if (config.study != study) {
      throw std::invalid_argument("preset '" + flags.preset + "' belongs to study '" +
                                  config.study + "'");
    }
  }
  config.study = study;
  if (!flags.config_path.empty()) config = ncbem::parse_config_file(flags.config_path, config);
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (!flags.formulations.empty()) {
    ncbem::apply_config_line(config, "formulations = " + flags.formulations);
  }
  if (flags.seed >= 0) config.seed = static_cast<std::uint64_t>(flags.seed);
  if (flags.threads >= 0) config.threads = flags.threads;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonconforming boundary element benchmarks for Helmholtz transmission"};
  app.require_subcommand(1);

  const std::vector<std::string> studies = {"projection-error", "convergence", "efficiency",
                                            "screen", "foam"};
  std::vector<std::pair<std::string, CommonFlags>> runs;
  runs.reserve(studies.size());
  for (const std::string& study : studies) {
    runs.emplace_back(study, CommonFlags{});
    CLI::App* cmd = app.add_subcommand(study, "run the " + study + " study");
    add_common(cmd, runs.back().second);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [study, flags] : runs) {
      if (app.get_subcommand(study)->parsed()) {
        const ncbem::StudyConfig config = resolve(study, flags);
        return ncbem::run_study(config);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
