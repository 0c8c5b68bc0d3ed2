#include <CLI11.hpp>

#include <iostream>

#include "mixray/app.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"mixray: transverse and mixed ray transforms, normal operators and local inversion"};
  cli.set_version_flag("--version", mixray::kVersion);
  std::string command, config_path, out_dir;
  int threads = 0;
  long long seed = -1;
  cli.add_option("command", command, "forward | normal | symbols | invert | layers")
      ->required()
      ->check(CLI::IsMember(mixray::app::commands()));
  cli.add_option("--config", config_path, "experiment config file")->required();
  cli.add_option("--out", out_dir, "output directory (overrides experiment.output)");
  cli.add_option("--threads", threads, "worker threads (overrides experiment.threads)")->check(CLI::Range(1, 256));
  cli.add_option("--seed", seed, "random seed (overrides experiment.seed)")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(cli, argc, argv);

  try {
    mixray::ExperimentConfig cfg = mixray::load_config(config_path);
    if (!out_dir.empty()) mixray::override_key(cfg, "experiment", "output", out_dir);
    if (threads > 0) mixray::override_key(cfg, "experiment", "threads", std::to_string(threads));
    if (seed >= 0) mixray::override_key(cfg, "experiment", "seed", std::to_string(seed));
    const auto res = mixray::app::run(command, cfg);
    mixray::Json j = res.summary;
    j["artifacts"] = res.artifacts;
    j["exit_code"] = res.exit_code;
    std::cout << j.dump(2) << "\n";
    return res.exit_code;
  } catch (const std::exception& e) {
    mixray::Json err;
    err["error"] = mixray::app::error_kind(e);
    err["message"] = e.what();
    err["command"] = command;
    std::cerr << err.dump(2) << "\n";
    return 2;
  }
}
