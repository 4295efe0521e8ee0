// Command-line front end for the experiment harness.
//
//   cml --config sweep.cfg --k 10 --k 20 --out results/
//
// Every config key is also a flag (underscores spelled as dashes). Flags are
// applied after the config file; a grid flag replaces the file's grid.

#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cml/errors.hpp"
#include "cml/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Compressive Mahalanobis metric learning experiments"};
  std::string config_path;
  app.add_option("--config", config_path, "key=value config file");

  std::map<std::string, std::vector<std::string>> flag_values;
  for (auto key : cml::config_keys()) {
    std::string flag(key);
    for (char& c : flag)
      if (c == '_') c = '-';
    app.add_option("--" + flag, flag_values[std::string(key)], "sets " + std::string(key))
        ->take_all()
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cml::kExitOk : cml::kExitConfig;
  }

  try {
    cml::ExperimentConfig cfg = config_path.empty() ? cml::ExperimentConfig{} : cml::load_config_file(config_path);
    for (const auto& [key, values] : flag_values) {
      if (values.empty()) continue;
      cml::reset_grid(cfg, key);
      for (const auto& v : values) cml::apply_setting(cfg, key, v);
    }
    return cml::run_experiment(cfg);
  } catch (const cml::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return cml::kExitConfig;
  } catch (const cml::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return cml::kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cml::kExitRuntime;
  }
}
