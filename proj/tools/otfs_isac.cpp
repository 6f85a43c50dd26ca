#include "otfs/experiments.hpp"
#include "otfs/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSync = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-rate OTFS ISAC link simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  int threads = 0;
  auto* run = app.add_subcommand("run", "Run a scenario and write results.csv and manifest.json");
  run->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--trials", trials, "Override the trial count")->check(CLI::PositiveNumber);
  run->add_option("--threads", threads, "Worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);

  std::string sys_path;
  auto* info = app.add_subcommand("resolutions", "Print the resolution report of a system config");
  info->add_option("--config", sys_path, "SystemConfig or scenario JSON (defaults to the reference config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      otfs::Scenario s = otfs::load_scenario(config_path);
      if (seed) s.seed = *seed;
      if (trials) s.trials = *trials;
      const otfs::RunOutput out = otfs::run(s, out_dir, threads);
      std::cout << out.table.to_csv();
    } else if (*info) {
      otfs::SystemConfig cfg;
      if (!sys_path.empty()) {
        std::ifstream f(sys_path);
        nlohmann::json j = nlohmann::json::parse(f);
        cfg = j.contains("system") ? j["system"].get<otfs::SystemConfig>() : j.get<otfs::SystemConfig>();
      }
      otfs::validate(cfg);
      std::cout << nlohmann::json(otfs::resolutions(cfg)).dump(2) << '\n';
    }
  } catch (const otfs::SyncFailure& e) {
    std::cerr << "sync failure: " << e.what() << '\n';
    return kExitSync;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
