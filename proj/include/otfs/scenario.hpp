#pragma once

#include "otfs/channel.hpp"
#include "otfs/config.hpp"
#include "otfs/qam.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace otfs {

enum class Experiment { radar_two_target, radar_resolution, ber_sweep, sinr_check, papr_check, sync_check };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& name);

struct TargetSpec {
  double range_m = 0.0;
  double velocity_mps = 0.0;
  cplx gain{1.0, 0.0};
};

/// Where a trial's channel comes from: fixed paths, radar targets mapped to
/// taps, or a Rician generator drawn per trial.
struct ChannelSource {
  enum class Kind { none, paths, targets, rician };
  Kind kind = Kind::none;
  ChannelSpec spec;
  std::vector<TargetSpec> targets;
  double k_factor_db = 10.0;
  int n_paths = 4;
  TapRange range;
};

struct Scenario {
  std::string id = "scenario";
  Experiment experiment = Experiment::radar_two_target;
  SystemConfig system;
  std::vector<Modulation> modulations{Modulation::qpsk};
  std::vector<double> snr_db_grid;
  int trials = 1;
  std::uint64_t seed = 1;
  ChannelSource channel;
  nlohmann::json params = nlohmann::json::object();
  bool dump_surfaces = false;
};

class ScenarioError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Throws ScenarioError or ConfigError.
void validate(const Scenario& s);

void to_json(nlohmann::json& j, const Scenario& s);
void from_json(const nlohmann::json& j, Scenario& s);

Scenario load_scenario(const std::filesystem::path& path);

}  // namespace otfs
