#include "otfs/scenario.hpp"

#include <array>
#include <fstream>
#include <utility>

namespace otfs {
namespace {

constexpr std::array<std::pair<Experiment, const char*>, 6> kExperiments{{
    {Experiment::radar_two_target, "radar_two_target"},
    {Experiment::radar_resolution, "radar_resolution"},
    {Experiment::ber_sweep, "ber_sweep"},
    {Experiment::sinr_check, "sinr_check"},
    {Experiment::papr_check, "papr_check"},
    {Experiment::sync_check, "sync_check"},
}};

bool needs_snr_grid(Experiment e) {
  return e == Experiment::ber_sweep || e == Experiment::sinr_check || e == Experiment::sync_check;
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& [k, name] : kExperiments)
    if (k == e) return name;
  return "unknown";
}

Experiment experiment_from_string(const std::string& name) {
  for (const auto& [k, n] : kExperiments)
    if (name == n) return k;
  throw ScenarioError("unknown experiment '" + name + "'");
}

void validate(const Scenario& s) {
  validate(s.system);
  if (s.trials < 1) throw ScenarioError("trials must be >= 1");
  if (s.modulations.empty()) throw ScenarioError("at least one modulation is required");
  if (needs_snr_grid(s.experiment) && s.snr_db_grid.empty()) throw ScenarioError("snr_db_grid must be non-empty");
  if (s.channel.kind == ChannelSource::Kind::rician && s.channel.n_paths < 1)
    throw ScenarioError("rician channel needs n_paths >= 1");
  if (s.channel.kind == ChannelSource::Kind::targets && s.channel.targets.empty())
    throw ScenarioError("targets channel needs at least one target");
  if (!s.params.is_object()) throw ScenarioError("params must be an object");
}

void to_json(nlohmann::json& j, const Scenario& s) {
  nlohmann::json mods = nlohmann::json::array();
  for (auto m : s.modulations) mods.push_back(to_string(m));
  nlohmann::json ch;
  switch (s.channel.kind) {
    case ChannelSource::Kind::none: ch = {{"type", "none"}}; break;
    case ChannelSource::Kind::paths:
      ch = s.channel.spec;
      ch["type"] = "paths";
      break;
    case ChannelSource::Kind::targets: {
      nlohmann::json ts = nlohmann::json::array();
      for (const auto& t : s.channel.targets)
        ts.push_back({{"range_m", t.range_m}, {"velocity_mps", t.velocity_mps}, {"gain", {t.gain.real(), t.gain.imag()}}});
      ch = {{"type", "targets"}, {"targets", ts}};
      break;
    }
    case ChannelSource::Kind::rician:
      ch = {{"type", "rician"},
            {"k_factor_db", s.channel.k_factor_db},
            {"n_paths", s.channel.n_paths},
            {"max_delay_tap", s.channel.range.max_delay_tap},
            {"max_doppler_tap", s.channel.range.max_doppler_tap}};
      break;
  }
  j = nlohmann::json{{"id", s.id},
                     {"experiment", to_string(s.experiment)},
                     {"system", s.system},
                     {"modulation", mods},
                     {"snr_db_grid", s.snr_db_grid},
                     {"trials", s.trials},
                     {"seed", s.seed},
                     {"channel", ch},
                     {"params", s.params},
                     {"dump_surfaces", s.dump_surfaces}};
}

void from_json(const nlohmann::json& j, Scenario& s) {
  s.id = j.value("id", std::string("scenario"));
  s.experiment = experiment_from_string(j.at("experiment").get<std::string>());
  s.system = j.value("system", SystemConfig{});
  s.modulations.clear();
  if (j.contains("modulation")) {
    const auto& m = j["modulation"];
    if (m.is_array())
      for (const auto& v : m) s.modulations.push_back(modulation_from_string(v.get<std::string>()));
    else
      s.modulations.push_back(modulation_from_string(m.get<std::string>()));
  } else {
    s.modulations.push_back(Modulation::qpsk);
  }
  s.snr_db_grid = j.value("snr_db_grid", std::vector<double>{});
  s.trials = j.value("trials", 1);
  s.seed = j.value("seed", std::uint64_t{1});
  s.params = j.value("params", nlohmann::json::object());
  s.dump_surfaces = j.value("dump_surfaces", false);

  s.channel = {};
  if (j.contains("channel")) {
    const auto& c = j["channel"];
    const std::string type = c.value("type", std::string("paths"));
    if (type == "none") {
      s.channel.kind = ChannelSource::Kind::none;
    } else if (type == "paths") {
      s.channel.kind = ChannelSource::Kind::paths;
      s.channel.spec = c.get<ChannelSpec>();
    } else if (type == "targets") {
      s.channel.kind = ChannelSource::Kind::targets;
      for (const auto& t : c.at("targets")) {
        TargetSpec ts;
        ts.range_m = t.at("range_m").get<double>();
        ts.velocity_mps = t.value("velocity_mps", 0.0);
        if (t.contains("gain")) {
          const auto& g = t["gain"];
          ts.gain = g.is_array() ? cplx(g.at(0).get<double>(), g.at(1).get<double>()) : cplx(g.get<double>(), 0.0);
        }
        s.channel.targets.push_back(ts);
      }
    } else if (type == "rician") {
      s.channel.kind = ChannelSource::Kind::rician;
      s.channel.k_factor_db = c.value("k_factor_db", 10.0);
      s.channel.n_paths = c.value("n_paths", 4);
      s.channel.range.max_delay_tap = c.value("max_delay_tap", 8);
      s.channel.range.max_doppler_tap = c.value("max_doppler_tap", 4);
    } else {
      throw ScenarioError("unknown channel type '" + type + "'");
    }
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError("cannot open scenario " + path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("scenario parse error: ") + e.what());
  }
  Scenario s = j.get<Scenario>();
  validate(s);
  return s;
}

}  // namespace otfs
