#pragma once

#include "otfs/types.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace otfs {

/// Waveform and receiver parameters. f_s is the transmitter rate; the
/// receivers run at f_s / kappa.
struct SystemConfig {
  int m_tau = 80;
  int n_nu = 80;
  double delta_f = 2.5e6;
  double f_c = 28e9;
  double f_s = 200e6;
  int kappa = 16;
  int mu = 16;
  double pilot_power_ratio_db = 10.0;
  int pilot_doppler_index = 0;

  int frame_len() const { return m_tau * n_nu; }
  /// Delay bins of the reduced-rate grid, M/kappa.
  int reduced_m() const { return m_tau / kappa; }
  /// Pilot period along delay, M/mu.
  int pilot_period() const { return m_tau / mu; }
  double reduced_rate() const { return f_s / kappa; }
  double sample_period() const { return 1.0 / f_s; }
  double symbol_time() const { return 1.0 / delta_f; }
  /// Pilot energy per impulse relative to unit data symbol energy.
  double pilot_energy() const;

  double range_of_tap(double delay_tap) const;
  double velocity_of_tap(double doppler_tap) const;
  double tap_of_range(double range_m) const;
  double tap_of_velocity(double velocity_mps) const;

  static SystemConfig reference() { return {}; }
};

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Throws ConfigError naming the first violated invariant.
void validate(const SystemConfig& cfg);

struct ResolutionReport {
  double range_resolution_m = 0.0;
  double velocity_resolution_mps = 0.0;
  double max_unambiguous_range_m = 0.0;
  double reduced_unambiguous_range_m = 0.0;
};

ResolutionReport resolutions(const SystemConfig& cfg);

struct ParamChoice {
  int m_tau = 0;
  int kappa = 0;
  bool operator==(const ParamChoice&) const = default;
};

/// Number of active pilot subcarriers landing in each folded bin when the
/// pilot train for (m_tau, kappa) is transformed to TF and folded at f_s/kappa.
/// Empty when m_tau is not a multiple of kappa.
std::vector<int> folded_pilot_occupancy(int m_tau, int kappa);

/// Searches kappa (or uses fixed_kappa) and M in ascending order and returns
/// the first pair whose folded pilot occupancy is exactly one per bin.
std::optional<ParamChoice> select_params(int m_min, int m_max, int kappa_max,
                                         std::optional<int> fixed_kappa = std::nullopt);

void to_json(nlohmann::json& j, const SystemConfig& c);
void from_json(const nlohmann::json& j, SystemConfig& c);
void to_json(nlohmann::json& j, const ResolutionReport& r);

}  // namespace otfs
