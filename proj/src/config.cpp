#include "otfs/config.hpp"

#include "otfs/fft.hpp"
#include "otfs/subnyq.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace otfs {

double SystemConfig::pilot_energy() const { return std::pow(10.0, pilot_power_ratio_db / 10.0); }

double SystemConfig::range_of_tap(double delay_tap) const {
  return delay_tap * kSpeedOfLight / (2.0 * delta_f * m_tau);
}

double SystemConfig::velocity_of_tap(double doppler_tap) const {
  return doppler_tap * kSpeedOfLight * delta_f / (2.0 * f_c * n_nu);
}

double SystemConfig::tap_of_range(double range_m) const {
  return range_m * 2.0 * delta_f * m_tau / kSpeedOfLight;
}

double SystemConfig::tap_of_velocity(double velocity_mps) const {
  return velocity_mps * 2.0 * f_c * n_nu / (kSpeedOfLight * delta_f);
}

void validate(const SystemConfig& c) {
  if (c.m_tau <= 0) throw ConfigError("m_tau must be positive");
  if (c.n_nu <= 0) throw ConfigError("n_nu must be positive");
  if (!(c.delta_f > 0.0)) throw ConfigError("delta_f must be positive");
  if (!(c.f_c > 0.0)) throw ConfigError("f_c must be positive");
  if (c.kappa < 1) throw ConfigError("kappa must be >= 1");
  if (c.m_tau % c.kappa != 0) throw ConfigError("m_tau not divisible by kappa");
  if (c.mu != c.kappa) throw ConfigError("mu != kappa");
  if (c.m_tau % c.mu != 0) throw ConfigError("m_tau not divisible by mu");
  if (std::abs(c.f_s - c.m_tau * c.delta_f) > 1e-9 * c.f_s) throw ConfigError("f_s != m_tau * delta_f");
  if (c.pilot_doppler_index < 0 || c.pilot_doppler_index >= c.n_nu)
    throw ConfigError("pilot_doppler_index out of range");
}

ResolutionReport resolutions(const SystemConfig& c) {
  ResolutionReport r;
  r.range_resolution_m = kSpeedOfLight / (2.0 * c.delta_f * c.m_tau);
  r.velocity_resolution_mps = kSpeedOfLight * c.delta_f / (2.0 * c.f_c * c.n_nu);
  r.max_unambiguous_range_m = kSpeedOfLight / (2.0 * c.delta_f);
  r.reduced_unambiguous_range_m = kSpeedOfLight / (2.0 * c.mu * c.delta_f);
  return r;
}

std::vector<int> folded_pilot_occupancy(int m_tau, int kappa) {
  if (kappa < 1 || m_tau < 1 || m_tau % kappa != 0) return {};
  const int period = m_tau / kappa;
  // Pilot train along delay; one Doppler column is enough for the TF row support.
  CVec train = CVec::Zero(m_tau);
  for (int j = 0; j < kappa; ++j) train(j * period) = 1.0;
  fft::vector(train, fft::Dir::forward);

  // Unit subcarrier spacing: bin q covers [q, q+1) of the folded band.
  const int bins = m_tau / kappa;
  std::vector<int> occupancy(static_cast<std::size_t>(bins), 0);
  const double peak = train.cwiseAbs().maxCoeff();
  for (int m = 0; m < m_tau; ++m) {
    if (std::abs(train(m)) <= 1e-9 * peak) continue;
    const auto bin = static_cast<std::size_t>(std::lround(alias_frequency(m, bins))) % occupancy.size();
    ++occupancy[bin];
  }
  return occupancy;
}

std::optional<ParamChoice> select_params(int m_min, int m_max, int kappa_max, std::optional<int> fixed_kappa) {
  if (m_min > m_max) throw ConfigError("select_params: m_min > m_max");
  if (!fixed_kappa && kappa_max < 2) throw ConfigError("select_params: kappa_max < 2");
  const int k_lo = fixed_kappa ? *fixed_kappa : 2;
  const int k_hi = fixed_kappa ? *fixed_kappa : kappa_max;
  for (int kappa = k_lo; kappa <= k_hi; ++kappa) {
    for (int m = std::max(m_min, 1); m <= m_max; ++m) {
      if (m % kappa != 0) continue;
      const auto occ = folded_pilot_occupancy(m, kappa);
      const bool all_ones = !occ.empty() && std::all_of(occ.begin(), occ.end(), [](int v) { return v == 1; });
      if (all_ones) return ParamChoice{m, kappa};
    }
  }
  return std::nullopt;
}

void to_json(nlohmann::json& j, const SystemConfig& c) {
  j = nlohmann::json{{"m_tau", c.m_tau},
                     {"n_nu", c.n_nu},
                     {"delta_f", c.delta_f},
                     {"f_c", c.f_c},
                     {"f_s", c.f_s},
                     {"kappa", c.kappa},
                     {"mu", c.mu},
                     {"pilot_power_ratio_db", c.pilot_power_ratio_db},
                     {"pilot_doppler_index", c.pilot_doppler_index}};
}

void from_json(const nlohmann::json& j, SystemConfig& c) {
  SystemConfig d;
  c.m_tau = j.value("m_tau", d.m_tau);
  c.n_nu = j.value("n_nu", d.n_nu);
  c.delta_f = j.value("delta_f", d.delta_f);
  c.f_c = j.value("f_c", d.f_c);
  c.kappa = j.value("kappa", d.kappa);
  c.mu = j.value("mu", c.kappa);
  c.f_s = j.value("f_s", c.m_tau * c.delta_f);
  c.pilot_power_ratio_db = j.value("pilot_power_ratio_db", d.pilot_power_ratio_db);
  c.pilot_doppler_index = j.value("pilot_doppler_index", d.pilot_doppler_index);
}

void to_json(nlohmann::json& j, const ResolutionReport& r) {
  j = nlohmann::json{{"range_resolution_m", r.range_resolution_m},
                     {"velocity_resolution_mps", r.velocity_resolution_mps},
                     {"max_unambiguous_range_m", r.max_unambiguous_range_m},
                     {"reduced_unambiguous_range_m", r.reduced_unambiguous_range_m}};
}

}  // namespace otfs
