#pragma once

#include "otfs/config.hpp"
#include "otfs/rng.hpp"
#include "otfs/types.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

namespace otfs {

/// One propagation path. Delay is in transmitter samples (1/f_s) and Doppler in
/// units of delta_f/N; both may be fractional for the time-domain backend.
struct Path {
  cplx gain{1.0, 0.0};
  double delay_tap = 0.0;
  double doppler_tap = 0.0;

  bool is_integer() const;
  int l() const;  ///< throws if the delay is fractional
  int k() const;  ///< throws if the Doppler is fractional
  double delay_s(const SystemConfig& cfg) const { return delay_tap / cfg.f_s; }
  double doppler_hz(const SystemConfig& cfg) const { return doppler_tap * cfg.delta_f / cfg.n_nu; }
};

/// Jakes block-fading recursion h <- rho h + sqrt(1 - rho^2) e, e ~ CN(0, beta).
struct AgingModel {
  double rho = 1.0;
  double doppler_hz = 0.0;
  double beta = 1.0;

  /// rho = J0(2 pi f_q T_block).
  static AgingModel jakes(double doppler_hz, double block_duration_s, double beta = 1.0);
};

struct ChannelSpec {
  std::vector<Path> paths;
  double noise_variance = 0.0;
  double cfo_hz = 0.0;
  double timing_offset_s = 0.0;
  std::optional<AgingModel> aging;

  double total_power() const;
  /// Scales gains so the summed path power is one.
  void normalize_power();
};

class FractionalTapError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Gamma(l, k) x in operator form: inverse Doppler DFT, per-sample Doppler ramp,
/// frame-level cyclic delay, forward Doppler DFT. Gain is not applied.
DDGrid apply_dd_operator(const DDGrid& x, int l, int k);
DDGrid apply_dd_operator(const DDGrid& x, const Path& path, const SystemConfig& cfg);

/// sum_i h_i Gamma_i x + w over integer-tap paths.
DDGrid apply_channel(const DDGrid& x, const ChannelSpec& spec, const SystemConfig& cfg, Rng& rng);

/// Sample-level channel: fractional delays via a Hann-windowed sinc, Doppler
/// ramp referenced to the delayed time, timing offset, CFO and AWGN. The
/// input is treated as one cyclic frame.
TimeSignal apply_time_channel(const TimeSignal& s, const ChannelSpec& spec, const SystemConfig& cfg, Rng& rng);

/// s(n - d) on a cyclic buffer via the windowed-sinc kernel; exact for integer d.
CVec fractional_delay(const CVec& s, double d);

inline constexpr int kSincHalfWidth = 32;
/// Hann-windowed sinc weight at offset x (zero for |x| >= half width).
double windowed_sinc(double x, int half_width = kSincHalfWidth);

void add_awgn(CVec& v, double variance, Rng& rng);
void add_awgn(DDGrid& g, double variance, Rng& rng);

struct TapRange {
  int max_delay_tap = 8;
  int max_doppler_tap = 4;
};

/// LoS path at delay 0 plus n_paths - 1 Rayleigh scatterers with uniform
/// integer taps; mean total power one. k_factor_db = +inf gives the LoS alone.
ChannelSpec gen_rician(const SystemConfig& cfg, double k_factor_db, int n_paths, Rng& rng, TapRange range = {});

ChannelSpec age_channel(const ChannelSpec& spec, const AgingModel& aging, Rng& rng);

void to_json(nlohmann::json& j, const Path& p);
void from_json(const nlohmann::json& j, Path& p);
void to_json(nlohmann::json& j, const ChannelSpec& c);
void from_json(const nlohmann::json& j, ChannelSpec& c);

}  // namespace otfs
