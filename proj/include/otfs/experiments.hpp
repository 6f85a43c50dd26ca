#pragma once

#include "otfs/channel.hpp"
#include "otfs/comm.hpp"
#include "otfs/io.hpp"
#include "otfs/pilot.hpp"
#include "otfs/radar.hpp"
#include "otfs/scenario.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <vector>

namespace otfs {

// ---- trial building blocks --------------------------------------------------

enum class Backend { dd, time };
Backend backend_from_string(const std::string& name);

/// Zadoff-Chu root 1 of length kappa.
SpreadCode default_code(const SystemConfig& cfg);

/// One ISAC block: superimposed pilot plus spread random data.
struct TxBlock {
  DDGrid pilot;
  DDGrid data;  ///< spread(x_e)
  DDGrid x_e;
  std::vector<std::uint8_t> bits;

  DDGrid full() const { return pilot + data; }
};
TxBlock make_tx_block(const SystemConfig& cfg, Modulation mod, const SpreadCode& code, Rng& rng);

/// Full-rate received DD grid and its reduced-rate counterpart (rows 0, kappa, ...).
struct Received {
  DDGrid full;
  DDGrid reduced;
};

/// The DD backend needs integer taps; the time backend goes through the
/// sample-level channel. Noise of spec.noise_variance per sample is added
/// at full rate in both cases.
Received propagate(const DDGrid& x, const ChannelSpec& spec, const SystemConfig& cfg, Backend backend, Rng& rng);

/// Noise variance for SNR = E_s / N0 with unit symbol energy.
double noise_variance_for_snr(double snr_db);

/// Radar targets at the nearest integer taps.
std::vector<Path> targets_to_paths(const std::vector<TargetSpec>& targets, const SystemConfig& cfg);

struct RadarTrial {
  DetectResult detection;
  std::vector<Path> truth;
  bool all_within_one_tap = false;
  bool all_exact = false;
};
RadarTrial radar_trial(const SystemConfig& cfg, const std::vector<Path>& truth, std::optional<double> snr_db, Rng& rng,
                       const DetectOptions& opt = {});

/// Data-aided range profile |sum_m conj(a_tau[m kappa]) y[m]|^2 with
/// a_tau the transmitted frame delayed by tau full-rate samples, evaluated at
/// tau = first + i / oversample.
std::vector<double> fine_range_profile(const TimeSignal& y_reduced, const CVec& tx_full, int kappa, double first,
                                       int count, int oversample);

/// Local maxima at or above rel * max, merging neighbours not separated by
/// a dip below dip * (smaller peak).
int count_peaks(const std::vector<double>& profile, double rel = 0.5, double dip = 0.95);

struct ResolutionTrial {
  std::vector<double> profile;
  double first_tau = 0.0;
  int peaks = 0;
};
/// Two static equal in-phase targets `separation_m` apart starting at
/// `first_range_m`, through the fractional time-domain channel.
ResolutionTrial resolution_trial(const SystemConfig& cfg, double first_range_m, double separation_m,
                                 std::optional<double> snr_db, Rng& rng, int oversample = 16, int span_taps = 4);

struct BerTrial {
  std::size_t bits = 0;
  std::size_t errors = 0;
  std::vector<std::size_t> errors_per_iteration;
  std::vector<double> residual_per_iteration;
  std::vector<double> gain_mse_per_iteration;
  int iterations = 0;
};
/// One frame through a Rician channel. Taps are known; gains are either known
/// (perfect) or estimated by the iterative receiver.
BerTrial ber_trial(const SystemConfig& cfg, Modulation mod, double snr_db, bool perfect_csi, const ChannelSource& src,
                   Rng& rng, const DecodeOptions& opt = {});

struct SinrTrial {
  double pilot_signal_full = 0.0, pilot_error_full = 0.0;  ///< per pilot cell powers
  double gain_error_reduced = 0.0;                          ///< |h_hat - h|^2 from the averaged estimate
  double gain_power = 0.0;
  double data_signal_full = 0.0, data_rest_full = 0.0;  ///< rest = pilot + noise
  double data_signal_reduced = 0.0, data_rest_reduced = 0.0;
  double data_cancelled_full = 0.0, data_cancelled_reduced = 0.0;  ///< rest after removing h_hat * pilot
};
SinrTrial sinr_trial(const SystemConfig& cfg, Modulation mod, double snr_db, const Path& path, Rng& rng);

struct PaprTrial {
  double papr = 0.0;
  double bound = 0.0;
};
PaprTrial papr_trial(const SystemConfig& cfg, Modulation mod, Rng& rng);

struct SyncTrial {
  int true_offset = 0;
  double true_cfo_hz = 0.0;
  std::optional<SyncResult> result;  ///< empty on sync failure
  bool timing_ok = false;
  bool cfo_ok = false;
};
/// Preamble plus one block with an integer timing offset in [0, max_offset]
/// and |CFO| in [min_cfo_frac, 1] * max_cfo_hz with random sign.
SyncTrial sync_trial(const SystemConfig& cfg, const Preamble& preamble, double snr_db, int max_offset,
                     double max_cfo_hz, double min_cfo_frac, Rng& rng);

// ---- harness ------------------------------------------------------------------

struct RunOutput {
  ResultTable table;
  nlohmann::json manifest;
};

/// Runs the scenario, reducing trials in index order. Writes results.csv,
/// manifest.json and any experiment artifacts under out_dir when it is non-empty.
RunOutput run(const Scenario& scenario, const std::filesystem::path& out_dir, int threads = 0);

}  // namespace otfs
