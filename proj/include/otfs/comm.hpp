#pragma once

#include "otfs/config.hpp"
#include "otfs/dd_kernels.hpp"
#include "otfs/pilot.hpp"
#include "otfs/qam.hpp"
#include "otfs/subnyq.hpp"
#include "otfs/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace otfs {

// ---- synchronization ------------------------------------------------------

/// y[k] = sum_m y_r[m] sinc((k - m kappa) / kappa), Hann-windowed kernel of
/// 32 reduced-rate samples per side. Output rate is input rate * kappa.
TimeSignal interpolate_full_rate(const TimeSignal& y, int kappa);

struct TimingEstimate {
  int offset = 0;         ///< start of x_ref inside y, in samples
  double peak = 0.0;      ///< |R_yx| at the peak
  double psr_db = 0.0;    ///< peak to largest sidelobe outside the main lobe
  double fine_offset = 0.0;  ///< parabolic refinement of offset
};

/// Argmax of |sum_n y[n + l] conj(x[n])| over all full-overlap lags.
/// `mainlobe` samples either side of the peak are excluded from the sidelobe search.
TimingEstimate estimate_timing(const TimeSignal& y_interp, const CVec& x_ref, int mainlobe = 1);

/// CFO from the reduced-rate samples y against the full-rate reference
/// starting at full-rate sample tau_hat: likelihood maximization over a
/// frequency grid, then the weighted imaginary-part refinement about it.
double estimate_cfo(const TimeSignal& y_reduced, const CVec& x_ref_full, int tau_hat, int kappa);

struct SyncResult {
  double timing_offset_s = 0.0;
  int timing_offset_samples = 0;
  double cfo_hz = 0.0;
  double correlation_peak = 0.0;
  double confidence = 0.0;  ///< peak-to-sidelobe ratio, dB
};

class SyncFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Timing from the up and down chirps (via full-rate interpolation), then a
/// joint lag and CFO fit over the whole preamble. Throws SyncFailure when
/// either chirp's peak-to-sidelobe ratio is below min_psr_db.
SyncResult synchronize(const TimeSignal& y_reduced, const Preamble& preamble, const SystemConfig& cfg,
                       double min_psr_db = 6.0);

// ---- channel estimation and detection -------------------------------------

class ConditioningError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Per-path gains from an unfolded frame: least squares over the pilot
/// copies, which is the mean of y_uf / template over the mu copies when the
/// paths' pilot supports are disjoint. Templates are the unfolded reduced-rate
/// pilot responses.
std::vector<cplx> estimate_coefficients(const DDGrid& y_uf, std::span<const Tap> taps, const DDGrid& pilot,
                                        const SystemConfig& cfg);

/// Same estimator on a full-rate received DD grid (templates Gamma x_p).
std::vector<cplx> estimate_coefficients_full_rate(const DDGrid& y, std::span<const Tap> taps, const DDGrid& pilot,
                                                  const SystemConfig& cfg);

/// Reduced-rate pilot contribution sum_i h_i D Gamma_i x_p.
DDGrid pilot_response(std::span<const Tap> taps, std::span<const cplx> gains, const DDGrid& pilot,
                      const SystemConfig& cfg);

struct EffectiveChannel {
  CMat g_tilde;  ///< (MN/kappa) x ((M/kappa) N), column index of vec(x_e)
  std::vector<Tap> taps;
  std::vector<cplx> gains;
  SpreadCode code;
};

/// Dense G~ = sum_i h_i D Gamma_i (spread) built column by column from the
/// unit basis of the effective data grid.
EffectiveChannel build_effective_channel(std::span<const Tap> taps, std::span<const cplx> gains,
                                         const SpreadCode& code, const SystemConfig& cfg,
                                         Exec exec = Exec::parallel);

struct Detection {
  CVec soft;
  std::vector<cplx> hard;
};

/// (G^H G + s2 I)^{-1} G^H y with nearest-point decisions. noise_var == 0 solves
/// the normal equations unregularized and throws ConditioningError when
/// G is rank deficient.
Detection mmse_detect(const DDGrid& y_reduced, const EffectiveChannel& ch, double noise_var, Modulation mod);

/// y - G x_hat.
DDGrid cancel_interference(const DDGrid& y_reduced, const EffectiveChannel& ch, const CVec& x_hat);

struct DecodeOptions {
  double eps = 1e-3;  ///< relative gain change for convergence
  int max_iter = 10;
  std::optional<std::vector<cplx>> known_gains;  ///< perfect channel knowledge
};

struct IterationRecord {
  std::vector<cplx> gains;
  std::vector<std::uint8_t> bits;
  double residual_energy = 0.0;
};

struct DecodeResult {
  std::vector<std::uint8_t> bits;
  std::vector<cplx> symbols;
  std::vector<cplx> gains;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
};

/// Iterative channel estimation and data detection on a reduced-rate frame.
DecodeResult iterative_decode(const DDGrid& y_reduced, std::span<const Tap> taps, const DDGrid& pilot,
                              const SpreadCode& code, const SystemConfig& cfg, Modulation mod, double noise_var,
                              const DecodeOptions& opt = {});

/// Tap acquisition from the reduced-rate observation of the training block.
std::vector<Tap> acquire_taps(const DDGrid& y_training_reduced, const DDGrid& training, const SystemConfig& cfg,
                              int max_paths, double false_alarm = 1e-3);

}  // namespace otfs
