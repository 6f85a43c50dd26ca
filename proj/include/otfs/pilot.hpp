#pragma once

#include "otfs/config.hpp"
#include "otfs/qam.hpp"
#include "otfs/rng.hpp"
#include "otfs/types.hpp"

#include <cstdint>
#include <vector>

namespace otfs {

/// Impulse train of amplitude sqrt(e_p) at delays 0, M/mu, 2M/mu, ... on the
/// pilot Doppler column.
DDGrid make_pilot_grid(const SystemConfig& cfg, double e_p);

/// Convenience: pilot energy from cfg.pilot_power_ratio_db (unit data energy).
inline DDGrid make_pilot_grid(const SystemConfig& cfg) { return make_pilot_grid(cfg, cfg.pilot_energy()); }

struct SpreadCode {
  int root = 0;
  std::vector<cplx> values;

  int length() const { return static_cast<int>(values.size()); }
};

/// S_n = exp(-j pi r n (n + 1) / length), n = 1..length.
SpreadCode zadoff_chu(int root, int length);

/// Stacks S_j * x_e as delay slice j; output has length * rows(x_e) rows.
DDGrid spread(const DDGrid& x_e, const SpreadCode& code);
/// Mean of conj(S_j) * slice_j.
DDGrid despread(const DDGrid& x, const SpreadCode& code);

/// spread(x_e) + pilot. Requires code length == kappa.
DDGrid assemble_block(const DDGrid& x_e, const SpreadCode& code, const DDGrid& pilot, const SystemConfig& cfg);

/// Random effective data grid (M/kappa x N) and the bits it carries.
struct DataBlock {
  DDGrid symbols;
  std::vector<std::uint8_t> bits;
};
DataBlock random_data(const SystemConfig& cfg, Modulation mod, Rng& rng);
DDGrid symbols_to_grid(const std::vector<cplx>& symbols, int rows, int cols);

/// Up and down chirps followed by a pseudo-random QPSK OTFS training block.
struct Preamble {
  CVec chirp_up;
  CVec chirp_down;
  DDGrid training;
  TimeSignal samples;
};

inline constexpr int kDefaultChirpLength = 4096;
/// Fraction of the reduced band f_s / kappa the sync chirps sweep.
inline constexpr double kChirpBandFraction = 0.8;

/// Unit-modulus linear chirp over `len` full-rate samples sweeping
/// [-b/2, b/2] * f_s / kappa upward (or downward), b = band_fraction.
CVec make_chirp(int len, int kappa, bool up = true, double band_fraction = kChirpBandFraction);

/// Chirp rate in cycles per sample squared.
inline double chirp_rate(int len, int kappa, double band_fraction = kChirpBandFraction) {
  return band_fraction / (static_cast<double>(kappa) * len);
}

Preamble build_preamble(const SystemConfig& cfg, int chirp_len, std::uint64_t training_seed);
inline Preamble build_preamble(const SystemConfig& cfg) {
  return build_preamble(cfg, kDefaultChirpLength, 0x747261696eULL);
}

/// A preamble followed by ISAC blocks, concatenated in time.
struct Frame {
  Preamble preamble;
  std::vector<DDGrid> blocks;

  TimeSignal samples(double rate_hz) const;
};

double papr(const TimeSignal& s);
/// N * max|X|^2 / mean|X|^2 over the block.
double papr_bound(const DDGrid& block);

}  // namespace otfs
