#pragma once

#include "otfs/types.hpp"

#include <filesystem>

namespace otfs {

/// X_TF = F_M X_DD F_N^H (unitary DFTs).
TFGrid isfft(const DDGrid& x);
/// X_DD = F_M^H Y_TF F_N.
DDGrid sfft(const TFGrid& y);

/// Rectangular-pulse modulator: block n is the inverse M-point DFT of TF column n.
TimeSignal heisenberg(const TFGrid& x, double rate_hz);
/// Per-block forward M-point DFT; `m` is the block length.
TFGrid wigner(const TimeSignal& r, int m);

/// heisenberg(isfft(x)).
TimeSignal modulate(const DDGrid& x, double rate_hz);
/// sfft(wigner(r, m)). Works unchanged on reduced-rate frames with m = M/kappa.
DDGrid demodulate(const TimeSignal& r, int m);

/// Interleaved little-endian float64 (re, im) dump.
void write_iq(const TimeSignal& s, const std::filesystem::path& path);
TimeSignal read_iq(const std::filesystem::path& path, double rate_hz);

}  // namespace otfs
