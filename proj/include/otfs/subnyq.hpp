#pragma once

#include "otfs/config.hpp"
#include "otfs/types.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace otfs {

/// f0 reduced modulo fs_prime into [0, fs_prime).
double alias_frequency(double f0, double fs_prime);

/// Keeps samples 0, kappa, 2*kappa, ...
TimeSignal downsample(const TimeSignal& s, int kappa);

/// Delay rows 0, kappa, 2*kappa, ... of a full-rate DD grid. Equals the
/// reduced-rate demodulation of the downsampled frame.
DDGrid decimate_rows(const DDGrid& y, int kappa);

class AliasCollision : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Where each active pilot subcarrier lands after folding at f_s/kappa.
struct AliasPlan {
  int m_tau = 0;
  int n_nu = 0;
  int kappa = 1;
  int mu = 1;
  int subband_size = 0;  ///< M/mu, also the number of folded bins
  int pilot_doppler_index = 0;
  std::vector<int> active;         ///< active subcarriers 0, mu, 2mu, ...
  std::vector<int> folded_bin;     ///< folded_bin[i] is the bin of active[i]
  std::vector<int> unfold_target;  ///< unfold_target[q] is the subcarrier restored from bin q
};

/// Throws ConfigError for invalid configs and AliasCollision if two active
/// subcarriers share a folded bin.
AliasPlan build_alias_plan(const SystemConfig& cfg);

/// B_a: unnormalized alias sum of a full TF grid onto the folded band.
TFGrid fold(const TFGrid& full, const AliasPlan& plan);
/// B_u: places folded bin q on subcarrier unfold_target[q]; other rows zero.
TFGrid unfold_tf(const TFGrid& folded, const AliasPlan& plan);

/// Integer tap pair of a known path.
struct Tap {
  int l = 0;
  int k = 0;
  bool operator==(const Tap&) const = default;
};

/// Reduced-rate DD frame (M/kappa x N) to the full unfolded DD grid y_uf.
/// Without known taps every pilot response appears as mu equal-phase replicas
/// of the captured copy. With known taps the replicas on each tap's pilot
/// support are phase-aligned to the full-rate response of that tap.
DDGrid unfold(const DDGrid& y_reduced, const AliasPlan& plan, std::span<const Tap> known_taps = {});

/// Full-grid cells (delay, Doppler) carrying the pilot copies of a tap.
std::vector<std::pair<int, int>> pilot_support(const AliasPlan& plan, const Tap& tap);

}  // namespace otfs
