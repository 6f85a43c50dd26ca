#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace otfs {

/// Fraction of positions where the two bit streams differ.
double ber(std::span<const std::uint8_t> bits, std::span<const std::uint8_t> bits_ref);

/// Root mean square of est - truth, paired by index.
double rmse(std::span<const double> est, std::span<const double> truth);

/// 10 log10(S / (I + N)) from powers.
double empirical_sinr_db(double signal, double interference, double noise);

struct Estimate {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Sample mean with a normal-approximation 95% interval.
Estimate mean_ci(std::span<const double> samples);

/// Wilson 95% interval for a proportion of `errors` in `count` trials.
Estimate proportion_ci(std::uint64_t errors, std::uint64_t count);

}  // namespace otfs
