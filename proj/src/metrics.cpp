#include "otfs/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace otfs {

double ber(std::span<const std::uint8_t> bits, std::span<const std::uint8_t> bits_ref) {
  if (bits.size() != bits_ref.size()) throw std::invalid_argument("ber: length mismatch");
  if (bits.empty()) return 0.0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) errors += (bits[i] != 0) != (bits_ref[i] != 0);
  return static_cast<double>(errors) / static_cast<double>(bits.size());
}

double rmse(std::span<const double> est, std::span<const double> truth) {
  if (est.size() != truth.size()) throw std::invalid_argument("rmse: length mismatch");
  if (est.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) acc += (est[i] - truth[i]) * (est[i] - truth[i]);
  return std::sqrt(acc / static_cast<double>(est.size()));
}

double empirical_sinr_db(double signal, double interference, double noise) {
  if (interference + noise <= 0.0) throw std::invalid_argument("empirical_sinr_db: zero interference plus noise");
  return 10.0 * std::log10(signal / (interference + noise));
}

Estimate mean_ci(std::span<const double> samples) {
  Estimate e;
  if (samples.empty()) return e;
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double s : samples) sum += s;
  e.value = sum / n;
  double var = 0.0;
  for (double s : samples) var += (s - e.value) * (s - e.value);
  const double half = samples.size() > 1 ? 1.96 * std::sqrt(var / (n - 1.0) / n) : 0.0;
  e.ci_low = e.value - half;
  e.ci_high = e.value + half;
  return e;
}

Estimate proportion_ci(std::uint64_t errors, std::uint64_t count) {
  Estimate e;
  if (count == 0) return e;
  const double n = static_cast<double>(count);
  const double p = static_cast<double>(errors) / n;
  const double z = 1.96, z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  e.value = p;
  e.ci_low = std::max(0.0, centre - half);
  e.ci_high = std::min(1.0, centre + half);
  return e;
}

}  // namespace otfs
