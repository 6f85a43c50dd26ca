#pragma once

#include "otfs/radar.hpp"
#include "otfs/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace otfs {

struct ResultRow {
  std::string scenario_id;
  std::string metric;
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t seed = 0;
};

/// Fixed columns: scenario_id,metric,value,ci_low,ci_high,seed.
struct ResultTable {
  std::vector<ResultRow> rows;

  void add(ResultRow row) { rows.push_back(std::move(row)); }
  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;
};

/// Shortest round-trip decimal form, locale independent.
std::string format_number(double v);

/// Dense surface, one delay row per line; the header row lists Doppler taps.
void write_surface_csv(const RMat& surface, const std::filesystem::path& path, int doppler_offset);

/// range_m,velocity_mps,abs_h,phase_rad,delay_tap,doppler_tap,ambiguous
void write_targets_csv(const std::vector<TargetEstimate>& targets, const std::filesystem::path& path);

}  // namespace otfs
