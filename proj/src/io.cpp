#include "otfs/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace otfs {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return f;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string ResultTable::to_csv() const {
  std::ostringstream os;
  os << "scenario_id,metric,value,ci_low,ci_high,seed\n";
  for (const auto& r : rows)
    os << r.scenario_id << ',' << r.metric << ',' << format_number(r.value) << ',' << format_number(r.ci_low) << ','
       << format_number(r.ci_high) << ',' << r.seed << '\n';
  return os.str();
}

void ResultTable::write_csv(const std::filesystem::path& path) const {
  auto f = open_out(path);
  f << to_csv();
}

void write_surface_csv(const RMat& surface, const std::filesystem::path& path, int doppler_offset) {
  auto f = open_out(path);
  f << "delay_tap";
  for (Eigen::Index c = 0; c < surface.cols(); ++c) f << ',' << (c - doppler_offset);
  f << '\n';
  for (Eigen::Index r = 0; r < surface.rows(); ++r) {
    f << r;
    for (Eigen::Index c = 0; c < surface.cols(); ++c) f << ',' << format_number(surface(r, c));
    f << '\n';
  }
}

void write_targets_csv(const std::vector<TargetEstimate>& targets, const std::filesystem::path& path) {
  auto f = open_out(path);
  f << "range_m,velocity_mps,abs_h,phase_rad,delay_tap,doppler_tap,ambiguous\n";
  for (const auto& t : targets)
    f << format_number(t.range_m) << ',' << format_number(t.velocity_mps) << ',' << format_number(std::abs(t.h_hat))
      << ',' << format_number(std::arg(t.h_hat)) << ',' << t.delay_tap << ',' << t.doppler_tap << ','
      << (t.ambiguous ? 1 : 0) << '\n';
}

}  // namespace otfs
