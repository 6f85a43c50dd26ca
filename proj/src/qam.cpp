#include "otfs/qam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace otfs {
namespace {

int side(Modulation mod) { return 1 << (bits_per_symbol(mod) / 2); }

// Gray-coded PAM level index to amplitude -(L-1), ..., L-1.
std::vector<int> gray_levels(int levels) {
  std::vector<int> amp(static_cast<std::size_t>(levels));
  for (int i = 0; i < levels; ++i) {
    const int g = i ^ (i >> 1);
    amp[static_cast<std::size_t>(g)] = 2 * i - (levels - 1);
  }
  return amp;
}

std::vector<cplx> build(Modulation mod) {
  const int b = bits_per_symbol(mod);
  const int levels = side(mod);
  const auto amp = gray_levels(levels);
  const double scale = std::sqrt(2.0 * (levels * levels - 1) / 3.0);
  std::vector<cplx> pts(static_cast<std::size_t>(1 << b));
  for (int label = 0; label < (1 << b); ++label) {
    const int hi = label >> (b / 2);
    const int lo = label & (levels - 1);
    pts[static_cast<std::size_t>(label)] =
        cplx(amp[static_cast<std::size_t>(hi)], amp[static_cast<std::size_t>(lo)]) / scale;
  }
  return pts;
}

// Index of the nearest PAM level for one axis, then back to the Gray label.
int nearest_label(double v, int levels, double scale) {
  const double x = v * scale;
  int i = static_cast<int>(std::lround((x + (levels - 1)) / 2.0));
  i = std::clamp(i, 0, levels - 1);
  return i ^ (i >> 1);
}

}  // namespace

int bits_per_symbol(Modulation mod) {
  switch (mod) {
    case Modulation::qpsk: return 2;
    case Modulation::qam16: return 4;
    case Modulation::qam64: return 6;
  }
  throw std::invalid_argument("unknown modulation");
}

std::string to_string(Modulation mod) {
  switch (mod) {
    case Modulation::qpsk: return "QPSK";
    case Modulation::qam16: return "16QAM";
    case Modulation::qam64: return "64QAM";
  }
  return "?";
}

Modulation modulation_from_string(const std::string& name) {
  if (name == "QPSK" || name == "qpsk") return Modulation::qpsk;
  if (name == "16QAM" || name == "16qam" || name == "16-QAM") return Modulation::qam16;
  if (name == "64QAM" || name == "64qam" || name == "64-QAM") return Modulation::qam64;
  throw std::invalid_argument("unknown modulation: " + name);
}

const std::vector<cplx>& constellation(Modulation mod) {
  static const std::vector<cplx> qpsk = build(Modulation::qpsk);
  static const std::vector<cplx> q16 = build(Modulation::qam16);
  static const std::vector<cplx> q64 = build(Modulation::qam64);
  switch (mod) {
    case Modulation::qpsk: return qpsk;
    case Modulation::qam16: return q16;
    case Modulation::qam64: return q64;
  }
  throw std::invalid_argument("unknown modulation");
}

std::vector<cplx> map_bits(std::span<const std::uint8_t> bits, Modulation mod) {
  const int b = bits_per_symbol(mod);
  if (bits.size() % static_cast<std::size_t>(b) != 0) throw std::invalid_argument("map_bits: partial symbol");
  const auto& pts = constellation(mod);
  std::vector<cplx> out(bits.size() / static_cast<std::size_t>(b));
  for (std::size_t s = 0; s < out.size(); ++s) {
    int label = 0;
    for (int i = 0; i < b; ++i) label = (label << 1) | (bits[s * static_cast<std::size_t>(b) + static_cast<std::size_t>(i)] & 1);
    out[s] = pts[static_cast<std::size_t>(label)];
  }
  return out;
}

std::vector<std::uint8_t> demap_hard(std::span<const cplx> symbols, Modulation mod) {
  const int b = bits_per_symbol(mod);
  const int levels = side(mod);
  const double scale = std::sqrt(2.0 * (levels * levels - 1) / 3.0);
  std::vector<std::uint8_t> bits;
  bits.reserve(symbols.size() * static_cast<std::size_t>(b));
  for (const cplx z : symbols) {
    const int label = (nearest_label(z.real(), levels, scale) << (b / 2)) | nearest_label(z.imag(), levels, scale);
    for (int i = b - 1; i >= 0; --i) bits.push_back(static_cast<std::uint8_t>((label >> i) & 1));
  }
  return bits;
}

cplx slice(cplx z, Modulation mod) {
  const int b = bits_per_symbol(mod);
  const int levels = side(mod);
  const double scale = std::sqrt(2.0 * (levels * levels - 1) / 3.0);
  const int label = (nearest_label(z.real(), levels, scale) << (b / 2)) | nearest_label(z.imag(), levels, scale);
  return constellation(mod)[static_cast<std::size_t>(label)];
}

}  // namespace otfs
