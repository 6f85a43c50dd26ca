#include "otfs/otfs.hpp"

#include "otfs/fft.hpp"

#include <bit>
#include <fstream>

namespace otfs {

TFGrid isfft(const DDGrid& x) {
  CMat a = x.mat();
  fft::columns(a, fft::Dir::forward);
  fft::rows(a, fft::Dir::inverse);
  return TFGrid(std::move(a));
}

DDGrid sfft(const TFGrid& y) {
  CMat a = y.mat();
  fft::columns(a, fft::Dir::inverse);
  fft::rows(a, fft::Dir::forward);
  return DDGrid(std::move(a));
}

TimeSignal heisenberg(const TFGrid& x, double rate_hz) {
  CMat a = x.mat();
  fft::columns(a, fft::Dir::inverse);
  return {Eigen::Map<const CVec>(a.data(), a.size()), rate_hz};
}

TFGrid wigner(const TimeSignal& r, int m) {
  if (m <= 0 || r.size() == 0 || r.size() % m != 0)
    throw DimensionError("wigner: signal length is not a whole number of blocks");
  CMat a = Eigen::Map<const CMat>(r.samples.data(), m, r.size() / m);
  fft::columns(a, fft::Dir::forward);
  return TFGrid(std::move(a));
}

TimeSignal modulate(const DDGrid& x, double rate_hz) { return heisenberg(isfft(x), rate_hz); }

DDGrid demodulate(const TimeSignal& r, int m) { return sfft(wigner(r, m)); }

void write_iq(const TimeSignal& s, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little, "IQ dump assumes a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(s.samples.data()),
            static_cast<std::streamsize>(s.samples.size() * sizeof(cplx)));
}

TimeSignal read_iq(const std::filesystem::path& path, double rate_hz) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes % sizeof(cplx) != 0) throw std::runtime_error("IQ file size is not a multiple of 16 bytes");
  TimeSignal s{CVec(static_cast<Eigen::Index>(bytes / sizeof(cplx))), rate_hz};
  in.seekg(0);
  in.read(reinterpret_cast<char*>(s.samples.data()), static_cast<std::streamsize>(bytes));
  return s;
}

}  // namespace otfs
