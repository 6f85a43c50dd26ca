#include "otfs/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace otfs::fft {
namespace {

// Plans are created once per shape under a lock; fftw_execute_dft on an
// existing plan is thread-safe.
struct PlanKey {
  int n, howmany, stride, dist, sign;
  auto tie() const { return std::tie(n, howmany, stride, dist, sign); }
  bool operator<(const PlanKey& o) const { return tie() < o.tie(); }
};

class PlanCache {
public:
  ~PlanCache() {
    for (auto& [k, p] : plans_) fftw_destroy_plan(p);
  }

  fftw_plan get(const PlanKey& key) {
    std::lock_guard lock(mu_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const std::size_t span = static_cast<std::size_t>((key.howmany - 1) * key.dist + (key.n - 1) * key.stride + 1);
    std::vector<fftw_complex> scratch(span);
    int n = key.n;
    fftw_plan p = fftw_plan_many_dft(1, &n, key.howmany, scratch.data(), nullptr, key.stride, key.dist,
                                     scratch.data(), nullptr, key.stride, key.dist, key.sign,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

private:
  std::mutex mu_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void run(cplx* data, int n, int howmany, int stride, int dist, Dir dir) {
  if (n <= 0 || howmany <= 0) return;
  const int sign = dir == Dir::forward ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan p = cache().get({n, howmany, stride, dist, sign});
  auto* f = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, f, f);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const std::size_t total = static_cast<std::size_t>((howmany - 1) * dist + (n - 1) * stride + 1);
  for (std::size_t i = 0; i < total; ++i) data[i] *= scale;
}

}  // namespace

void columns(CMat& a, Dir dir) {
  run(a.data(), static_cast<int>(a.rows()), static_cast<int>(a.cols()), 1, static_cast<int>(a.rows()), dir);
}

void rows(CMat& a, Dir dir) {
  run(a.data(), static_cast<int>(a.cols()), static_cast<int>(a.rows()), static_cast<int>(a.rows()), 1, dir);
}

void vector(CVec& v, Dir dir) { run(v.data(), static_cast<int>(v.size()), 1, 1, 1, dir); }

}  // namespace otfs::fft
