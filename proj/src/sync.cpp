#include "otfs/channel.hpp"
#include "otfs/comm.hpp"
#include "otfs/fft.hpp"

#include <algorithm>
#include <cmath>

namespace otfs {

TimeSignal interpolate_full_rate(const TimeSignal& y, int kappa) {
  if (kappa < 1) throw DimensionError("interpolate_full_rate: kappa must be >= 1");
  if (kappa == 1) return y;
  const Eigen::Index len = y.size();
  TimeSignal out{CVec::Zero(len * kappa), y.rate_hz * kappa};
  const double k_d = kappa;
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    const Eigen::Index centre = k / kappa;
    const Eigen::Index lo = std::max<Eigen::Index>(0, centre - kSincHalfWidth);
    const Eigen::Index hi = std::min<Eigen::Index>(len - 1, centre + kSincHalfWidth);
    cplx acc = 0.0;
    for (Eigen::Index m = lo; m <= hi; ++m)
      acc += y.samples(m) * windowed_sinc(static_cast<double>(k - m * kappa) / k_d);
    out.samples(k) = acc;
  }
  return out;
}

TimingEstimate estimate_timing(const TimeSignal& y_interp, const CVec& x_ref, int mainlobe) {
  const Eigen::Index lags = y_interp.size() - x_ref.size() + 1;
  if (x_ref.size() == 0 || lags < 1) throw DimensionError("estimate_timing: reference longer than signal");
  // R[l] = sum_n conj(x[n]) y[n + l] by FFT; the pad keeps the wanted lags free of wrap-around.
  Eigen::Index n = 1;
  while (n < y_interp.size() + x_ref.size()) n <<= 1;
  CVec fy = CVec::Zero(n), fx = CVec::Zero(n);
  fy.head(y_interp.size()) = y_interp.samples;
  fx.head(x_ref.size()) = x_ref;
  fft::vector(fy, fft::Dir::forward);
  fft::vector(fx, fft::Dir::forward);
  CVec r = fy.cwiseProduct(fx.conjugate());
  fft::vector(r, fft::Dir::inverse);
  const double scale = std::sqrt(static_cast<double>(n));
  std::vector<double> mag(static_cast<std::size_t>(lags));
  for (Eigen::Index l = 0; l < lags; ++l) mag[static_cast<std::size_t>(l)] = scale * std::abs(r(l));
  const auto peak_it = std::max_element(mag.begin(), mag.end());
  TimingEstimate t;
  t.offset = static_cast<int>(peak_it - mag.begin());
  t.peak = *peak_it;
  double side = 0.0;
  for (Eigen::Index l = 0; l < lags; ++l)
    if (std::abs(l - t.offset) > mainlobe) side = std::max(side, mag[static_cast<std::size_t>(l)]);
  t.psr_db = side > 0.0 ? 20.0 * std::log10(t.peak / side) : 300.0;
  t.fine_offset = t.offset;
  if (t.offset > 0 && t.offset + 1 < lags) {
    const double a = mag[static_cast<std::size_t>(t.offset - 1)], b = t.peak, c = mag[static_cast<std::size_t>(t.offset + 1)];
    const double den = a - 2.0 * b + c;
    if (den < 0.0) t.fine_offset += 0.5 * (a - c) / den;
  }
  return t;
}

namespace {

struct CfoFit {
  double f = 0.0;
  double metric = 0.0;  ///< |sum z e^{-j 2 pi f t}| at the estimate
};

CfoFit fit_cfo(const TimeSignal& y_reduced, const CVec& x_ref_full, int tau_hat, int kappa) {
  const double fs_r = y_reduced.rate_hz;
  if (!(fs_r > 0.0)) throw std::invalid_argument("estimate_cfo: reduced rate not set");
  // z_m = y[m] conj(x(m T' - tau)) over the overlap of the reference.
  std::vector<cplx> z;
  std::vector<double> t;
  for (Eigen::Index m = 0; m < y_reduced.size(); ++m) {
    const long long n = m * static_cast<long long>(kappa) - tau_hat;
    if (n < 0 || n >= x_ref_full.size()) continue;
    z.push_back(y_reduced.samples(m) * std::conj(x_ref_full(n)));
    t.push_back(static_cast<double>(m) / fs_r);
  }
  if (z.size() < 2) throw std::invalid_argument("estimate_cfo: reference does not overlap the signal");

  // Likelihood |sum z e^{-j2 pi f t}| on a zero-padded DFT grid.
  int pad = 1;
  while (pad < 8 * static_cast<int>(z.size())) pad <<= 1;
  CVec spec = CVec::Zero(pad);
  for (std::size_t i = 0; i < z.size(); ++i) spec(static_cast<Eigen::Index>(i)) = z[i];
  fft::vector(spec, fft::Dir::forward);
  Eigen::Index best = 0;
  spec.cwiseAbs2().maxCoeff(&best);
  double f = (best < pad / 2 ? best : best - pad) * fs_r / pad;

  // Refine: remove the common phase about the weighted mean time and fit the
  // residual phase slope from the imaginary parts.
  const double t0 = t.front();
  for (int pass = 0; pass < 3; ++pass) {
    std::vector<cplx> w(z.size());
    double sw = 0.0, st = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      w[i] = z[i] * std::polar(1.0, -2.0 * kPi * f * (t[i] - t0));
      const double a2 = std::norm(w[i]);
      sw += a2;
      st += a2 * t[i];
    }
    if (!(sw > 0.0)) break;
    const double tbar = st / sw;
    cplx common = 0.0;
    for (const cplx& v : w) common += v;
    const cplx rot = std::polar(1.0, -std::arg(common));
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double a = std::abs(w[i]);
      const double dt = t[i] - tbar;
      num += dt * a * (w[i] * rot).imag();
      den += dt * dt * a * a;
    }
    if (!(den > 0.0)) break;
    f += num / (2.0 * kPi * den);
  }
  cplx acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) acc += z[i] * std::polar(1.0, -2.0 * kPi * f * (t[i] - t0));
  return {f, std::abs(acc)};
}

}  // namespace

double estimate_cfo(const TimeSignal& y_reduced, const CVec& x_ref_full, int tau_hat, int kappa) {
  return fit_cfo(y_reduced, x_ref_full, tau_hat, kappa).f;
}

SyncResult synchronize(const TimeSignal& y_reduced, const Preamble& preamble, const SystemConfig& cfg,
                       double min_psr_db) {
  const int len = static_cast<int>(preamble.chirp_up.size());
  if (preamble.chirp_down.size() != len) throw DimensionError("synchronize: chirp lengths differ");
  // Leading zeros let a frequency offset pull the up-chirp peak before sample 0.
  const int lead = len / 4;
  const TimeSignal interp = interpolate_full_rate(y_reduced, cfg.kappa);
  TimeSignal y_full{CVec::Zero(interp.size() + lead), interp.rate_hz};
  y_full.samples.tail(interp.size()) = interp.samples;
  const TimingEstimate up = estimate_timing(y_full, preamble.chirp_up, 2 * cfg.kappa);
  const TimingEstimate down = estimate_timing(y_full, preamble.chirp_down, 2 * cfg.kappa);
  const double psr = std::min(up.psr_db, down.psr_db);
  if (psr < min_psr_db) throw SyncFailure("synchronization peak-to-sidelobe below threshold");

  // A frequency offset moves the up and down chirp peaks by equal and
  // opposite amounts; their mean is the timing, their gap the coarse CFO.
  const double t_up = up.fine_offset - lead;
  const double t_down = down.fine_offset - lead - len;
  const double tau = 0.5 * (t_up + t_down);

  // The full preamble likelihood picks among the neighbouring integer lags.
  const int centre = static_cast<int>(std::lround(tau));
  int best_tau = centre;
  CfoFit best;
  best.metric = -1.0;
  for (int cand = centre - 1; cand <= centre + 1; ++cand) {
    const CfoFit fit = fit_cfo(y_reduced, preamble.samples.samples, cand, cfg.kappa);
    if (fit.metric > best.metric) {
      best = fit;
      best_tau = cand;
    }
  }

  SyncResult r;
  r.timing_offset_samples = best_tau;
  r.timing_offset_s = best_tau / cfg.f_s;
  r.correlation_peak = 0.5 * (up.peak + down.peak);
  r.confidence = psr;
  r.cfo_hz = best.f;
  return r;
}

}  // namespace otfs
