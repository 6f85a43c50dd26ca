#include "otfs/channel.hpp"

#include "otfs/fft.hpp"

#include <cmath>
#include <limits>

namespace otfs {

bool Path::is_integer() const {
  return delay_tap == std::round(delay_tap) && doppler_tap == std::round(doppler_tap);
}

int Path::l() const {
  if (delay_tap != std::round(delay_tap)) throw FractionalTapError("fractional delay needs the time-domain backend");
  return static_cast<int>(delay_tap);
}

int Path::k() const {
  if (doppler_tap != std::round(doppler_tap))
    throw FractionalTapError("fractional Doppler needs the time-domain backend");
  return static_cast<int>(doppler_tap);
}

AgingModel AgingModel::jakes(double doppler_hz, double block_duration_s, double beta) {
  return {std::cyl_bessel_j(0.0, 2.0 * kPi * doppler_hz * block_duration_s), doppler_hz, beta};
}

double ChannelSpec::total_power() const {
  double p = 0.0;
  for (const auto& path : paths) p += std::norm(path.gain);
  return p;
}

void ChannelSpec::normalize_power() {
  const double p = total_power();
  if (p <= 0.0) return;
  const double s = 1.0 / std::sqrt(p);
  for (auto& path : paths) path.gain *= s;
}

DDGrid apply_dd_operator(const DDGrid& x, int l, int k) {
  const int m = static_cast<int>(x.rows());
  const int n = static_cast<int>(x.cols());
  if (l < 0 || l >= m) throw DimensionError("delay tap outside [0, M)");
  const long long mn = static_cast<long long>(m) * n;

  // (F_N^H kron I) x : time samples, block c in column c.
  CMat t = x.mat();
  fft::rows(t, fft::Dir::inverse);
  const CVec s = Eigen::Map<const CVec>(t.data(), t.size());

  // Delta^k first, then Pi^l.
  CVec r(mn);
  for (long long i = 0; i < mn; ++i) {
    const long long src = pos_mod(i - l, mn);
    const double ph = 2.0 * kPi * static_cast<double>(pos_mod(static_cast<long long>(k) * src, mn)) / static_cast<double>(mn);
    r(i) = std::polar(1.0, ph) * s(src);
  }

  CMat out = Eigen::Map<const CMat>(r.data(), m, n);
  fft::rows(out, fft::Dir::forward);
  return DDGrid(std::move(out));
}

DDGrid apply_dd_operator(const DDGrid& x, const Path& path, const SystemConfig& cfg) {
  if (x.rows() != cfg.m_tau || x.cols() != cfg.n_nu) throw DimensionError("DD grid does not match config");
  const int k = path.k();
  if (k < -cfg.n_nu / 2 || k >= cfg.n_nu - cfg.n_nu / 2) throw DimensionError("Doppler tap outside [-N/2, N/2)");
  return path.gain * apply_dd_operator(x, path.l(), k);
}

DDGrid apply_channel(const DDGrid& x, const ChannelSpec& spec, const SystemConfig& cfg, Rng& rng) {
  DDGrid y(x.rows(), x.cols());
  for (const auto& p : spec.paths) y += apply_dd_operator(x, p, cfg);
  if (spec.noise_variance > 0.0) add_awgn(y, spec.noise_variance, rng);
  return y;
}

double windowed_sinc(double x, int half_width) {
  const double ax = std::abs(x);
  if (ax >= half_width) return 0.0;
  const double sinc = ax < 1e-12 ? 1.0 : std::sin(kPi * x) / (kPi * x);
  return sinc * 0.5 * (1.0 + std::cos(kPi * x / half_width));
}

CVec fractional_delay(const CVec& s, double d) {
  const long long len = s.size();
  CVec out = CVec::Zero(len);
  if (len == 0) return out;
  const double di = std::floor(d);
  const double fr = d - di;
  const long long shift = static_cast<long long>(di);
  if (fr == 0.0) {
    for (long long n = 0; n < len; ++n) out(n) = s(pos_mod(n - shift, len));
    return out;
  }
  // out[n] = sum_t w(t - fr) s[n - shift - t]
  std::vector<std::pair<long long, double>> taps;
  for (int t = -kSincHalfWidth + 1; t <= kSincHalfWidth; ++t) taps.emplace_back(t, windowed_sinc(t - fr));
  for (long long n = 0; n < len; ++n) {
    cplx acc = 0.0;
    for (const auto& [t, w] : taps) acc += w * s(pos_mod(n - shift - t, len));
    out(n) = acc;
  }
  return out;
}

TimeSignal apply_time_channel(const TimeSignal& s, const ChannelSpec& spec, const SystemConfig& cfg, Rng& rng) {
  const double rate = s.rate_hz > 0.0 ? s.rate_hz : cfg.f_s;
  const Eigen::Index len = s.size();
  TimeSignal r{CVec::Zero(len), rate};

  for (const auto& p : spec.paths) {
    const double d = p.delay_s(cfg) * rate;
    const double nu = p.doppler_hz(cfg);
    const CVec delayed = fractional_delay(s.samples, d);
    for (Eigen::Index n = 0; n < len; ++n)
      r.samples(n) += p.gain * std::polar(1.0, 2.0 * kPi * nu * (static_cast<double>(n) - d) / rate) * delayed(n);
  }

  if (spec.timing_offset_s != 0.0) r.samples = fractional_delay(r.samples, spec.timing_offset_s * rate);
  if (spec.cfo_hz != 0.0) {
    for (Eigen::Index n = 0; n < len; ++n)
      r.samples(n) *= std::polar(1.0, 2.0 * kPi * spec.cfo_hz * static_cast<double>(n) / rate);
  }
  if (spec.noise_variance > 0.0) add_awgn(r.samples, spec.noise_variance, rng);
  return r;
}

void add_awgn(CVec& v, double variance, Rng& rng) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += rng.cnormal(variance);
}

void add_awgn(DDGrid& g, double variance, Rng& rng) {
  CMat& m = g.mat();
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += rng.cnormal(variance);
}

ChannelSpec gen_rician(const SystemConfig& cfg, double k_factor_db, int n_paths, Rng& rng, TapRange range) {
  if (n_paths < 1) throw std::invalid_argument("gen_rician: n_paths must be >= 1");
  const int max_l = std::min(range.max_delay_tap, cfg.m_tau - 1);
  const int max_k = std::min(range.max_doppler_tap, cfg.n_nu / 2 - 1);
  ChannelSpec spec;
  const bool los_only = std::isinf(k_factor_db) && k_factor_db > 0.0;
  const double k_lin = los_only ? std::numeric_limits<double>::infinity() : std::pow(10.0, k_factor_db / 10.0);
  const int scatterers = los_only ? 0 : n_paths - 1;
  const double los_power = scatterers == 0 ? 1.0 : k_lin / (k_lin + 1.0);

  Path los;
  los.gain = std::polar(std::sqrt(los_power), rng.uniform(0.0, 2.0 * kPi));
  los.delay_tap = 0.0;
  los.doppler_tap = rng.uniform_int(-max_k, max_k);
  spec.paths.push_back(los);

  for (int i = 0; i < scatterers; ++i) {
    Path p;
    p.gain = rng.cnormal(1.0 / ((k_lin + 1.0) * scatterers));
    p.delay_tap = rng.uniform_int(0, max_l);
    p.doppler_tap = rng.uniform_int(-max_k, max_k);
    spec.paths.push_back(p);
  }
  return spec;
}

ChannelSpec age_channel(const ChannelSpec& spec, const AgingModel& aging, Rng& rng) {
  if (std::abs(aging.rho) > 1.0) throw std::invalid_argument("aging: |rho| > 1");
  ChannelSpec out = spec;
  const double innov = std::sqrt(1.0 - aging.rho * aging.rho);
  for (auto& p : out.paths) p.gain = aging.rho * p.gain + innov * rng.cnormal(aging.beta);
  return out;
}

void to_json(nlohmann::json& j, const Path& p) {
  j = nlohmann::json{{"gain", {p.gain.real(), p.gain.imag()}}, {"delay_tap", p.delay_tap}, {"doppler_tap", p.doppler_tap}};
}

void from_json(const nlohmann::json& j, Path& p) {
  const auto& g = j.at("gain");
  p.gain = g.is_array() ? cplx(g.at(0).get<double>(), g.at(1).get<double>()) : cplx(g.get<double>(), 0.0);
  p.delay_tap = j.value("delay_tap", 0.0);
  p.doppler_tap = j.value("doppler_tap", 0.0);
}

void to_json(nlohmann::json& j, const ChannelSpec& c) {
  j = nlohmann::json{{"paths", c.paths},
                     {"noise_variance", c.noise_variance},
                     {"cfo_hz", c.cfo_hz},
                     {"timing_offset_s", c.timing_offset_s}};
  if (c.aging) j["aging"] = {{"rho", c.aging->rho}, {"doppler_hz", c.aging->doppler_hz}, {"beta", c.aging->beta}};
}

void from_json(const nlohmann::json& j, ChannelSpec& c) {
  c.paths = j.value("paths", std::vector<Path>{});
  c.noise_variance = j.value("noise_variance", 0.0);
  c.cfo_hz = j.value("cfo_hz", 0.0);
  c.timing_offset_s = j.value("timing_offset_s", 0.0);
  if (j.contains("aging")) {
    const auto& a = j["aging"];
    c.aging = AgingModel{a.value("rho", 1.0), a.value("doppler_hz", 0.0), a.value("beta", 1.0)};
  }
}

}  // namespace otfs
