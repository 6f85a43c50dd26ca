#include "otfs/subnyq.hpp"

#include "otfs/otfs.hpp"

#include <cmath>
#include <set>
#include <string>

namespace otfs {

double alias_frequency(double f0, double fs_prime) {
  if (!(fs_prime > 0.0)) throw std::invalid_argument("alias_frequency: fs_prime must be positive");
  double f = std::fmod(f0, fs_prime);
  if (f < 0.0) f += fs_prime;
  // fmod of an exact multiple can land a rounding step below fs_prime
  if (fs_prime - f < 1e-12 * fs_prime) f = 0.0;
  return f;
}

TimeSignal downsample(const TimeSignal& s, int kappa) {
  if (kappa < 1) throw DimensionError("downsample: kappa must be >= 1");
  if (s.size() % kappa != 0) throw DimensionError("downsample: length not divisible by kappa");
  TimeSignal out{CVec(s.size() / kappa), s.rate_hz / kappa};
  for (Eigen::Index i = 0; i < out.size(); ++i) out.samples(i) = s.samples(i * kappa);
  return out;
}

DDGrid decimate_rows(const DDGrid& y, int kappa) {
  if (kappa < 1 || y.rows() % kappa != 0) throw DimensionError("decimate_rows: kappa must divide M");
  DDGrid out(y.rows() / kappa, y.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r) out.mat().row(r) = y.mat().row(r * kappa);
  return out;
}

AliasPlan build_alias_plan(const SystemConfig& cfg) {
  validate(cfg);
  AliasPlan p;
  p.m_tau = cfg.m_tau;
  p.n_nu = cfg.n_nu;
  p.kappa = cfg.kappa;
  p.mu = cfg.mu;
  p.subband_size = cfg.m_tau / cfg.mu;
  p.pilot_doppler_index = cfg.pilot_doppler_index;
  const double fs_prime = cfg.reduced_rate();

  p.unfold_target.assign(static_cast<std::size_t>(p.subband_size), -1);
  for (int m = 0; m < cfg.m_tau; m += cfg.mu) {
    const double fa = alias_frequency(m * cfg.delta_f, fs_prime);
    const int bin = static_cast<int>(std::lround(fa / cfg.delta_f)) % p.subband_size;
    auto& slot = p.unfold_target[static_cast<std::size_t>(bin)];
    if (slot >= 0)
      throw AliasCollision("subcarriers " + std::to_string(slot) + " and " + std::to_string(m) +
                           " fold to bin " + std::to_string(bin));
    slot = m;
    p.active.push_back(m);
    p.folded_bin.push_back(bin);
  }
  return p;
}

TFGrid fold(const TFGrid& full, const AliasPlan& plan) {
  if (full.rows() != plan.m_tau) throw DimensionError("fold: grid does not have M rows");
  TFGrid out(plan.subband_size, full.cols());
  for (int m = 0; m < plan.m_tau; ++m) out.mat().row(m % plan.subband_size) += full.mat().row(m);
  return out;
}

TFGrid unfold_tf(const TFGrid& folded, const AliasPlan& plan) {
  if (folded.rows() != plan.subband_size) throw DimensionError("unfold_tf: grid does not have M/mu rows");
  TFGrid out(plan.m_tau, folded.cols());
  for (int q = 0; q < plan.subband_size; ++q)
    out.mat().row(plan.unfold_target[static_cast<std::size_t>(q)]) = folded.mat().row(q);
  return out;
}

std::vector<std::pair<int, int>> pilot_support(const AliasPlan& plan, const Tap& tap) {
  std::vector<std::pair<int, int>> cells;
  const int col = pos_mod(plan.pilot_doppler_index + tap.k, plan.n_nu);
  for (int j = 0; j < plan.mu; ++j) cells.emplace_back(pos_mod(tap.l + j * plan.subband_size, plan.m_tau), col);
  return cells;
}

namespace {

// Phase of the full-rate response of a unit pilot impulse at delay j*P after
// Gamma(l, k), evaluated at its landing cell.
cplx pilot_copy_phase(const AliasPlan& plan, const Tap& tap, int j) {
  const int m = plan.m_tau;
  const int n = plan.n_nu;
  const int src = j * plan.subband_size;
  const int L = pos_mod(src + tap.l, m);
  cplx ph = std::polar(1.0, 2.0 * kPi * tap.k * (L - tap.l) / (static_cast<double>(m) * n));
  if (L < tap.l) ph *= std::polar(1.0, -2.0 * kPi * plan.pilot_doppler_index / n);
  return ph;
}

}  // namespace

DDGrid unfold(const DDGrid& y_reduced, const AliasPlan& plan, std::span<const Tap> known_taps) {
  if (y_reduced.rows() != plan.m_tau / plan.kappa || y_reduced.cols() != plan.n_nu)
    throw DimensionError("unfold: reduced grid must be (M/kappa) x N");
  TFGrid folded = isfft(y_reduced);
  folded *= std::sqrt(static_cast<double>(plan.kappa));
  DDGrid y_uf = sfft(unfold_tf(folded, plan));

  std::set<std::pair<int, int>> seen;
  for (const Tap& tap : known_taps) {
    if (!seen.emplace(pos_mod(tap.l, plan.subband_size), pos_mod(tap.k, plan.n_nu)).second)
      throw std::invalid_argument("unfold: known taps share a pilot support");
    const auto cells = pilot_support(plan, tap);
    int captured = -1;
    for (int j = 0; j < plan.mu; ++j)
      if (cells[static_cast<std::size_t>(j)].first % plan.kappa == 0) captured = j;
    const cplx ref = pilot_copy_phase(plan, tap, captured);
    for (int j = 0; j < plan.mu; ++j) {
      const auto [r, c] = cells[static_cast<std::size_t>(j)];
      y_uf(r, c) *= pilot_copy_phase(plan, tap, j) / ref;
    }
  }
  return y_uf;
}

}  // namespace otfs
