#include "otfs/pilot.hpp"

#include "otfs/otfs.hpp"

#include <cmath>
#include <stdexcept>

namespace otfs {

DDGrid make_pilot_grid(const SystemConfig& cfg, double e_p) {
  validate(cfg);
  DDGrid p(cfg.m_tau, cfg.n_nu);
  const double amp = std::sqrt(e_p);
  for (int j = 0; j < cfg.mu; ++j) p(j * cfg.pilot_period(), cfg.pilot_doppler_index) = amp;
  return p;
}

SpreadCode zadoff_chu(int root, int length) {
  if (length < 1) throw std::invalid_argument("zadoff_chu: length must be >= 1");
  SpreadCode c{root, std::vector<cplx>(static_cast<std::size_t>(length))};
  for (int n = 1; n <= length; ++n) {
    // reduce r n (n+1) modulo 2 * length to keep the phase argument small
    const long long e = pos_mod(static_cast<long long>(root) * n * (n + 1), 2LL * length);
    c.values[static_cast<std::size_t>(n - 1)] = std::polar(1.0, -kPi * static_cast<double>(e) / length);
  }
  return c;
}

DDGrid spread(const DDGrid& x_e, const SpreadCode& code) {
  if (code.values.empty()) throw std::invalid_argument("spread: empty code");
  const Eigen::Index rows = x_e.rows();
  DDGrid out(rows * code.length(), x_e.cols());
  for (int j = 0; j < code.length(); ++j)
    out.mat().middleRows(j * rows, rows) = code.values[static_cast<std::size_t>(j)] * x_e.mat();
  return out;
}

DDGrid despread(const DDGrid& x, const SpreadCode& code) {
  if (code.values.empty() || x.rows() % code.length() != 0) throw DimensionError("despread: rows not a multiple of code length");
  const Eigen::Index rows = x.rows() / code.length();
  DDGrid out(rows, x.cols());
  for (int j = 0; j < code.length(); ++j)
    out.mat() += std::conj(code.values[static_cast<std::size_t>(j)]) * x.mat().middleRows(j * rows, rows);
  out *= 1.0 / code.length();
  return out;
}

DDGrid assemble_block(const DDGrid& x_e, const SpreadCode& code, const DDGrid& pilot, const SystemConfig& cfg) {
  if (code.length() != cfg.kappa) throw std::invalid_argument("assemble_block: code length != kappa");
  if (x_e.rows() != cfg.reduced_m() || x_e.cols() != cfg.n_nu)
    throw DimensionError("assemble_block: effective data must be (M/kappa) x N");
  if (pilot.rows() != cfg.m_tau || pilot.cols() != cfg.n_nu) throw DimensionError("assemble_block: pilot shape");
  return spread(x_e, code) + pilot;
}

DDGrid symbols_to_grid(const std::vector<cplx>& symbols, int rows, int cols) {
  if (static_cast<long long>(symbols.size()) != static_cast<long long>(rows) * cols)
    throw DimensionError("symbols_to_grid: count mismatch");
  return DDGrid(CMat(Eigen::Map<const CMat>(symbols.data(), rows, cols)));
}

DataBlock random_data(const SystemConfig& cfg, Modulation mod, Rng& rng) {
  const int rows = cfg.reduced_m();
  const std::size_t nbits = static_cast<std::size_t>(rows) * cfg.n_nu * static_cast<std::size_t>(bits_per_symbol(mod));
  DataBlock d;
  d.bits.resize(nbits);
  for (auto& b : d.bits) b = static_cast<std::uint8_t>(rng.uniform_int(0, 1));
  d.symbols = symbols_to_grid(map_bits(d.bits, mod), rows, cfg.n_nu);
  return d;
}

CVec make_chirp(int len, int kappa, bool up, double band_fraction) {
  if (len < 1 || kappa < 1) throw std::invalid_argument("make_chirp: length and kappa must be positive");
  CVec c(len);
  const double rate = chirp_rate(len, kappa, band_fraction);
  for (int n = 0; n < len; ++n) {
    const double nn = n;
    // instantaneous frequency rate * n - band / 2, in cycles per sample
    const double phase = kPi * (rate * nn * nn - band_fraction * nn / kappa);
    c(n) = std::polar(1.0, up ? phase : -phase);
  }
  return c;
}

Preamble build_preamble(const SystemConfig& cfg, int chirp_len, std::uint64_t training_seed) {
  validate(cfg);
  Preamble p;
  p.chirp_up = make_chirp(chirp_len, cfg.kappa, true);
  p.chirp_down = make_chirp(chirp_len, cfg.kappa, false);
  Rng rng(training_seed);
  const auto& qpsk = constellation(Modulation::qpsk);
  p.training = DDGrid(cfg.m_tau, cfg.n_nu);
  for (Eigen::Index i = 0; i < p.training.mat().size(); ++i)
    p.training.mat().data()[i] = qpsk[static_cast<std::size_t>(rng.uniform_int(0, 3))];
  const TimeSignal train = modulate(p.training, cfg.f_s);
  p.samples.rate_hz = cfg.f_s;
  p.samples.samples.resize(2 * chirp_len + train.size());
  p.samples.samples << p.chirp_up, p.chirp_down, train.samples;
  return p;
}

TimeSignal Frame::samples(double rate_hz) const {
  std::vector<CVec> parts{preamble.samples.samples};
  Eigen::Index total = preamble.samples.size();
  for (const auto& b : blocks) {
    parts.push_back(modulate(b, rate_hz).samples);
    total += parts.back().size();
  }
  TimeSignal out{CVec(total), rate_hz};
  Eigen::Index at = 0;
  for (const auto& part : parts) {
    out.samples.segment(at, part.size()) = part;
    at += part.size();
  }
  return out;
}

double papr(const TimeSignal& s) {
  const auto p = s.samples.cwiseAbs2();
  const double mean = p.mean();
  if (!(mean > 0.0)) throw std::invalid_argument("papr: zero-power signal");
  return p.maxCoeff() / mean;
}

double papr_bound(const DDGrid& block) {
  const auto p = block.mat().cwiseAbs2();
  const double mean = p.mean();
  if (!(mean > 0.0)) throw std::invalid_argument("papr_bound: zero-power block");
  return static_cast<double>(block.cols()) * p.maxCoeff() / mean;
}

}  // namespace otfs
