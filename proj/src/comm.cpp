#include "otfs/comm.hpp"

#include "otfs/radar.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <set>

namespace otfs {
namespace {

using Cell = std::pair<int, int>;

std::vector<Cell> support_of(const DDGrid& t) {
  const double peak = t.mat().cwiseAbs().maxCoeff();
  std::vector<Cell> cells;
  if (!(peak > 0.0)) return cells;
  for (int c = 0; c < t.cols(); ++c)
    for (int r = 0; r < t.rows(); ++r)
      if (std::abs(t(r, c)) > 1e-9 * peak) cells.emplace_back(r, c);
  return cells;
}

// Mean of y / T over each template's pilot copies when supports are disjoint;
// joint least squares over the union support otherwise.
std::vector<cplx> gains_from_templates(const DDGrid& y, const std::vector<DDGrid>& templates) {
  std::vector<std::vector<Cell>> supports;
  std::set<Cell> seen;
  bool disjoint = true;
  for (const auto& t : templates) {
    supports.push_back(support_of(t));
    if (supports.back().empty()) throw std::invalid_argument("estimate_coefficients: pilot has zero amplitude");
    for (const auto& c : supports.back()) disjoint = seen.insert(c).second && disjoint;
  }

  std::vector<cplx> h(templates.size());
  if (disjoint) {
    for (std::size_t p = 0; p < templates.size(); ++p) {
      cplx acc = 0.0;
      for (const auto& [r, c] : supports[p]) acc += y(r, c) / templates[p](r, c);
      h[p] = acc / static_cast<double>(supports[p].size());
    }
    return h;
  }

  const std::vector<Cell> cells(seen.begin(), seen.end());
  CMat a(static_cast<Eigen::Index>(cells.size()), static_cast<Eigen::Index>(templates.size()));
  CVec b(static_cast<Eigen::Index>(cells.size()));
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto [r, c] = cells[i];
    b(static_cast<Eigen::Index>(i)) = y(r, c);
    for (std::size_t p = 0; p < templates.size(); ++p)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) = templates[p](r, c);
  }
  // Paths sharing all pilot copies are not separable from pilots alone; the
  // minimum-norm solution splits their sum.
  const CVec sol = a.completeOrthogonalDecomposition().solve(b);
  for (std::size_t p = 0; p < templates.size(); ++p) h[p] = sol(static_cast<Eigen::Index>(p));
  return h;
}

}  // namespace

std::vector<cplx> estimate_coefficients(const DDGrid& y_uf, std::span<const Tap> taps, const DDGrid& pilot,
                                        const SystemConfig& cfg) {
  if (y_uf.rows() != cfg.m_tau || y_uf.cols() != cfg.n_nu) throw DimensionError("estimate_coefficients: y_uf must be M x N");
  const AliasPlan plan = build_alias_plan(cfg);
  std::vector<DDGrid> templates;
  for (const Tap& t : taps) templates.push_back(unfold(twisted_shift_rows(pilot, t.l, t.k, cfg.kappa), plan));
  return gains_from_templates(y_uf, templates);
}

std::vector<cplx> estimate_coefficients_full_rate(const DDGrid& y, std::span<const Tap> taps, const DDGrid& pilot,
                                                  const SystemConfig& cfg) {
  if (y.rows() != cfg.m_tau || y.cols() != cfg.n_nu) throw DimensionError("estimate_coefficients: y must be M x N");
  std::vector<DDGrid> templates;
  for (const Tap& t : taps) templates.push_back(twisted_shift(pilot, t.l, t.k));
  return gains_from_templates(y, templates);
}

DDGrid pilot_response(std::span<const Tap> taps, std::span<const cplx> gains, const DDGrid& pilot,
                      const SystemConfig& cfg) {
  if (taps.size() != gains.size()) throw std::invalid_argument("pilot_response: taps and gains differ in length");
  DDGrid out(cfg.reduced_m(), cfg.n_nu);
  for (std::size_t i = 0; i < taps.size(); ++i)
    out += gains[i] * twisted_shift_rows(pilot, taps[i].l, taps[i].k, cfg.kappa);
  return out;
}

EffectiveChannel build_effective_channel(std::span<const Tap> taps, std::span<const cplx> gains,
                                         const SpreadCode& code, const SystemConfig& cfg, Exec exec) {
  if (taps.size() != gains.size()) throw std::invalid_argument("build_effective_channel: taps and gains differ in length");
  if (code.length() != cfg.kappa) throw std::invalid_argument("build_effective_channel: code length != kappa");
  const int mr = cfg.reduced_m();
  const int n = cfg.n_nu;
  const int dim = mr * n;
  EffectiveChannel ch{CMat::Zero(dim, dim), {taps.begin(), taps.end()}, {gains.begin(), gains.end()}, code};

  auto column = [&](int c) {
    DDGrid e(mr, n);
    e(c % mr, c / mr) = 1.0;
    const DDGrid s = spread(e, code);
    DDGrid y(mr, n);
    for (std::size_t i = 0; i < taps.size(); ++i) y += gains[i] * twisted_shift_rows(s, taps[i].l, taps[i].k, cfg.kappa);
    ch.g_tilde.col(c) = vec(y);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int c = 0; c < dim; ++c) column(c);
  } else {
    for (int c = 0; c < dim; ++c) column(c);
  }
  return ch;
}

Detection mmse_detect(const DDGrid& y_reduced, const EffectiveChannel& ch, double noise_var, Modulation mod) {
  const CMat& g = ch.g_tilde;
  const CVec y = vec(y_reduced);
  if (y.size() != g.rows()) throw DimensionError("mmse_detect: observation length != rows of G");

  // G has a handful of nonzeros per column; form the Gram matrix sparsely.
  const Eigen::SparseMatrix<cplx> gs = g.sparseView(cplx(1.0, 0.0), 1e-14);
  CMat gram = CMat(gs.adjoint() * gs);
  const CVec rhs = gs.adjoint() * y;

  Detection d;
  if (noise_var > 0.0) {
    gram.diagonal().array() += noise_var;
    Eigen::LLT<CMat> llt(gram);
    if (llt.info() != Eigen::Success) throw ConditioningError("mmse_detect: regularized Gram matrix not positive definite");
    d.soft = llt.solve(rhs);
  } else {
    Eigen::ColPivHouseholderQR<CMat> qr(g);
    if (qr.rank() < g.cols()) throw ConditioningError("mmse_detect: effective channel is rank deficient");
    d.soft = qr.solve(y);
  }
  d.hard.resize(static_cast<std::size_t>(d.soft.size()));
  for (Eigen::Index i = 0; i < d.soft.size(); ++i) d.hard[static_cast<std::size_t>(i)] = slice(d.soft(i), mod);
  return d;
}

DDGrid cancel_interference(const DDGrid& y_reduced, const EffectiveChannel& ch, const CVec& x_hat) {
  const CVec r = vec(y_reduced) - ch.g_tilde * x_hat;
  return unvec(r, y_reduced.rows(), y_reduced.cols());
}

DecodeResult iterative_decode(const DDGrid& y_reduced, std::span<const Tap> taps, const DDGrid& pilot,
                              const SpreadCode& code, const SystemConfig& cfg, Modulation mod, double noise_var,
                              const DecodeOptions& opt) {
  if (opt.max_iter < 1) throw std::invalid_argument("iterative_decode: max_iter must be >= 1");
  const AliasPlan plan = build_alias_plan(cfg);
  DecodeResult res;
  std::vector<cplx> gains;
  std::vector<cplx> prev_hard;
  EffectiveChannel ch;

  for (int it = 1; it <= opt.max_iter; ++it) {
    // y_uf from the original frame with the latest data estimate removed
    const DDGrid observed = prev_hard.empty()
                                ? y_reduced
                                : cancel_interference(y_reduced, ch,
                                                      Eigen::Map<const CVec>(prev_hard.data(),
                                                                             static_cast<Eigen::Index>(prev_hard.size())));
    std::vector<cplx> next = opt.known_gains ? *opt.known_gains
                                             : estimate_coefficients(unfold(observed, plan), taps, pilot, cfg);
    const DDGrid data_part = y_reduced - pilot_response(taps, next, pilot, cfg);
    ch = build_effective_channel(taps, next, code, cfg);
    const Detection det = mmse_detect(data_part, ch, noise_var, mod);

    IterationRecord rec;
    rec.gains = next;
    rec.bits = demap_hard(det.hard, mod);
    const CVec hard = Eigen::Map<const CVec>(det.hard.data(), static_cast<Eigen::Index>(det.hard.size()));
    rec.residual_energy = cancel_interference(data_part, ch, hard).squared_norm();
    res.history.push_back(rec);
    res.iterations = it;

    double change = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (!gains.empty()) change = std::max(change, std::abs(next[i] - gains[i]));
      scale = std::max(scale, std::abs(next[i]));
    }
    const bool same_decisions = !prev_hard.empty() && prev_hard == det.hard;
    gains = std::move(next);
    prev_hard = det.hard;
    res.symbols = det.hard;
    if (opt.known_gains || (same_decisions && change <= opt.eps * std::max(scale, 1e-300))) {
      res.converged = true;
      break;
    }
  }
  res.gains = gains;
  res.bits = res.history.back().bits;
  return res;
}

std::vector<Tap> acquire_taps(const DDGrid& y_training_reduced, const DDGrid& training, const SystemConfig& cfg,
                              int max_paths, double false_alarm) {
  std::vector<Tap> taps;
  CMat basis(y_training_reduced.mat().size(), 0);
  const CVec y = vec(y_training_reduced);
  DDGrid r = y_training_reduced;
  const double floor = 1e-24 * std::max(1.0, r.squared_norm() * training.squared_norm());
  for (int p = 0; p < max_paths; ++p) {
    const RMat s = reduced_surface(r, training, cfg, cfg.m_tau);
    Eigen::Index l = 0, kk = 0;
    const double v = s.maxCoeff(&l, &kk);
    if (!(v > floor) || v <= cfar_threshold(s, false_alarm)) break;
    const int k = static_cast<int>(kk) - cfg.n_nu / 2;
    taps.push_back({static_cast<int>(l), k});
    // joint refit so earlier taps do not leave residue for later passes
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = vec(twisted_shift_rows(training, static_cast<int>(l), k, cfg.kappa));
    const CVec h = basis.colPivHouseholderQr().solve(y);
    r = unvec(y - basis * h, y_training_reduced.rows(), y_training_reduced.cols());
  }
  return taps;
}

}  // namespace otfs
