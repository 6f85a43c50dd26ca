#include "otfs/radar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace otfs {

TargetEstimate make_target(cplx h, int delay_tap, int doppler_tap, const SystemConfig& cfg) {
  TargetEstimate t;
  t.h_hat = h;
  t.delay_tap = delay_tap;
  t.doppler_tap = doppler_tap;
  t.range_m = cfg.range_of_tap(delay_tap);
  t.velocity_mps = cfg.velocity_of_tap(doppler_tap);
  return t;
}

RMat matched_surface(const DDGrid& y, const DDGrid& x_ref, const SystemConfig& cfg, Exec exec) {
  if (y.rows() != cfg.m_tau || y.cols() != cfg.n_nu || x_ref.rows() != cfg.m_tau || x_ref.cols() != cfg.n_nu)
    throw DimensionError("matched_surface: grids must be M x N");
  return correlation_surface(y, x_ref, 1, cfg.m_tau, exec);
}

cplx estimate_coefficient(const DDGrid& y, const DDGrid& x_ref, int l, int k) {
  const int stride = static_cast<int>(x_ref.rows() / y.rows());
  const DDGrid t = twisted_shift_rows(x_ref, l, k, stride);
  const double e = t.squared_norm();
  if (!(e > 0.0)) throw std::invalid_argument("estimate_coefficient: template has no energy");
  return inner(t, y) / e;
}

double cfar_threshold(const RMat& surface, double false_alarm) {
  std::vector<double> v(surface.data(), surface.data() + surface.size());
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double median = *mid;
  // Exponential cells: P(X > t) = exp(-t ln2 / median).
  return median / std::log(2.0) * std::log(static_cast<double>(surface.size()) / false_alarm);
}

namespace {

struct Peak {
  int l = 0;
  int k = 0;
  double value = 0.0;
};

Peak argmax(const RMat& s, int n) {
  Eigen::Index r = 0, c = 0;
  const double v = s.maxCoeff(&r, &c);
  return {static_cast<int>(r), static_cast<int>(c) - n / 2, v};
}

bool above(const RMat& s, const Peak& p, const std::optional<double>& threshold, double false_alarm,
           double floor) {
  if (!(p.value > floor)) return false;
  const double t = threshold ? *threshold : cfar_threshold(s, false_alarm);
  return p.value > t;
}

}  // namespace

std::vector<TargetEstimate> sic_estimate(const DDGrid& y, const DDGrid& x_ref, const SystemConfig& cfg,
                                         int max_targets, std::optional<double> threshold) {
  std::vector<TargetEstimate> out;
  DDGrid r = y;
  const double floor = 1e-20 * std::max(1.0, y.squared_norm() * x_ref.squared_norm());
  for (int t = 0; t < max_targets; ++t) {
    const RMat s = matched_surface(r, x_ref, cfg);
    const Peak p = argmax(s, cfg.n_nu);
    if (!above(s, p, threshold, 1e-3, floor)) break;
    const cplx h = estimate_coefficient(r, x_ref, p.l, p.k);
    r -= h * twisted_shift(x_ref, p.l, p.k);
    out.push_back(make_target(h, p.l, p.k, cfg));
  }
  return out;
}

RMat reduced_surface(const DDGrid& y_reduced, const DDGrid& x, const SystemConfig& cfg, int l_count, Exec exec) {
  return correlation_surface(y_reduced, x, cfg.kappa, l_count, exec);
}

AmbiguityResult resolve_ambiguity(const TargetEstimate& coarse, const DDGrid& y_uf, const DDGrid& x_pilot,
                                  const DDGrid& x_data, const SystemConfig& cfg) {
  const AliasPlan plan = build_alias_plan(cfg);
  const int period = cfg.pilot_period();
  const int base = pos_mod(coarse.delay_tap, period);
  const DDGrid x_full = x_pilot + x_data;

  AmbiguityResult res;
  double best = std::numeric_limits<double>::infinity();
  int best_l = base;
  cplx best_h = coarse.h_hat;
  for (int m = 0; m < cfg.mu; ++m) {
    const int l = base + m * period;
    const DDGrid u_p = unfold(twisted_shift_rows(x_pilot, l, coarse.doppler_tap, cfg.kappa), plan);
    const DDGrid u = unfold(twisted_shift_rows(x_full, l, coarse.doppler_tap, cfg.kappa), plan);
    // gain from the pilot part at this candidate, so only the delay hypothesis changes
    const double ep = u_p.squared_norm();
    const cplx h = ep > 0.0 ? inner(u_p, y_uf) / ep : inner(u, y_uf) / u.squared_norm();
    const double d = (y_uf - h * u).norm();
    res.distances.push_back(d);
    if (d < best) {
      best = d;
      best_l = l;
      best_h = h;
    }
  }

  const double tol = 1e-9 * std::max(1.0, y_uf.norm());
  int near_best = 0;
  for (double d : res.distances)
    if (d - best <= tol) ++near_best;
  // smallest m among the tied candidates
  for (int m = 0; m < static_cast<int>(res.distances.size()); ++m) {
    if (res.distances[static_cast<std::size_t>(m)] - best <= tol) {
      best_l = base + m * period;
      break;
    }
  }
  res.estimate = make_target(best_h, best_l, coarse.doppler_tap, cfg);
  res.estimate.ambiguous = near_best > 1;
  return res;
}

namespace {

struct Synth {
  DDGrid pilot;  // D Gamma x_p
  DDGrid data;   // D Gamma x_d
};

Synth synth(const DDGrid& x_pilot, const DDGrid& x_data, int l, int k, int kappa) {
  return {twisted_shift_rows(x_pilot, l, k, kappa), twisted_shift_rows(x_data, l, k, kappa)};
}

cplx ls_gain(const DDGrid& t, const DDGrid& y) {
  const double e = t.squared_norm();
  return e > 0.0 ? inner(t, y) / e : cplx{};
}

struct Track {
  TargetEstimate est;
  Synth s;
  DDGrid full() const { return s.pilot + s.data; }
};

double residual_energy(const DDGrid& y, const std::vector<Track>& tracks) {
  DDGrid r = y;
  for (const auto& t : tracks) r -= t.est.h_hat * t.full();
  return r.squared_norm();
}

// Gains of all tracks jointly, so overlapping syntheses do not bias each other.
void refit_gains(std::vector<Track>& tracks, const DDGrid& y) {
  if (tracks.empty()) return;
  CMat a(y.mat().size(), static_cast<Eigen::Index>(tracks.size()));
  for (std::size_t i = 0; i < tracks.size(); ++i) a.col(static_cast<Eigen::Index>(i)) = vec(tracks[i].full());
  const CVec h = a.colPivHouseholderQr().solve(vec(y));
  for (std::size_t i = 0; i < tracks.size(); ++i) tracks[i].est.h_hat = h(static_cast<Eigen::Index>(i));
}

// Observation with every target except `skip` removed (full synthesis).
DDGrid others_removed(const DDGrid& y, const std::vector<Track>& tracks, std::size_t skip) {
  DDGrid r = y;
  for (std::size_t j = 0; j < tracks.size(); ++j)
    if (j != skip) r -= tracks[j].est.h_hat * tracks[j].full();
  return r;
}

// Pilot-only MLE over the reduced unambiguous window.
std::optional<TargetEstimate> pilot_mle(const DDGrid& y, const DDGrid& x_pilot, const SystemConfig& cfg,
                                        Exec exec) {
  const RMat s = correlation_surface(y, x_pilot, cfg.kappa, cfg.pilot_period(), exec);
  const Peak p = argmax(s, cfg.n_nu);
  if (!(p.value > 0.0)) return std::nullopt;
  const cplx h = estimate_coefficient(y, x_pilot, p.l, p.k);
  return make_target(h, p.l, p.k, cfg);
}

}  // namespace

DetectResult detect(const DDGrid& y_reduced, const DDGrid& x_pilot, const DDGrid& x_data, const SystemConfig& cfg,
                    const DetectOptions& opt) {
  validate(cfg);
  if (y_reduced.rows() != cfg.reduced_m() || y_reduced.cols() != cfg.n_nu)
    throw DimensionError("detect: observation must be (M/kappa) x N");
  const AliasPlan plan = build_alias_plan(cfg);
  DetectResult res;

  // Phase 1a: pilot-only successive cancellation over [0, M/mu).
  DDGrid r = y_reduced;
  const double floor = 1e-24 * std::max(1.0, y_reduced.squared_norm() * x_pilot.squared_norm());
  std::vector<Synth> coarse_pilots;
  for (int t = 0; t < opt.max_targets; ++t) {
    const RMat s = correlation_surface(r, x_pilot, cfg.kappa, cfg.pilot_period(), opt.exec);
    const Peak p = argmax(s, cfg.n_nu);
    if (!above(s, p, opt.threshold, opt.false_alarm, floor)) break;
    const cplx h = estimate_coefficient(r, x_pilot, p.l, p.k);
    const DDGrid tp = twisted_shift_rows(x_pilot, p.l, p.k, cfg.kappa);
    r -= h * tp;
    res.coarse.push_back(make_target(h, p.l, p.k, cfg));
    coarse_pilots.push_back({tp, DDGrid()});
  }
  if (res.coarse.empty()) {
    res.converged = true;
    return res;
  }

  // Phase 1b: resolve each wrap-around, strongest first, removing resolved
  // targets fully and unresolved ones by their pilot part.
  std::vector<Track> tracks;
  for (std::size_t i = 0; i < res.coarse.size(); ++i) {
    DDGrid obs = y_reduced;
    for (const auto& t : tracks) obs -= t.est.h_hat * t.full();
    for (std::size_t j = i + 1; j < res.coarse.size(); ++j) obs -= res.coarse[j].h_hat * coarse_pilots[j].pilot;
    const AmbiguityResult a = resolve_ambiguity(res.coarse[i], unfold(obs, plan), x_pilot, x_data, cfg);
    Track tr{a.estimate, synth(x_pilot, x_data, a.estimate.delay_tap, a.estimate.doppler_tap, cfg.kappa)};
    tr.est.h_hat = ls_gain(tr.full(), obs);
    tracks.push_back(std::move(tr));
  }
  refit_gains(tracks, y_reduced);
  double energy = residual_energy(y_reduced, tracks);
  res.residual_history.push_back(energy);

  // Phase 2: cancel data interference, re-estimate, re-resolve.
  for (int it = 1; it <= opt.max_iter; ++it) {
    std::vector<Track> next = tracks;
    double max_shift = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) {
      const DDGrid obs = others_removed(y_reduced, next, i);
      const DDGrid pilot_only = obs - next[i].est.h_hat * next[i].s.data;
      const auto c = pilot_mle(pilot_only, x_pilot, cfg, opt.exec);
      if (!c) continue;
      const AmbiguityResult a = resolve_ambiguity(*c, unfold(obs, plan), x_pilot, x_data, cfg);
      Track tr{a.estimate, synth(x_pilot, x_data, a.estimate.delay_tap, a.estimate.doppler_tap, cfg.kappa)};
      tr.est.h_hat = ls_gain(tr.full(), obs);
      max_shift = std::max({max_shift, std::abs(static_cast<double>(tr.est.delay_tap - next[i].est.delay_tap)),
                            std::abs(static_cast<double>(tr.est.doppler_tap - next[i].est.doppler_tap))});
      next[i] = std::move(tr);
    }
    refit_gains(next, y_reduced);
    const double e = residual_energy(y_reduced, next);
    res.iterations = it;
    if (e > energy * (1.0 + 1e-12) + 1e-300) break;  // reject a step that increases the residual
    tracks = std::move(next);
    energy = e;
    res.residual_history.push_back(energy);
    if (max_shift <= opt.eps) {
      res.converged = true;
      break;
    }
  }

  for (const auto& t : tracks) res.targets.push_back(t.est);
  return res;
}

}  // namespace otfs
