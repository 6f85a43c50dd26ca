#pragma once

#include "otfs/config.hpp"
#include "otfs/dd_kernels.hpp"
#include "otfs/subnyq.hpp"
#include "otfs/types.hpp"

#include <optional>
#include <vector>

namespace otfs {

struct TargetEstimate {
  cplx h_hat{0.0, 0.0};
  int delay_tap = 0;
  int doppler_tap = 0;
  double range_m = 0.0;
  double velocity_mps = 0.0;
  bool ambiguous = false;  ///< ambiguity resolution could not separate candidates
};

TargetEstimate make_target(cplx h, int delay_tap, int doppler_tap, const SystemConfig& cfg);

/// |(Gamma(l,k) x_ref)^H y|^2 for l in [0, M), k in [-N/2, N/2); column k + N/2.
RMat matched_surface(const DDGrid& y, const DDGrid& x_ref, const SystemConfig& cfg, Exec exec = Exec::parallel);

/// Least-squares gain (Gamma x)^H y / ||Gamma x||^2.
cplx estimate_coefficient(const DDGrid& y, const DDGrid& x_ref, int l, int k);

/// CFAR-style level for an exponential-looking surface: the level a single
/// noise cell exceeds with probability false_alarm / cells.
double cfar_threshold(const RMat& surface, double false_alarm = 1e-3);

/// Strongest-first successive cancellation on the full-rate matched surface.
/// Without an explicit threshold the CFAR level is recomputed per pass.
std::vector<TargetEstimate> sic_estimate(const DDGrid& y, const DDGrid& x_ref, const SystemConfig& cfg,
                                         int max_targets, std::optional<double> threshold = std::nullopt);

struct AmbiguityResult {
  TargetEstimate estimate;
  std::vector<double> distances;  ///< one per wrap-around candidate
};

/// Picks the wrap-around candidate coarse + m*M/mu whose noise-free reduced-rate
/// synthesis (pilot + data, unfolded) is closest to y_uf. Ties go to the
/// smaller m and set the ambiguous flag.
AmbiguityResult resolve_ambiguity(const TargetEstimate& coarse, const DDGrid& y_uf, const DDGrid& x_pilot,
                                  const DDGrid& x_data, const SystemConfig& cfg);

struct DetectOptions {
  double eps = 0.0;
  int max_iter = 10;
  int max_targets = 4;
  std::optional<double> threshold;  ///< absolute pilot-surface level; CFAR when empty
  double false_alarm = 1e-3;
  Exec exec = Exec::parallel;
};

struct DetectResult {
  std::vector<TargetEstimate> coarse;   ///< pilot-only estimates, delay in [0, M/mu)
  std::vector<TargetEstimate> targets;  ///< after ambiguity resolution and refinement
  std::vector<double> residual_history; ///< ||y - synth||^2 after Phase 1 and each accepted iteration
  int iterations = 0;
  bool converged = false;
};

/// Two-phase detector on a reduced-rate DD frame (M/kappa x N).
DetectResult detect(const DDGrid& y_reduced, const DDGrid& x_pilot, const DDGrid& x_data, const SystemConfig& cfg,
                    const DetectOptions& opt = {});

/// |<D Gamma(l,k) x, y_reduced>|^2 over all taps (data-aided range-velocity profile).
RMat reduced_surface(const DDGrid& y_reduced, const DDGrid& x, const SystemConfig& cfg, int l_count,
                     Exec exec = Exec::parallel);

}  // namespace otfs
