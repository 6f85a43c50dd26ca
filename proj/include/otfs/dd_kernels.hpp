#pragma once

#include "otfs/types.hpp"

namespace otfs {

/// Execution policy for the data-parallel kernels. `serial` is the reference
/// implementation kept for testing; both produce identical results.
enum class Exec { serial, parallel };

/// Gamma(l, k) x evaluated directly as a twisted cyclic shift of the DD grid:
/// delay shift by l with the frame-level wrap phase, Doppler shift by k, and
/// the per-sample Doppler ramp referenced to the delayed time.
DDGrid twisted_shift(const DDGrid& x, int l, int k);

/// Rows 0, stride, 2*stride, ... of twisted_shift(x, l, k).
DDGrid twisted_shift_rows(const DDGrid& x, int l, int k, int stride);

/// |<D Gamma(l,k) x, y>|^2 for l in [0, l_count) and k in [-N/2, N/2), where D
/// keeps every `stride`-th delay row and y has M/stride rows. Column index of
/// the result is k + N/2.
RMat correlation_surface(const DDGrid& y, const DDGrid& x, int stride, int l_count, Exec exec);

/// <D Gamma(l,k) x, y> for a single tap pair.
cplx correlate_at(const DDGrid& y, const DDGrid& x, int stride, int l, int k);

}  // namespace otfs
