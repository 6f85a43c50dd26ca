#include "otfs/dd_kernels.hpp"

#include <cmath>
#include <vector>

namespace otfs {
namespace {

struct ShiftTables {
  std::vector<cplx> ramp;  // e^{j2pi k (L-l)/MN}, L = 0..M-1
  std::vector<cplx> wrap;  // e^{-j2pi c/N}, c = 0..N-1
};

ShiftTables make_tables(int m, int n, int l, int k) {
  ShiftTables t;
  t.ramp.resize(static_cast<std::size_t>(m));
  t.wrap.resize(static_cast<std::size_t>(n));
  const double mn = static_cast<double>(m) * n;
  for (int L = 0; L < m; ++L) t.ramp[static_cast<std::size_t>(L)] = std::polar(1.0, 2.0 * kPi * k * (L - l) / mn);
  for (int c = 0; c < n; ++c) t.wrap[static_cast<std::size_t>(c)] = std::polar(1.0, -2.0 * kPi * c / n);
  return t;
}

void check_taps(const DDGrid& x, int l) {
  if (l < 0 || l >= x.rows()) throw DimensionError("delay tap outside [0, M)");
}

// Shared body of the surface kernel; the serial and parallel entry points
// differ only in the pragma.
double surface_cell(const CMat& xt_conj, const CMat& xt_wrap, const CMat& y, int m, int n, int stride, int l,
                    int k) {
  const double mn = static_cast<double>(m) * n;
  cplx acc = 0.0;
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const int L = static_cast<int>(r) * stride;
    const bool wrapped = L < l;
    const int src = wrapped ? L - l + m : L - l;
    const CMat& xs = wrapped ? xt_wrap : xt_conj;
    cplx inner = 0.0;
    for (int q = 0; q < n; ++q) inner += xs(pos_mod(q - k, n), src) * y(r, q);
    acc += std::polar(1.0, -2.0 * kPi * k * (L - l) / mn) * inner;
  }
  return std::norm(acc);
}

}  // namespace

DDGrid twisted_shift(const DDGrid& x, int l, int k) { return twisted_shift_rows(x, l, k, 1); }

DDGrid twisted_shift_rows(const DDGrid& x, int l, int k, int stride) {
  check_taps(x, l);
  const int m = static_cast<int>(x.rows());
  const int n = static_cast<int>(x.cols());
  if (stride < 1 || m % stride != 0) throw DimensionError("row stride must divide M");
  const auto t = make_tables(m, n, l, k);
  DDGrid out(m / stride, n);
  for (int q = 0; q < n; ++q) {
    const int c = pos_mod(q - k, n);
    for (int r = 0; r < m / stride; ++r) {
      const int L = r * stride;
      const auto Ls = static_cast<std::size_t>(L);
      if (L >= l)
        out(r, q) = t.ramp[Ls] * x(L - l, c);
      else
        out(r, q) = t.ramp[Ls] * t.wrap[static_cast<std::size_t>(c)] * x(L - l + m, c);
    }
  }
  return out;
}

RMat correlation_surface(const DDGrid& y, const DDGrid& x, int stride, int l_count, Exec exec) {
  const int m = static_cast<int>(x.rows());
  const int n = static_cast<int>(x.cols());
  if (stride < 1 || m % stride != 0 || y.rows() != m / stride || y.cols() != n)
    throw DimensionError("correlation_surface: observation shape does not match template");
  if (l_count < 1 || l_count > m) throw DimensionError("correlation_surface: delay window outside [1, M]");

  // Conjugated, transposed template so each source row is contiguous.
  const CMat xt_conj = x.mat().transpose().conjugate();
  CMat xt_wrap = xt_conj;
  for (int c = 0; c < n; ++c) xt_wrap.row(c) *= std::polar(1.0, 2.0 * kPi * c / n);

  RMat s(l_count, n);
  const CMat& ym = y.mat();
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int l = 0; l < l_count; ++l)
      for (int kk = 0; kk < n; ++kk) s(l, kk) = surface_cell(xt_conj, xt_wrap, ym, m, n, stride, l, kk - n / 2);
  } else {
    for (int l = 0; l < l_count; ++l)
      for (int kk = 0; kk < n; ++kk) s(l, kk) = surface_cell(xt_conj, xt_wrap, ym, m, n, stride, l, kk - n / 2);
  }
  return s;
}

cplx correlate_at(const DDGrid& y, const DDGrid& x, int stride, int l, int k) {
  const DDGrid t = twisted_shift_rows(x, l, k, stride);
  return inner(t, y);
}

}  // namespace otfs
