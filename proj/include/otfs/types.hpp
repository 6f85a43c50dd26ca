#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace otfs {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;

/// Complex grid tagged with its domain so DD and TF data cannot be mixed up.
/// Storage is column-major: rows index delay (or subcarrier), columns Doppler (or symbol).
template <class Tag>
class Grid {
public:
  Grid() = default;
  Grid(Eigen::Index rows, Eigen::Index cols) : m_(CMat::Zero(rows, cols)) {}
  explicit Grid(CMat m) : m_(std::move(m)) {}

  const CMat& mat() const noexcept { return m_; }
  CMat& mat() noexcept { return m_; }

  Eigen::Index rows() const noexcept { return m_.rows(); }
  Eigen::Index cols() const noexcept { return m_.cols(); }
  cplx& operator()(Eigen::Index r, Eigen::Index c) { return m_(r, c); }
  const cplx& operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

  Grid& operator+=(const Grid& o) { m_ += o.m_; return *this; }
  Grid& operator-=(const Grid& o) { m_ -= o.m_; return *this; }
  Grid& operator*=(cplx a) { m_ *= a; return *this; }
  friend Grid operator+(Grid a, const Grid& b) { a += b; return a; }
  friend Grid operator-(Grid a, const Grid& b) { a -= b; return a; }
  friend Grid operator*(cplx a, Grid g) { g *= a; return g; }

  double norm() const { return m_.norm(); }
  double squared_norm() const { return m_.squaredNorm(); }

private:
  CMat m_;
};

struct DDTag;
struct TFTag;
using DDGrid = Grid<DDTag>;
using TFGrid = Grid<TFTag>;

/// Complex baseband samples tagged with their sampling rate.
struct TimeSignal {
  CVec samples;
  double rate_hz = 0.0;

  Eigen::Index size() const noexcept { return samples.size(); }
};

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Column-major stacking, delay index fastest (index l + M*k).
inline CVec vec(const DDGrid& x) {
  return Eigen::Map<const CVec>(x.mat().data(), x.mat().size());
}

inline DDGrid unvec(const CVec& v, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != v.size()) throw DimensionError("unvec: length does not match rows*cols");
  return DDGrid(CMat(Eigen::Map<const CMat>(v.data(), rows, cols)));
}

/// Inner product <a, b> = a^H b over all grid cells.
template <class Tag>
cplx inner(const Grid<Tag>& a, const Grid<Tag>& b) {
  return (a.mat().array().conjugate() * b.mat().array()).sum();
}

inline int pos_mod(long long a, long long m) {
  long long r = a % m;
  return static_cast<int>(r < 0 ? r + m : r);
}

}  // namespace otfs
