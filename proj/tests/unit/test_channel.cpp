#include "catch_amalgamated.hpp"
#include "oracle.hpp"

#include "otfs/channel.hpp"
#include "otfs/otfs.hpp"

#include <limits>

using namespace otfs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SystemConfig small(int m, int n) {
  SystemConfig c;
  c.m_tau = m;
  c.n_nu = n;
  c.kappa = c.mu = 1;
  c.f_s = m * c.delta_f;
  return c;
}

Path tap(cplx h, int l, int k) { return {h, static_cast<double>(l), static_cast<double>(k)}; }

}  // namespace

TEST_CASE("zero taps is the identity") {
  Rng rng(1);
  const DDGrid x = oracle::random_grid(rng, 8, 8);
  CHECK(oracle::max_abs(apply_dd_operator(x, 0, 0).mat() - x.mat()) < 1e-14);
}

TEST_CASE("operator form matches the dense Kronecker oracle for every tap pair") {
  Rng rng(2);
  for (auto [m, n] : std::vector<std::pair<int, int>>{{4, 4}, {2, 8}, {8, 4}, {8, 8}}) {
    const DDGrid x = oracle::random_grid(rng, m, n);
    for (int l = 0; l < m; ++l)
      for (int k = -n / 2; k < n - n / 2; ++k) {
        const CVec dense = oracle::gamma(m, n, l, k) * vec(x);
        INFO("M=" << m << " N=" << n << " l=" << l << " k=" << k);
        CHECK(oracle::max_abs(vec(apply_dd_operator(x, l, k)) - dense) < 1e-12);
      }
  }
}

TEST_CASE("pure delays compose cyclically over the frame") {
  Rng rng(3);
  const int m = 8, n = 4;
  const DDGrid x = oracle::random_grid(rng, m, n);
  for (auto [l1, l2] : std::vector<std::pair<int, int>>{{1, 2}, {3, 6}, {7, 7}}) {
    const DDGrid two = apply_dd_operator(apply_dd_operator(x, l1, 0), l2, 0);
    // A delay of l1 + l2 >= M crosses into the next Doppler block, outside the
    // operator's tap range, so compare against Pi^(l1+l2) built densely.
    const CVec ref_dd = oracle::kron(oracle::dft(n), CMat::Identity(m, m)) * oracle::cyclic_shift(m * n, l1 + l2) *
                        oracle::kron(oracle::dft(n).adjoint(), CMat::Identity(m, m)) * vec(x);
    CHECK(oracle::max_abs(vec(two) - ref_dd) < 1e-12);
    if (l1 + l2 < m) CHECK(oracle::max_abs(two.mat() - apply_dd_operator(x, l1 + l2, 0).mat()) < 1e-12);
  }
}

TEST_CASE("apply_channel is the gain-weighted sum of paths") {
  const auto cfg = small(8, 8);
  Rng rng(4);
  const DDGrid x = oracle::random_grid(rng, 8, 8);

  ChannelSpec none;
  CHECK(oracle::max_abs(apply_channel(x, none, cfg, rng).mat()) == 0.0);

  ChannelSpec id;
  id.paths = {tap(1.0, 0, 0)};
  CHECK(oracle::max_abs(apply_channel(x, id, cfg, rng).mat() - x.mat()) < 1e-14);

  const Path a = tap({0.3, -0.4}, 2, 1), b = tap({-0.7, 0.1}, 5, -3);
  ChannelSpec both;
  both.paths = {a, b};
  ChannelSpec sa, sb;
  sa.paths = {a};
  sb.paths = {b};
  const CMat sum = apply_channel(x, sa, cfg, rng).mat() + apply_channel(x, sb, cfg, rng).mat();
  CHECK(oracle::max_abs(apply_channel(x, both, cfg, rng).mat() - sum) < 1e-13);
}

TEST_CASE("fractional taps are rejected by the DD backend") {
  const auto cfg = small(8, 8);
  Rng rng(5);
  const DDGrid x = oracle::random_grid(rng, 8, 8);
  CHECK_THROWS_AS(apply_dd_operator(x, Path{1.0, 1.5, 0.0}, cfg), FractionalTapError);
  CHECK_THROWS_AS(apply_dd_operator(x, Path{1.0, 1.0, 0.25}, cfg), FractionalTapError);
}

TEST_CASE("time backend agrees with the DD operator for integer taps") {
  for (auto [m, n] : std::vector<std::pair<int, int>>{{8, 8}, {80, 80}}) {
    const auto cfg = small(m, n);
    Rng rng(6);
    const DDGrid x = oracle::random_grid(rng, m, n);
    ChannelSpec spec;
    spec.paths = {tap({0.8, 0.2}, 0, 0), tap({-0.3, 0.5}, 3, 2), tap({0.1, -0.6}, m - 1, -n / 2)};
    const DDGrid dd = apply_channel(x, spec, cfg, rng);
    const DDGrid td = demodulate(apply_time_channel(modulate(x, cfg.f_s), spec, cfg, rng), m);
    CHECK(oracle::max_abs(dd.mat() - td.mat()) < 1e-9);
  }
}

TEST_CASE("CFO advances the phase linearly in time") {
  const auto cfg = small(16, 8);
  Rng rng(7);
  TimeSignal s{CVec::Ones(128), cfg.f_s};
  ChannelSpec spec;
  spec.paths = {tap(1.0, 0, 0)};
  spec.cfo_hz = 1234.5;
  const TimeSignal r = apply_time_channel(s, spec, cfg, rng);
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const cplx expect = std::polar(1.0, 2.0 * kPi * spec.cfo_hz * static_cast<double>(i) / cfg.f_s);
    CHECK(std::abs(r.samples(i) - expect) < 1e-12);
  }
}

TEST_CASE("half-sample delay of a band-limited tone") {
  const int len = 1024;
  const double f = 37.0 / len;  // cycles per sample, periodic in the buffer
  CVec s(len);
  for (int i = 0; i < len; ++i) s(i) = std::polar(1.0, 2.0 * kPi * f * i);
  const CVec d = fractional_delay(s, 0.5);
  double worst = 0.0;
  for (int i = 0; i < len; ++i) worst = std::max(worst, std::abs(d(i) - std::polar(1.0, 2.0 * kPi * f * (i - 0.5))));
  // Hann-windowed sinc of half-width 32 at 7% of the sample rate
  CHECK(worst < 1e-5);
}

TEST_CASE("windowed sinc is an interpolator") {
  CHECK(windowed_sinc(0.0) == 1.0);
  for (int i = 1; i < kSincHalfWidth; ++i) CHECK(std::abs(windowed_sinc(i)) < 1e-15);
  CHECK(windowed_sinc(kSincHalfWidth) == 0.0);
  CHECK(windowed_sinc(-40.0) == 0.0);
}

TEST_CASE("integer fractional_delay is an exact cyclic shift") {
  Rng rng(8);
  const CVec s = oracle::random_matrix(rng, 50, 1).col(0);
  const CVec d = fractional_delay(s, 7.0);
  for (int i = 0; i < 50; ++i) CHECK(d(i) == s((i - 7 + 50) % 50));
}

TEST_CASE("AWGN calibration") {
  Rng rng(9);
  CVec v = CVec::Zero(1'000'000);
  add_awgn(v, 0.37, rng);
  const double var = v.squaredNorm() / static_cast<double>(v.size());
  CHECK_THAT(var, WithinRel(0.37, 0.02));
  CHECK(std::abs(v.mean()) < 0.01);
}

TEST_CASE("noise is reproducible from the seed") {
  const auto cfg = small(8, 8);
  ChannelSpec spec;
  spec.paths = {tap(1.0, 1, 1)};
  spec.noise_variance = 0.1;
  Rng a(42), b(42);
  DDGrid x(8, 8);
  x(0, 0) = 1.0;
  CHECK(apply_channel(x, spec, cfg, a).mat() == apply_channel(x, spec, cfg, b).mat());
}

TEST_CASE("Rician generator") {
  const auto cfg = SystemConfig::reference();
  Rng rng(10);

  SECTION("infinite K gives a single unit LoS path") {
    const auto spec = gen_rician(cfg, std::numeric_limits<double>::infinity(), 4, rng);
    REQUIRE(spec.paths.size() == 1);
    CHECK_THAT(std::abs(spec.paths[0].gain), WithinAbs(1.0, 1e-14));
  }
  SECTION("one path") {
    const auto spec = gen_rician(cfg, 10.0, 1, rng);
    CHECK(spec.paths.size() == 1);
    CHECK_THAT(spec.total_power(), WithinAbs(1.0, 1e-14));
  }
  SECTION("mean power is one and taps are in range") {
    double acc = 0.0;
    const int draws = 10'000;
    for (int i = 0; i < draws; ++i) {
      const auto spec = gen_rician(cfg, 10.0, 4, rng, {8, 4});
      REQUIRE(spec.paths.size() == 4);
      for (const auto& p : spec.paths) {
        CHECK(p.is_integer());
        CHECK((p.delay_tap >= 0 && p.delay_tap <= 8));
        CHECK((p.doppler_tap >= -4 && p.doppler_tap <= 4));
      }
      acc += spec.total_power();
    }
    CHECK_THAT(acc / draws, WithinAbs(1.0, 0.05));
  }
}

TEST_CASE("power normalization") {
  ChannelSpec spec;
  spec.paths = {tap(3.0, 0, 0), tap({0.0, 4.0}, 1, 0)};
  spec.normalize_power();
  CHECK_THAT(spec.total_power(), WithinAbs(1.0, 1e-14));
  CHECK_THAT(std::abs(spec.paths[1].gain), WithinAbs(0.8, 1e-14));
}

TEST_CASE("channel aging") {
  Rng rng(11);
  ChannelSpec spec;
  spec.paths = {tap({0.6, 0.0}, 0, 0), tap({0.0, 0.8}, 3, -1)};

  CHECK(AgingModel::jakes(0.0, 1e-3).rho == 1.0);
  const auto same = age_channel(spec, AgingModel::jakes(0.0, 1e-3), rng);
  for (std::size_t i = 0; i < spec.paths.size(); ++i) {
    CHECK(same.paths[i].gain == spec.paths[i].gain);
    CHECK(same.paths[i].delay_tap == spec.paths[i].delay_tap);
  }

  const double f = 500.0, t = 1e-3;
  CHECK_THAT(AgingModel::jakes(f, t).rho, WithinAbs(std::cyl_bessel_j(0.0, 2.0 * kPi * f * t), 1e-15));

  SECTION("rho = 0 draws fresh CN(0, beta) gains") {
    const AgingModel iid{0.0, 0.0, 2.0};
    double acc = 0.0;
    cplx mean = 0.0;
    for (int i = 0; i < 20'000; ++i) {
      const auto s = age_channel(spec, iid, rng);
      acc += std::norm(s.paths[0].gain);
      mean += s.paths[0].gain;
    }
    CHECK_THAT(acc / 20'000, WithinRel(2.0, 0.05));
    CHECK(std::abs(mean / 20'000.0) < 0.05);
  }

  SECTION("stationary power over many steps") {
    const AgingModel m = AgingModel::jakes(2000.0, 1e-4, 0.5);
    double acc = 0.0;
    const int chains = 2000, steps = 1000;
    for (int c = 0; c < chains; ++c) {
      ChannelSpec s;
      s.paths = {tap(rng.cnormal(0.5), 0, 0), tap(rng.cnormal(0.5), 1, 0)};
      for (int i = 0; i < steps; ++i) s = age_channel(s, m, rng);
      acc += s.total_power();
    }
    CHECK_THAT(acc / chains, WithinRel(1.0, 0.05));
  }
}

TEST_CASE("channel spec json round trip") {
  ChannelSpec spec;
  spec.paths = {tap({0.5, -0.25}, 3, -2), Path{1.0, 1.5, 0.25}};
  spec.noise_variance = 0.01;
  spec.cfo_hz = 1e3;
  spec.aging = AgingModel{0.9, 10.0, 1.0};
  const nlohmann::json j = spec;
  const auto back = j.get<ChannelSpec>();
  REQUIRE(back.paths.size() == 2);
  CHECK(back.paths[0].gain == spec.paths[0].gain);
  CHECK(back.paths[1].delay_tap == 1.5);
  CHECK(back.noise_variance == 0.01);
  CHECK(back.cfo_hz == 1e3);
  REQUIRE(back.aging);
  CHECK(back.aging->rho == 0.9);
}
