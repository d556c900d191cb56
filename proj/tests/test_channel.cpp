#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fdrl/channel.hpp"
#include "fdrl/error.hpp"
#include "oracles.hpp"

using namespace fdrl;

TEST_CASE("bessel_j0 reference values") {
  CHECK(bessel_j0(0.0) == 1.0);
  CHECK(std::abs(bessel_j0(1.2566370) - 0.64251) < 1e-4);
  CHECK(std::abs(bessel_j0(1.2566370) - oracle::j0_series(1.2566370)) < 1e-9);

  // First zero by bisection on the series.
  double lo = 2.0, hi = 3.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (oracle::j0_series(mid, 20) > 0.0 ? lo : hi) = mid;
  }
  CHECK(std::abs(lo - 2.4048256) < 1e-6);
  CHECK(std::abs(bessel_j0(2.4048256)) < 1e-5);
}

TEST_CASE("bessel_j0 agrees with the 10-term series near the origin") {
  for (double x = -2.0; x <= 2.0; x += 0.01) {
    CHECK(std::abs(bessel_j0(x) - oracle::j0_series(x)) < 1e-6);
  }
}

TEST_CASE("bessel_j0 accuracy over |x| <= 20") {
  double worst = 0.0;
  for (double x = -20.0; x <= 20.0; x += 0.005) {
    worst = std::max(worst, std::abs(bessel_j0(x) - std::cyl_bessel_j(0.0, std::abs(x))));
  }
  CHECK(worst <= 1e-7);
}

TEST_CASE("bessel_j0 rejects non-finite input") {
  CHECK_THROWS_AS(bessel_j0(std::nan("")), DomainError);
  CHECK_THROWS_AS(bessel_j0(INFINITY), DomainError);
}

TEST_CASE("jakes_rho") {
  CHECK(jakes_rho(0.0, 0.02) == 1.0);
  CHECK(std::abs(jakes_rho(10.0, 0.02) - oracle::j0_series(2.0 * std::numbers::pi * 0.2)) < 1e-9);
  CHECK(std::abs(jakes_rho(10.0, 0.02) - 0.64251) < 1e-4);
  CHECK(std::abs(jakes_rho(25.0, 0.02) - (-0.30425)) < 1e-4);
  CHECK_THROWS_AS(jakes_rho(-1.0, 0.02), DomainError);
  CHECK_THROWS_AS(jakes_rho(10.0, 0.0), DomainError);

  SUBCASE("monotone decreasing up to the first zero") {
    const double ts = 0.02;
    const double f_zero = 2.404825557695773 / (2.0 * std::numbers::pi * ts);
    double prev = 2.0;
    for (int i = 0; i < 50; ++i) {
      const double rho = jakes_rho(f_zero * i / 49.0, ts);
      CHECK(rho < prev);
      prev = rho;
    }
  }
}

TEST_CASE("build_topology geometry") {
  RandomStream rng(7);
  SUBCASE("single cell") {
    TopologyConfig cfg;
    cfg.grid_side = 1;
    cfg.users_per_cell = 1;
    const Topology t = build_topology(cfg, rng);
    REQUIRE(t.n_cells() == 1);
    CHECK(t.bs_positions[0].x == 0.0);
    CHECK(t.bs_positions[0].y == 0.0);
    CHECK(t.neighbor_sets[0].empty());
  }
  SUBCASE("2x2 grid is a complete neighbor graph") {
    TopologyConfig cfg;
    cfg.grid_side = 2;
    cfg.neighbor_count = 3;
    const Topology t = build_topology(cfg, rng);
    for (std::size_t n = 0; n < 4; ++n) {
      auto set = t.neighbor_sets[n];
      CHECK(set.size() == 3);
      CHECK(std::find(set.begin(), set.end(), n) == set.end());
    }
  }
  SUBCASE("neighbor count clamps to n_cells - 1") {
    TopologyConfig cfg;
    cfg.grid_side = 2;
    cfg.neighbor_count = 10;
    const Topology t = build_topology(cfg, rng);
    CHECK(t.neighbor_sets[0].size() == 3);
  }
  SUBCASE("users stay inside their square, outside d_min") {
    TopologyConfig cfg;
    cfg.grid_side = 4;
    cfg.users_per_cell = 6;
    const Topology t = build_topology(cfg, rng);
    CHECK(t.n_cells() == 16);
    const double half = cfg.inter_site_distance_m / 2.0;
    for (std::size_t j = 0; j < t.n_cells(); ++j) {
      REQUIRE(t.user_positions[j].size() == 6);
      for (const Point& u : t.user_positions[j]) {
        CHECK(std::abs(u.x - t.bs_positions[j].x) <= half);
        CHECK(std::abs(u.y - t.bs_positions[j].y) <= half);
        CHECK(distance(u, t.bs_positions[j]) >= cfg.d_min_m);
      }
    }
  }
}

TEST_CASE("neighbor sets follow brute-force distance order") {
  TopologyConfig cfg;
  cfg.grid_side = 5;
  cfg.neighbor_count = 4;
  RandomStream rng(3);
  const Topology t = build_topology(cfg, rng);
  // Corner cell: two edge neighbors, the diagonal, then the nearer of the
  // distance-2 cells by index.
  CHECK(t.neighbor_sets[0] == std::vector<std::size_t>{1, 5, 6, 2});
  for (std::size_t n = 0; n < t.n_cells(); ++n) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t m = 0; m < t.n_cells(); ++m) {
      if (m != n) all.emplace_back(distance(t.bs_positions[n], t.bs_positions[m]), m);
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < 4; ++i) expected.push_back(all[i].second);
    CHECK(t.neighbor_sets[n] == expected);
  }
}

TEST_CASE("path loss and large-scale gains") {
  CHECK(path_loss_db(1000.0) == doctest::Approx(120.9));
  CHECK(path_loss_db(100.0) == doctest::Approx(120.9 - 37.6));

  Topology t;
  t.inter_site_distance = 2000.0;
  t.bs_positions = {{0.0, 0.0}};
  t.users = UserLayout(1, 2);
  t.user_positions = {{{1000.0, 0.0}, {0.0, 100.0}}};
  t.neighbor_sets = {{}};
  RandomStream rng(1);
  const GainTensor alpha = large_scale_gains(t, 0.0, 10.0, rng);
  CHECK(std::abs(alpha(0, 0, 0) / std::pow(10.0, -12.09) - 1.0) < 1e-12);
  CHECK(std::abs(alpha(0, 0, 1) / std::pow(10.0, -8.33) - 1.0) < 1e-12);

  t.user_positions = {{{5.0, 0.0}, {0.0, 100.0}}};
  CHECK_THROWS_AS(large_scale_gains(t, 0.0, 10.0, rng), DomainError);
}

TEST_CASE("shadowing log-ratio statistics") {
  Topology t;
  t.inter_site_distance = 500.0;
  t.bs_positions = {{0.0, 0.0}};
  t.users = UserLayout(1, 1);
  t.user_positions = {{{200.0, 0.0}}};
  t.neighbor_sets = {{}};
  const double sigma = 8.0;
  RandomStream a(11), b(12);
  const std::size_t draws = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    const double r = std::log10(large_scale_gains(t, sigma, 10.0, a)(0, 0, 0) /
                                large_scale_gains(t, sigma, 10.0, b)(0, 0, 0));
    sum += r;
    sum2 += r * r;
  }
  const double mean = sum / draws;
  const double var = sum2 / draws - mean * mean;
  const double expected_var = 2.0 * sigma * sigma / 100.0;
  CHECK(std::abs(mean) < 4.0 * std::sqrt(expected_var / draws));
  CHECK(std::abs(var / expected_var - 1.0) < 0.05);
}

namespace {

Topology one_cell_many_users(std::size_t users) {
  Topology t;
  t.inter_site_distance = 500.0;
  t.bs_positions = {{0.0, 0.0}};
  t.users = UserLayout(1, users);
  t.user_positions = {std::vector<Point>(users, Point{100.0, 0.0})};
  t.neighbor_sets = {{}};
  return t;
}

}  // namespace

TEST_CASE("init_fading is unit-variance Rayleigh") {
  const Topology t = one_cell_many_users(100000);
  RandomStream rng(5);
  const auto h = init_fading(t, rng);
  double power = 0.0;
  std::vector<double> env;
  for (const auto& v : h.flat()) {
    power += std::norm(v);
    env.push_back(std::abs(v));
  }
  CHECK(std::abs(power / h.flat().size() - 1.0) < 0.02);

  // KS against Rayleigh(scale 1/sqrt(2)): F(r) = 1 - exp(-r^2).
  std::sort(env.begin(), env.end());
  double d = 0.0;
  const double n = static_cast<double>(env.size());
  for (std::size_t i = 0; i < env.size(); ++i) {
    const double f = 1.0 - std::exp(-env[i] * env[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  CHECK(oracle::ks_p_value(d, env.size()) > 0.01);

  RandomStream again(5);
  CHECK(init_fading(t, again) == h);
}

TEST_CASE("step_fading limits and autocorrelation") {
  const Topology t = one_cell_many_users(64);
  RandomStream rng(9);
  ChannelState s{init_fading(t, rng), GainTensor(t.users, 1e-9), 1.0};

  SUBCASE("rho = 1 keeps h") {
    const ChannelState next = step_fading(s, rng);
    CHECK(next.h == s.h);
    CHECK(next.alpha == s.alpha);
  }
  SUBCASE("rho = 0 is pure innovation") {
    s.rho = 0.0;
    RandomStream r1(100), r2(100);
    ChannelState other = s;
    for (auto& v : other.h.flat()) v *= 3.0;
    CHECK(step_fading(s, r1).h == step_fading(other, r2).h);
  }
  SUBCASE("lag-1 autocorrelation equals rho") {
    const Topology single = one_cell_many_users(1);
    RandomStream r(21);
    ChannelState c{init_fading(single, r), GainTensor(single.users, 1.0), 0.64251};
    const std::size_t steps = 100000;
    double prev = c.h.flat()[0].real();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
      c = step_fading(std::move(c), r);
      const double cur = c.h.flat()[0].real();
      num += prev * cur;
      den += prev * prev;
      prev = cur;
    }
    CHECK(std::abs(num / den - 0.643) < 0.01);
  }
}

TEST_CASE("step_fading preserves unit power") {
  const Topology t = one_cell_many_users(1000);
  RandomStream rng(33);
  ChannelState s{init_fading(t, rng), GainTensor(t.users, 1.0), jakes_rho(10.0, 0.02)};
  for (int i = 0; i < 10000; ++i) s = step_fading(std::move(s), rng);
  double power = 0.0;
  for (const auto& v : s.h.flat()) power += std::norm(v);
  CHECK(std::abs(power / 1000.0 - 1.0) < 0.05);

  const GainTensor g = s.gains();
  for (double v : g.flat()) CHECK(v >= 0.0);

  s.rho = 1.5;
  CHECK_THROWS_AS(step_fading(s, rng), DomainError);
}

TEST_CASE("seeded topology, gains and fading are reproducible") {
  TopologyConfig cfg;
  auto draw = [&](std::uint64_t seed) {
    RandomStream rng(seed);
    Topology t = build_topology(cfg, rng);
    ChannelState s{init_fading(t, rng), large_scale_gains(t, 8.0, 10.0, rng), 0.6};
    for (int i = 0; i < 5; ++i) s = step_fading(std::move(s), rng);
    return std::make_pair(t.user_positions[3][1].x, s.gains());
  };
  const auto a = draw(42);
  const auto b = draw(42);
  const auto c = draw(43);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK_FALSE(a.second == c.second);
}
