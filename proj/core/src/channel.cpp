#include "fdrl/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fdrl/error.hpp"

namespace fdrl {

double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

GainTensor ChannelState::gains() const {
  GainTensor g(alpha.layout());
  auto out = g.flat();
  auto hs = h.flat();
  auto as = alpha.flat();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::norm(hs[i]) * as[i];
  return g;
}

namespace {

double j0_series(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int m = 1; m < 60; ++m) {
    term *= -q / (static_cast<double>(m) * m);
    sum += term;
    if (std::abs(term) < 1e-17 * std::max(1.0, std::abs(sum))) break;
  }
  return sum;
}

// Hankel asymptotic form with fitted P0/Q0 polynomials in (8/x)^2.
double j0_asymptotic(double ax) {
  const double z = 8.0 / ax;
  const double y = z * z;
  const double phase = ax - 0.785398164;
  const double p0 = 1.0 + y * (-0.1098628627e-2 + y * (0.2734510407e-4 +
                    y * (-0.2073370639e-5 + y * 0.2093887211e-6)));
  const double q0 = -0.1562499995e-1 + y * (0.1430488765e-3 +
                    y * (-0.6911147651e-5 + y * (0.7621095161e-6 - y * 0.934935152e-7)));
  return std::sqrt(0.636619772 / ax) * (std::cos(phase) * p0 - z * std::sin(phase) * q0);
}

}  // namespace

double bessel_j0(double x) {
  if (!std::isfinite(x)) throw DomainError("bessel_j0: non-finite argument");
  const double ax = std::abs(x);
  return ax < 8.0 ? j0_series(ax) : j0_asymptotic(ax);
}

double jakes_rho(double doppler_hz, double slot_duration_s) {
  if (!(doppler_hz >= 0.0)) throw DomainError("jakes_rho: Doppler frequency must be >= 0");
  if (!(slot_duration_s > 0.0)) throw DomainError("jakes_rho: slot duration must be > 0");
  return bessel_j0(2.0 * std::numbers::pi * doppler_hz * slot_duration_s);
}

std::vector<Point> bs_grid(std::size_t grid_side, double inter_site_distance) {
  std::vector<Point> out;
  out.reserve(grid_side * grid_side);
  const double half = (static_cast<double>(grid_side) - 1.0) / 2.0;
  for (std::size_t row = 0; row < grid_side; ++row) {
    for (std::size_t col = 0; col < grid_side; ++col) {
      out.push_back({(static_cast<double>(col) - half) * inter_site_distance,
                     (static_cast<double>(row) - half) * inter_site_distance});
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> neighbor_sets(std::span<const Point> bs_positions,
                                                    std::size_t neighbor_count) {
  const std::size_t n_cells = bs_positions.size();
  const std::size_t c = n_cells == 0 ? 0 : std::min(neighbor_count, n_cells - 1);
  std::vector<std::vector<std::size_t>> sets(n_cells);
  for (std::size_t n = 0; n < n_cells; ++n) {
    std::vector<std::size_t> others;
    for (std::size_t m = 0; m < n_cells; ++m) {
      if (m != n) others.push_back(m);
    }
    // Grid coordinates are exact multiples of the spacing, so squared
    // distances compare exactly and ties fall back to the index.
    auto d2 = [&](std::size_t m) {
      const double dx = bs_positions[m].x - bs_positions[n].x;
      const double dy = bs_positions[m].y - bs_positions[n].y;
      return dx * dx + dy * dy;
    };
    std::stable_sort(others.begin(), others.end(),
                     [&](std::size_t a, std::size_t b) { return d2(a) < d2(b); });
    others.resize(c);
    sets[n] = std::move(others);
  }
  return sets;
}

Topology build_topology(const TopologyConfig& config, RandomStream& rng) {
  if (config.grid_side < 1) throw DomainError("build_topology: grid_side must be >= 1");
  if (config.users_per_cell < 1) throw DomainError("build_topology: users_per_cell must be >= 1");
  const double side = config.inter_site_distance_m;
  if (!(side > 0.0)) throw DomainError("build_topology: inter-site distance must be > 0");
  if (!(config.d_min_m >= 0.0) || 2.0 * config.d_min_m >= side) {
    throw DomainError("build_topology: d_min must be in [0, inter_site_distance / 2)");
  }

  Topology topo;
  topo.grid_side = config.grid_side;
  topo.inter_site_distance = side;
  topo.bs_positions = bs_grid(config.grid_side, side);
  const std::size_t n_cells = topo.bs_positions.size();
  topo.users = UserLayout(n_cells, config.users_per_cell);
  topo.neighbor_sets = neighbor_sets(topo.bs_positions, config.neighbor_count);

  topo.user_positions.resize(n_cells);
  for (std::size_t j = 0; j < n_cells; ++j) {
    const Point center = topo.bs_positions[j];
    auto& users = topo.user_positions[j];
    users.reserve(config.users_per_cell);
    while (users.size() < config.users_per_cell) {
      const Point candidate{center.x + rng.uniform(-side / 2.0, side / 2.0),
                            center.y + rng.uniform(-side / 2.0, side / 2.0)};
      if (distance(candidate, center) >= config.d_min_m) users.push_back(candidate);
    }
  }
  return topo;
}

double path_loss_db(double distance_m) {
  if (!(distance_m > 0.0)) throw DomainError("path_loss_db: distance must be > 0");
  return 120.9 + 37.6 * std::log10(distance_m / 1000.0);
}

GainTensor large_scale_gains(const Topology& topology, double shadowing_sigma_db,
                             double d_min_m, RandomStream& rng) {
  GainTensor alpha(topology.users);
  for (std::size_t n = 0; n < topology.n_cells(); ++n) {
    for (std::size_t j = 0; j < topology.n_cells(); ++j) {
      for (std::size_t k = 0; k < topology.users.users_in(j); ++k) {
        const double d = distance(topology.bs_positions[n], topology.user_positions[j][k]);
        if (d < d_min_m) throw DomainError("large_scale_gains: BS-user distance below d_min");
        const double shadow_db = shadowing_sigma_db * rng.normal();
        alpha(n, j, k) = std::pow(10.0, (shadow_db - path_loss_db(d)) / 10.0);
      }
    }
  }
  return alpha;
}

LinkTensor<std::complex<double>> init_fading(const Topology& topology, RandomStream& rng) {
  LinkTensor<std::complex<double>> h(topology.users);
  for (auto& entry : h.flat()) entry = rng.complex_normal();
  return h;
}

ChannelState step_fading(ChannelState state, RandomStream& rng) {
  if (!(std::abs(state.rho) <= 1.0)) throw DomainError("step_fading: |rho| must be <= 1");
  const double innovation = std::sqrt(1.0 - state.rho * state.rho);
  for (auto& entry : state.h.flat()) entry = state.rho * entry + innovation * rng.complex_normal();
  return state;
}

}  // namespace fdrl
