#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "fdrl/random.hpp"
#include "fdrl/tensor.hpp"

namespace fdrl {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b) noexcept;

struct TopologyConfig {
  std::size_t grid_side = 3;
  std::size_t users_per_cell = 2;
  double inter_site_distance_m = 500.0;
  std::size_t neighbor_count = 4;
  double d_min_m = 10.0;
  double shadowing_sigma_db = 8.0;
  double doppler_hz = 10.0;
  double slot_duration_s = 0.02;
};

// Square grid of cells, one BS at each cell center. Cell n sits at row
// n / grid_side, column n % grid_side; the grid is centered on the origin.
struct Topology {
  std::size_t grid_side = 0;
  double inter_site_distance = 0.0;
  UserLayout users;
  std::vector<Point> bs_positions;
  std::vector<std::vector<Point>> user_positions;  // [cell][user]
  std::vector<std::vector<std::size_t>> neighbor_sets;  // U_n, nearest first

  std::size_t n_cells() const noexcept { return bs_positions.size(); }
  // Edge length of every (square) cell.
  double cell_side() const noexcept { return inter_site_distance; }
};

struct ChannelState {
  LinkTensor<std::complex<double>> h;  // small-scale fading
  GainTensor alpha;                     // large-scale gain
  double rho = 1.0;                     // slot-to-slot correlation

  // g = |h|^2 * alpha.
  GainTensor gains() const;
};

// Bessel function of the first kind, order zero. Power series below |x| = 8,
// rational asymptotic form beyond.
double bessel_j0(double x);

// Slot-to-slot fading correlation of the Jakes model, J0(2 pi f_d T_s).
double jakes_rho(double doppler_hz, double slot_duration_s);

// Positions of the cell centers only (no users), plus neighbor sets.
std::vector<Point> bs_grid(std::size_t grid_side, double inter_site_distance);
std::vector<std::vector<std::size_t>> neighbor_sets(std::span<const Point> bs_positions,
                                                    std::size_t neighbor_count);

Topology build_topology(const TopologyConfig& config, RandomStream& rng);

// Urban macro path loss in dB, 120.9 + 37.6 log10(d / 1 km).
double path_loss_db(double distance_m);

// alpha[n][j][k] from path loss and i.i.d. log-normal shadowing.
GainTensor large_scale_gains(const Topology& topology, double shadowing_sigma_db,
                             double d_min_m, RandomStream& rng);

LinkTensor<std::complex<double>> init_fading(const Topology& topology, RandomStream& rng);

// One Gauss-Markov step h <- rho h + sqrt(1 - rho^2) e; alpha is untouched.
ChannelState step_fading(ChannelState state, RandomStream& rng);

}  // namespace fdrl
