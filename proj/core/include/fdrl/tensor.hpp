#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fdrl/error.hpp"

namespace fdrl {

// Shape of the user population: cell j serves users_in(j) users, stored
// contiguously at [offset(j), offset(j) + users_in(j)).
class UserLayout {
 public:
  UserLayout() = default;
  explicit UserLayout(std::span<const std::size_t> users_per_cell);
  UserLayout(std::size_t n_cells, std::size_t users_per_cell);

  std::size_t n_cells() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t users_in(std::size_t cell) const { return offsets_.at(cell + 1) - offsets_.at(cell); }
  std::size_t offset(std::size_t cell) const { return offsets_.at(cell); }
  std::size_t total_users() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }
  std::size_t flat(std::size_t cell, std::size_t user) const { return offsets_[cell] + user; }
  std::size_t cell_of(std::size_t flat_user) const;

  bool operator==(const UserLayout&) const = default;

 private:
  std::vector<std::size_t> offsets_;
};

// Per-(cell, user) quantity: transmit powers, rates, observations, actions.
template <class T>
class UserTensor {
 public:
  UserTensor() = default;
  explicit UserTensor(UserLayout layout, const T& fill = T{})
      : layout_(std::move(layout)), data_(layout_.total_users(), fill) {}

  const UserLayout& layout() const noexcept { return layout_; }
  T& operator()(std::size_t cell, std::size_t user) { return data_[layout_.flat(cell, user)]; }
  const T& operator()(std::size_t cell, std::size_t user) const { return data_[layout_.flat(cell, user)]; }
  std::span<T> flat() noexcept { return data_; }
  std::span<const T> flat() const noexcept { return data_; }
  // Users of one cell.
  std::span<const T> cell(std::size_t j) const {
    return std::span<const T>(data_).subspan(layout_.offset(j), layout_.users_in(j));
  }

  bool operator==(const UserTensor&) const = default;

 private:
  UserLayout layout_;
  std::vector<T> data_;
};

// Per-link quantity indexed [n][j][k]: from BS n to user k of cell j.
template <class T>
class LinkTensor {
 public:
  LinkTensor() = default;
  explicit LinkTensor(UserLayout layout, const T& fill = T{})
      : layout_(std::move(layout)), data_(layout_.n_cells() * layout_.total_users(), fill) {}

  const UserLayout& layout() const noexcept { return layout_; }
  std::size_t n_cells() const noexcept { return layout_.n_cells(); }
  T& operator()(std::size_t bs, std::size_t cell, std::size_t user) {
    return data_[bs * layout_.total_users() + layout_.flat(cell, user)];
  }
  const T& operator()(std::size_t bs, std::size_t cell, std::size_t user) const {
    return data_[bs * layout_.total_users() + layout_.flat(cell, user)];
  }
  std::span<T> flat() noexcept { return data_; }
  std::span<const T> flat() const noexcept { return data_; }

  bool operator==(const LinkTensor&) const = default;

 private:
  UserLayout layout_;
  std::vector<T> data_;
};

using PowerAllocation = UserTensor<double>;  // watts
using RateMatrix = UserTensor<double>;       // bit/s/Hz
using GainTensor = LinkTensor<double>;       // linear, dimensionless

}  // namespace fdrl
