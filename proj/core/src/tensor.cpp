#include "fdrl/tensor.hpp"

#include <algorithm>

namespace fdrl {

UserLayout::UserLayout(std::span<const std::size_t> users_per_cell) {
  offsets_.reserve(users_per_cell.size() + 1);
  offsets_.push_back(0);
  for (std::size_t k : users_per_cell) offsets_.push_back(offsets_.back() + k);
}

UserLayout::UserLayout(std::size_t n_cells, std::size_t users_per_cell) {
  offsets_.reserve(n_cells + 1);
  for (std::size_t j = 0; j <= n_cells; ++j) offsets_.push_back(j * users_per_cell);
}

std::size_t UserLayout::cell_of(std::size_t flat_user) const {
  if (flat_user >= total_users()) throw UsageError("user index out of range");
  auto it = std::upper_bound(offsets_.begin(), offsets_.end(), flat_user);
  return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

}  // namespace fdrl
