#include "fracrd/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fracrd/error.hpp"

namespace fracrd {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Grid::Grid(int dims, double extent, int points_per_axis, std::size_t node_budget)
    : dims_(dims), n_(points_per_axis), extent_(extent), nodes_(0) {
  if (dims < 1 || dims > 3) {
    throw Error(ErrorCode::InvalidDims, "dims must be 1, 2 or 3, got " + std::to_string(dims));
  }
  if (!is_power_of_two(points_per_axis) || points_per_axis < 8) {
    throw Error(ErrorCode::NotPowerOfTwo,
                "points_per_axis must be a power of two >= 8, got " +
                    std::to_string(points_per_axis));
  }
  if (!(extent > 0.0) || !std::isfinite(extent)) {
    throw Error(ErrorCode::InvalidArgument, "extent must be positive and finite");
  }
  // Guard against overflow before multiplying out.
  double nodes = std::pow(static_cast<double>(points_per_axis), dims);
  if (nodes > static_cast<double>(node_budget)) {
    throw Error(ErrorCode::MemoryBudgetExceeded,
                std::to_string(static_cast<long long>(nodes)) + " nodes exceed budget of " +
                    std::to_string(node_budget));
  }
  nodes_ = 1;
  for (int a = 0; a < dims; ++a) nodes_ *= static_cast<std::size_t>(points_per_axis);
}

double Grid::cell_volume() const noexcept { return std::pow(spacing(), dims_); }

double Grid::volume() const noexcept { return std::pow(extent_, dims_); }

double Grid::wavenumber(int j) const noexcept {
  return 2.0 * std::numbers::pi * mode(j) / extent_;
}

std::array<int, 3> Grid::unravel(std::size_t node) const noexcept {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dims_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(node % n_);
    node /= n_;
  }
  return idx;
}

std::size_t Grid::ravel(const std::array<int, 3>& idx) const noexcept {
  std::size_t node = 0;
  for (int a = 0; a < dims_; ++a) node = node * n_ + static_cast<std::size_t>(idx[a]);
  return node;
}

std::array<double, 3> Grid::position(std::size_t node) const noexcept {
  auto idx = unravel(node);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dims_; ++a) x[a] = coordinate(idx[a]);
  return x;
}

double Grid::radius(std::size_t node) const noexcept {
  auto x = position(node);
  return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
}

std::size_t Grid::spectrum_size() const noexcept {
  std::size_t size = static_cast<std::size_t>(n_ / 2 + 1);
  for (int a = 1; a < dims_; ++a) size *= static_cast<std::size_t>(n_);
  return size;
}

Grid make_grid(int dims, double extent, int points_per_axis, std::size_t node_budget) {
  return Grid(dims, extent, points_per_axis, node_budget);
}

Grid rescaled(const Grid& grid, double factor) {
  return Grid(grid.dims(), grid.extent() * factor, grid.points_per_axis(),
              std::max(grid.node_count(), kDefaultNodeBudget));
}

double periodic_distance(const Grid& grid, std::size_t a, std::size_t b) {
  auto ia = grid.unravel(a);
  auto ib = grid.unravel(b);
  const int n = grid.points_per_axis();
  double sum = 0.0;
  for (int ax = 0; ax < grid.dims(); ++ax) {
    int d = std::abs(ia[ax] - ib[ax]);
    d = std::min(d, n - d);
    double dx = d * grid.spacing();
    sum += dx * dx;
  }
  return std::sqrt(sum);
}

}  // namespace fracrd
