#pragma once

#include <array>
#include <cstddef>

namespace fracrd {

/// Default cap on n^N; large enough for 4096^2 or 256^3 runs.
inline constexpr std::size_t kDefaultNodeBudget = std::size_t{1} << 24;

/// Periodic box [-L/2, L/2)^N sampled with n points per axis.
///
/// Nodes are stored row-major (last axis fastest) and coordinates follow the
/// FFT convention: node j on an axis sits at x = j*h for j < n/2 and at
/// x = (j - n)*h otherwise, so the origin is node 0 and every coordinate lies
/// in [-L/2, L/2).
class Grid {
 public:
  Grid(int dims, double extent, int points_per_axis,
       std::size_t node_budget = kDefaultNodeBudget);

  int dims() const noexcept { return dims_; }
  int points_per_axis() const noexcept { return n_; }
  double extent() const noexcept { return extent_; }
  double spacing() const noexcept { return extent_ / n_; }
  std::size_t node_count() const noexcept { return nodes_; }
  /// h^N, the weight of one node in discrete integrals.
  double cell_volume() const noexcept;
  /// L^N.
  double volume() const noexcept;

  /// Signed integer mode for FFT index j: j for j < n/2, j - n otherwise.
  int mode(int j) const noexcept { return j < n_ / 2 ? j : j - n_; }
  /// 2*pi*mode(j)/L.
  double wavenumber(int j) const noexcept;
  /// Wrapped coordinate of index j along one axis.
  double coordinate(int j) const noexcept { return mode(j) * spacing(); }

  /// Per-axis indices of a linear node index (unused axes are zero).
  std::array<int, 3> unravel(std::size_t node) const noexcept;
  std::size_t ravel(const std::array<int, 3>& idx) const noexcept;
  std::array<double, 3> position(std::size_t node) const noexcept;
  /// Euclidean norm of position(node).
  double radius(std::size_t node) const noexcept;

  /// Number of complex coefficients in the half spectrum of a real field.
  std::size_t spectrum_size() const noexcept;

  bool operator==(const Grid& other) const noexcept {
    return dims_ == other.dims_ && n_ == other.n_ && extent_ == other.extent_;
  }

 private:
  int dims_;
  int n_;
  double extent_;
  std::size_t nodes_;
};

/// Validating factory: InvalidDims, NotPowerOfTwo, MemoryBudgetExceeded.
Grid make_grid(int dims, double extent, int points_per_axis,
               std::size_t node_budget = kDefaultNodeBudget);

/// Same grid with the extent multiplied by `factor` (node-aligned rescaling).
Grid rescaled(const Grid& grid, double factor);

/// Minimal-image distance between two nodes of the periodic box.
double periodic_distance(const Grid& grid, std::size_t a, std::size_t b);

}  // namespace fracrd
