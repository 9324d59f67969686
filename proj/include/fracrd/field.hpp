#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fracrd/grid.hpp"

namespace fracrd {

/// Real scalar lattice function on a Grid. Immutable once built.
class Field {
 public:
  Field(Grid grid, std::vector<double> values);

  static Field constant(const Grid& grid, double value);
  static Field zeros(const Grid& grid) { return constant(grid, 0.0); }
  static Field from_function(const Grid& grid,
                             const std::function<double(const std::array<double, 3>&)>& fn);
  /// Unit value at node 0 (the origin), zero elsewhere.
  static Field delta(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  bool all_finite() const noexcept;

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(double s, const Field& a);
/// Nodewise map.
Field transform(const Field& a, const std::function<double(double)>& fn);

// Discrete measure: every node carries weight h^N.
double integral(const Field& u);
double mean(const Field& u);
double min_value(const Field& u);
double sup_norm(const Field& u);
/// Spacing-weighted L^p norm; p = +infinity gives the lattice maximum.
double lp_norm(const Field& u, double p);
/// L^2 inner product with the same discrete measure.
double inner(const Field& a, const Field& b);

/// m species fields on a common grid.
using SpeciesState = std::vector<Field>;

void require_same_grid(const Field& a, const Field& b);

}  // namespace fracrd
