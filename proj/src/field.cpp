#include "fracrd/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fracrd/error.hpp"

namespace fracrd {

Field::Field(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.node_count()) {
    throw Error(ErrorCode::GridMismatch, "value count does not match grid node count");
  }
}

Field Field::constant(const Grid& grid, double value) {
  return Field(grid, std::vector<double>(grid.node_count(), value));
}

Field Field::from_function(const Grid& grid,
                           const std::function<double(const std::array<double, 3>&)>& fn) {
  std::vector<double> v(grid.node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.position(i));
  return Field(grid, std::move(v));
}

Field Field::delta(const Grid& grid) {
  std::vector<double> v(grid.node_count(), 0.0);
  v[0] = 1.0;
  return Field(grid, std::move(v));
}

bool Field::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw Error(ErrorCode::GridMismatch, "fields live on different grids");
}

Field operator+(const Field& a, const Field& b) {
  require_same_grid(a, b);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
  return Field(a.grid(), std::move(v));
}

Field operator-(const Field& a, const Field& b) {
  require_same_grid(a, b);
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
  return Field(a.grid(), std::move(v));
}

Field operator*(double s, const Field& a) {
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = s * a[i];
  return Field(a.grid(), std::move(v));
}

Field transform(const Field& a, const std::function<double(double)>& fn) {
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(a[i]);
  return Field(a.grid(), std::move(v));
}

double integral(const Field& u) {
  double s = 0.0;
  for (double x : u.values()) s += x;
  return s * u.grid().cell_volume();
}

double mean(const Field& u) { return integral(u) / u.grid().volume(); }

double min_value(const Field& u) {
  return *std::min_element(u.values().begin(), u.values().end());
}

double sup_norm(const Field& u) {
  double m = 0.0;
  for (double x : u.values()) m = std::max(m, std::abs(x));
  return m;
}

double lp_norm(const Field& u, double p) {
  if (std::isinf(p)) return sup_norm(u);
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "L^p norm needs p >= 1");
  // Scale by the maximum so large p does not overflow.
  const double scale = sup_norm(u);
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double x : u.values()) s += std::pow(std::abs(x) / scale, p);
  return scale * std::pow(s * u.grid().cell_volume(), 1.0 / p);
}

double inner(const Field& a, const Field& b) {
  require_same_grid(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid().cell_volume();
}

}  // namespace fracrd
