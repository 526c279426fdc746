#include "metaselect/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace metaselect {

TimestepGrid::TimestepGrid(std::size_t count, double horizon, double t_min) : horizon_(horizon), t_min_(t_min) {
  if (count < 2) throw std::invalid_argument("grid count must be >= 2, got " + std::to_string(count));
  if (!(t_min > 0.0) || !(t_min < horizon) || !std::isfinite(horizon))
    throw std::invalid_argument("grid requires 0 < t_min < horizon");
  points_.resize(count);
  const double log_lo = std::log(t_min);
  const double log_span = std::log(horizon) - log_lo;
  const double steps = static_cast<double>(count - 1);
  for (std::size_t j = 0; j < count; ++j)
    points_[j] = std::exp(log_lo + log_span * (static_cast<double>(j) / steps));
  points_.front() = t_min;
  points_.back() = horizon;
}

std::optional<std::size_t> TimestepGrid::floor_index(double seconds) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), seconds);
  if (it == points_.begin()) return std::nullopt;
  return static_cast<std::size_t>(it - points_.begin()) - 1;
}

}  // namespace metaselect
