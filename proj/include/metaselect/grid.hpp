#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace metaselect {

/// Logarithmic time grid: t_j = t_min * (horizon / t_min)^(j / (count - 1)).
class TimestepGrid {
 public:
  static constexpr std::size_t kDefaultCount = 500;
  static constexpr double kDefaultHorizon = 3600.0;
  static constexpr double kDefaultTMin = 0.01;

  TimestepGrid() : TimestepGrid(kDefaultCount, kDefaultHorizon, kDefaultTMin) {}

  /// Throws std::invalid_argument unless count >= 2 and 0 < t_min < horizon.
  TimestepGrid(std::size_t count, double horizon, double t_min);

  std::size_t size() const { return points_.size(); }
  double horizon() const { return horizon_; }
  double t_min() const { return t_min_; }
  double operator[](std::size_t j) const { return points_[j]; }
  const std::vector<double>& points() const { return points_; }

  /// Largest index with point <= seconds, or nullopt when seconds < t_min.
  std::optional<std::size_t> floor_index(double seconds) const;

  friend bool operator==(const TimestepGrid& a, const TimestepGrid& b) {
    return a.points_.size() == b.points_.size() && a.horizon_ == b.horizon_ && a.t_min_ == b.t_min_;
  }

 private:
  double horizon_;
  double t_min_;
  std::vector<double> points_;
};

inline TimestepGrid make_grid(std::size_t count, double horizon, double t_min) {
  return TimestepGrid(count, horizon, t_min);
}

}  // namespace metaselect
