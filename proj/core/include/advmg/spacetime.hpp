#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace advmg {

/// (nt + 1) x nx array of spatial vectors, one row per time level.
class SpaceTimeArray {
 public:
  SpaceTimeArray() = default;
  SpaceTimeArray(std::size_t nx, std::size_t nt) : nx_(nx), nt_(nt), values_((nt + 1) * nx, 0.0) {}

  std::size_t nx() const noexcept { return nx_; }
  std::size_t nt() const noexcept { return nt_; }

  std::span<double> at(std::size_t n) noexcept { return {values_.data() + n * nx_, nx_}; }
  std::span<const double> at(std::size_t n) const noexcept { return {values_.data() + n * nx_, nx_}; }

  std::vector<double>& data() noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }

  bool operator==(const SpaceTimeArray&) const = default;

 private:
  std::size_t nx_ = 0;
  std::size_t nt_ = 0;
  std::vector<double> values_;
};

}  // namespace advmg
