#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace vecrl {

// Observation/action space descriptor: discrete {0..n-1} or a box with
// per-dimension bounds.
struct Space {
  enum class Kind { Discrete, Box };

  Kind kind = Kind::Discrete;
  std::size_t n = 0;                      // discrete only
  std::vector<double> low, high;          // box only; size = dimensionality

  static Space discrete(std::size_t n);
  static Space box(std::vector<double> low, std::vector<double> high);

  // Flat width of one sample: 1 for discrete, dims for box.
  std::size_t flat_dim() const { return kind == Kind::Discrete ? 1 : low.size(); }

  bool operator==(const Space&) const = default;

  std::string describe() const;
};

}  // namespace vecrl
