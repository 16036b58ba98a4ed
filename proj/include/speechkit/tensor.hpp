#pragma once

#include <cstddef>
#include <vector>

#include "speechkit/common.hpp"

namespace speechkit::data {

/// Dense row-major numeric block. The first axis is the length axis for
/// batching purposes.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {}

  static Tensor vector(std::vector<double> values) {
    std::size_t n = values.size();
    return Tensor{{n}, std::move(values)};
  }

  std::size_t numel() const {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return shape.empty() ? 0 : n;
  }
  std::size_t length() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t trailing_size() const {
    std::size_t n = 1;
    for (std::size_t i = 1; i < shape.size(); ++i) n *= shape[i];
    return n;
  }

  bool operator==(const Tensor&) const = default;
};

}  // namespace speechkit::data
