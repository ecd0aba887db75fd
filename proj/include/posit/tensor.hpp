#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace posit {

/// Dense row-major tensor of doubles.
struct TensorF {
  std::vector<std::size_t> dims;
  std::vector<double> data;

  TensorF() = default;
  explicit TensorF(std::vector<std::size_t> d, double fill = 0.0)
      : dims(std::move(d)), data(element_count(dims), fill) {}
  TensorF(std::vector<std::size_t> d, std::vector<double> values)
      : dims(std::move(d)), data(std::move(values)) {
    if (data.size() != element_count(dims)) {
      throw std::invalid_argument("tensor data length does not match its dims");
    }
  }

  static std::size_t element_count(const std::vector<std::size_t>& d) {
    return std::accumulate(d.begin(), d.end(), std::size_t{1}, std::multiplies<>());
  }

  std::size_t size() const noexcept { return data.size(); }
  std::size_t rank() const noexcept { return dims.size(); }
  std::size_t dim(std::size_t i) const { return dims.at(i); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  friend bool operator==(const TensorF&, const TensorF&) = default;
};

std::string format_dims(const std::vector<std::size_t>& dims);

}  // namespace posit
