#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace amnet {

/// Raised when operand dimensions are incompatible.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised on API misuse (e.g. backward without a recorded graph).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Dims {
  std::size_t n = 0, c = 0, h = 0, w = 0;

  [[nodiscard]] std::size_t count() const { return n * c * h * w; }
  [[nodiscard]] std::size_t plane() const { return h * w; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

std::string to_string(const Dims& d);

/// Dense NCHW tensor, row-major with w innermost.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Dims dims, T fill = T(0)) : dims_(dims), data_(dims.count(), fill) {}
  Tensor(std::size_t n, std::size_t c, std::size_t h, std::size_t w, T fill = T(0))
      : Tensor(Dims{n, c, h, w}, fill) {}
  Tensor(Dims dims, std::vector<T> data) : dims_(dims), data_(std::move(data)) {
    if (data_.size() != dims_.count()) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match dims " + to_string(dims_));
    }
  }

  [[nodiscard]] const Dims& dims() const { return dims_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] std::span<T> data() { return data_; }
  [[nodiscard]] std::span<const T> data() const { return data_; }
  [[nodiscard]] T* raw() { return data_.data(); }
  [[nodiscard]] const T* raw() const { return data_.data(); }

  [[nodiscard]] std::size_t offset(std::size_t n, std::size_t c, std::size_t y,
                                   std::size_t x) const {
    return ((n * dims_.c + c) * dims_.h + y) * dims_.w + x;
  }
  T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
    return data_[offset(n, c, y, x)];
  }
  const T& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return data_[offset(n, c, y, x)];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  /// Pointer to the start of plane (n, c).
  T* plane(std::size_t n, std::size_t c) { return data_.data() + offset(n, c, 0, 0); }
  const T* plane(std::size_t n, std::size_t c) const {
    return data_.data() + offset(n, c, 0, 0);
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  [[nodiscard]] Tensor<U> cast() const {
    Tensor<U> out(dims_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Dims dims_{};
  std::vector<T> data_;
};

/// Convolution geometry. Padding is explicit per side.
struct ConvSpec {
  std::size_t kernel_h = 1, kernel_w = 1;
  std::size_t in_channels = 1, out_channels = 1;
  std::size_t stride = 1;
  std::size_t dilation = 1;
  std::size_t pad_top = 0, pad_bottom = 0, pad_left = 0, pad_right = 0;

  /// Square kernel with padding that preserves spatial size at stride 1.
  static ConvSpec same(std::size_t k, std::size_t in, std::size_t out, std::size_t dilation = 1);

  [[nodiscard]] std::size_t out_h(std::size_t in_h) const;
  [[nodiscard]] std::size_t out_w(std::size_t in_w) const;
  /// Throws ShapeError when the geometry is invalid for the given input size.
  void validate(std::size_t in_h, std::size_t in_w) const;
};

/// Pooling geometry (square window, symmetric padding).
struct PoolSpec {
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;

  [[nodiscard]] std::size_t out_size(std::size_t in) const;
};

}  // namespace amnet
