#pragma once

// 8-bit RGB frames and the square crop-and-resize used for templates and ROIs.

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "amnet/tensor.hpp"

namespace amnet {

/// Interleaved 8-bit RGB image, row-major.
struct Image {
  std::size_t width = 0, height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(std::size_t w, std::size_t h) : width(w), height(h), rgb(w * h * 3, 0) {}

  [[nodiscard]] bool empty() const { return width == 0 || height == 0; }
  [[nodiscard]] std::uint8_t& at(std::size_t x, std::size_t y, std::size_t c) {
    return rgb[(y * width + x) * 3 + c];
  }
  [[nodiscard]] std::uint8_t at(std::size_t x, std::size_t y, std::size_t c) const {
    return rgb[(y * width + x) * 3 + c];
  }
  bool operator==(const Image&) const = default;
};

/// Throws DataError when the file is missing or not a decodable image.
Image load_image(const std::filesystem::path& path);
/// Format follows the extension (png, jpg, ...). Throws DataError on failure.
void save_image(const Image& img, const std::filesystem::path& path);

/// Per-channel mean in [0, 1].
std::array<double, 3> channel_mean(const Image& img);

/// Crop geometry in image pixels; pixel (x, y) covers [x, x+1) x [y, y+1).
struct SquareCrop {
  double cx = 0, cy = 0;  ///< center
  double side = 0;
};

/// Samples the square crop into a 1x3xNxN tensor in [0, 1] with bilinear
/// interpolation (half-pixel centers). Area outside the frame reads as the
/// frame's per-channel mean. Throws std::invalid_argument if side <= 0.
Tensor<float> crop_resize(const Image& frame, const SquareCrop& crop, std::size_t out_size);
/// Same, with a precomputed channel mean.
Tensor<float> crop_resize(const Image& frame, const std::array<double, 3>& mean,
                          const SquareCrop& crop, std::size_t out_size);

/// Draws a 1-px rectangle outline (clipped to the frame).
void draw_rect(Image& img, double x, double y, double w, double h, std::array<std::uint8_t, 3> color);

}  // namespace amnet
