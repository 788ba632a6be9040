#include "amnet/tensor.hpp"

namespace amnet {

std::string to_string(const Dims& d) {
  return std::to_string(d.n) + "x" + std::to_string(d.c) + "x" + std::to_string(d.h) + "x" +
         std::to_string(d.w);
}

ConvSpec ConvSpec::same(std::size_t k, std::size_t in, std::size_t out, std::size_t dilation) {
  ConvSpec s;
  s.kernel_h = s.kernel_w = k;
  s.in_channels = in;
  s.out_channels = out;
  s.dilation = dilation;
  const std::size_t pad = dilation * (k - 1) / 2;
  s.pad_top = s.pad_bottom = s.pad_left = s.pad_right = pad;
  return s;
}

namespace {
std::size_t conv_out(std::size_t in, std::size_t pad_a, std::size_t pad_b, std::size_t k,
                     std::size_t dilation, std::size_t stride) {
  const std::size_t extent = dilation * (k - 1) + 1;
  const std::size_t padded = in + pad_a + pad_b;
  if (padded < extent) return 0;
  return (padded - extent) / stride + 1;
}
}  // namespace

std::size_t ConvSpec::out_h(std::size_t in_h) const {
  return conv_out(in_h, pad_top, pad_bottom, kernel_h, dilation, stride);
}

std::size_t ConvSpec::out_w(std::size_t in_w) const {
  return conv_out(in_w, pad_left, pad_right, kernel_w, dilation, stride);
}

void ConvSpec::validate(std::size_t in_h, std::size_t in_w) const {
  if (kernel_h == 0 || kernel_w == 0 || stride == 0 || dilation == 0) {
    throw ShapeError("conv spec: kernel, stride and dilation must be positive");
  }
  if (out_h(in_h) == 0 || out_w(in_w) == 0) {
    throw ShapeError("conv spec: kernel extent exceeds padded input " + std::to_string(in_h) +
                     "x" + std::to_string(in_w));
  }
}

std::size_t PoolSpec::out_size(std::size_t in) const {
  if (in + 2 * padding < kernel) return 0;
  return (in + 2 * padding - kernel) / stride + 1;
}

}  // namespace amnet
