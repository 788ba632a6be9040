#pragma once

// Forward and backward tensor operations (no graph bookkeeping). The tape in
// autodiff.hpp composes these.

#include <cstdint>
#include <span>
#include <vector>

#include "amnet/tensor.hpp"

namespace amnet::ops {

/// Weight dims are (out_channels, in_channels, kernel_h, kernel_w); bias,
/// when non-null, holds out_channels values.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>* bias,
                 const ConvSpec& spec);
template <typename T>
Tensor<T> conv2d_grad_input(const Tensor<T>& grad_out, const Tensor<T>& weight,
                            const ConvSpec& spec, const Dims& input_dims);
template <typename T>
Tensor<T> conv2d_grad_weight(const Tensor<T>& grad_out, const Tensor<T>& input,
                             const ConvSpec& spec);
/// Sum of grad_out over n, h, w per channel; dims (1, C, 1, 1).
template <typename T>
Tensor<T> conv2d_grad_bias(const Tensor<T>& grad_out);

/// Window mean over in-bounds cells only.
template <typename T>
Tensor<T> avg_pool2d(const Tensor<T>& input, const PoolSpec& spec);
template <typename T>
Tensor<T> avg_pool2d_grad(const Tensor<T>& grad_out, const Dims& input_dims, const PoolSpec& spec);

/// Window max over in-bounds cells. Ties resolve to the first cell in
/// row-major window order. When `argmax` is given it receives, per output
/// element, the flat in-plane index of the winning input cell.
template <typename T>
Tensor<T> max_pool2d(const Tensor<T>& input, const PoolSpec& spec,
                     std::vector<std::uint32_t>* argmax = nullptr);
template <typename T>
Tensor<T> max_pool2d_grad(const Tensor<T>& grad_out, const Dims& input_dims,
                          std::span<const std::uint32_t> argmax);

template <typename T>
Tensor<T> relu(const Tensor<T>& t);
/// Logistic function, clamped so results stay strictly inside (0, 1) in T.
template <typename T>
Tensor<T> sigmoid(const Tensor<T>& t);
template <typename T>
Tensor<T> subtract(const Tensor<T>& a, const Tensor<T>& b);
/// Channel-wise concatenation; inputs must share n, h, w.
template <typename T>
Tensor<T> concat_depth(std::span<const Tensor<T>* const> parts);

/// Bilinear resampling with half-pixel centers (align_corners = false);
/// source coordinates are clamped to the valid range.
template <typename T>
Tensor<T> bilinear_resize(const Tensor<T>& input, std::size_t out_h, std::size_t out_w);
template <typename T>
Tensor<T> bilinear_resize_grad(const Tensor<T>& grad_out, const Dims& input_dims);

/// Valid (unpadded) cross-correlation of per-sample template features over
/// ROI features, summed over channels: (N,C,Hz,Wz) x (N,C,Hx,Wx) -> (N,1,Hz-Hx+1,Wz-Wx+1).
template <typename T>
Tensor<T> xcorr(const Tensor<T>& roi, const Tensor<T>& tmpl);
template <typename T>
Tensor<T> xcorr_grad_roi(const Tensor<T>& grad_out, const Tensor<T>& tmpl, const Dims& roi_dims);
template <typename T>
Tensor<T> xcorr_grad_tmpl(const Tensor<T>& grad_out, const Tensor<T>& roi, const Dims& tmpl_dims);

}  // namespace amnet::ops
