#pragma once

#include <vector>

#include "amnet/network.hpp"

namespace amnet::head {

inline constexpr const char* kFuse = "head.fuse";

/// Weight channel order of the fusion conv: 0 = appearance, 1 = motion.
inline constexpr std::size_t kAppearanceChannel = 0;
inline constexpr std::size_t kMotionChannel = 1;

std::vector<ParamSpec> param_layout();

/// Standardizes both maps, zero-pads O_A into O_M's pixel grid (correlation
/// offsets become template-center positions), stacks them, applies the 1x1
/// fusion conv and a sigmoid. Output values lie strictly in (0, 1).
template <typename T>
Var fuse(const NetContext<T>& ctx, Var o_a, Var o_m);
/// The same map before the sigmoid.
template <typename T>
Var fuse_logits(const NetContext<T>& ctx, Var o_a, Var o_m);

/// value(r, c) = exp(-((r - peak_r)^2 + (c - peak_c)^2) / (2 sigma^2)), as a
/// 1x1xHxW map. Throws std::invalid_argument when the peak lies outside the
/// map or sigma <= 0.
template <typename T>
Tensor<T> gaussian_gt(std::size_t h, std::size_t w, double peak_r, double peak_c, double sigma);

/// Gaussian width for a target of (w, h) ROI pixels.
double gt_sigma(const ModelConfig& cfg, double box_w, double box_h);

/// Mean over all elements of (o_am - gt)^2. Regularization lives in the
/// optimizer's weight decay.
template <typename T>
Var ridge_loss(Tape<T>& tape, Var o_am, Var gt);

}  // namespace amnet::head
