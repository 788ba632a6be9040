#pragma once

// Motion stream: learned contrast maps of two consecutive ROIs, patch-wise
// weighted differencing ("spotlight" filtering) at several window sizes, and
// max-pool minus avg-pool cascades that keep dominant foreground motion.

#include <vector>

#include "amnet/network.hpp"

namespace amnet::mnet {

std::vector<ParamSpec> param_layout(const ModelConfig& cfg);

/// Cascade of size-preserving 3->3 convs with ReLU; output dims equal input dims.
template <typename T>
Var contrast(const NetContext<T>& ctx, const ModelConfig& cfg, Var patch);

/// D = zc_t - zc_prev, one bias-free k x k conv (3->1) per window size,
/// depth stack, 1x1 fusion conv with bias.
template <typename T>
Var spotlight(const NetContext<T>& ctx, const ModelConfig& cfg, Var zc_t, Var zc_prev);

/// Max-pool cascade minus avg-pool cascade (stride 2, half padding each),
/// bilinearly resized back to the input size.
template <typename T>
Var bsfe(Tape<T>& tape, const ModelConfig& cfg, Var o_sf);

/// Downsampling factor of the pooling cascades before the resize.
std::size_t bsfe_downsample(const ModelConfig& cfg);

template <typename T>
Var forward(const NetContext<T>& ctx, const ModelConfig& cfg, Var roi_t, Var roi_prev);

/// Luminance (Rec. 601 weights) replicated to the three channels.
template <typename T>
Tensor<T> to_luminance(const Tensor<T>& rgb);

}  // namespace amnet::mnet
