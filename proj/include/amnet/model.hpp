#pragma once

#include <cstdint>
#include <vector>

#include "amnet/network.hpp"

namespace amnet {

/// Every parameter of the two streams and the fusion head, in name order.
std::vector<ParamSpec> param_layout(const ModelConfig& cfg);

/// Xavier-initialized weights and zero biases; deterministic per seed.
template <typename T>
ParamStore<T> init_params(const ModelConfig& cfg, std::uint64_t seed);

/// Throws std::invalid_argument describing the first missing, extra or
/// mis-shaped parameter.
template <typename T>
void check_layout(const ParamStore<T>& store, const ModelConfig& cfg);

struct ForwardVars {
  Var o_a;     ///< appearance response (native correlation size)
  Var o_m;     ///< motion response (ROI size)
  Var logits;  ///< fused response before the sigmoid (ROI size)
  Var o_am;    ///< sigmoid(logits)
};

/// One full forward pass on 1x3 patches: ROI at t, ROI at t-1, template.
template <typename T>
ForwardVars amnet_forward(const NetContext<T>& ctx, const ModelConfig& cfg, Var roi_t,
                          Var roi_prev, Var tmpl);

/// Zeroes the motion input of the fusion conv (appearance-only ablation).
template <typename T>
void ablate_motion(ParamStore<T>& store);

}  // namespace amnet
