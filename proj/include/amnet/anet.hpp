#pragma once

// Appearance stream: a Siamese atrous CNN embeds template and ROI with shared
// weights, lateral concatenations form three feature levels, each level is
// cross-correlated, and a 1x1 conv fuses the level score maps into O_A.

#include <array>
#include <string_view>
#include <vector>

#include "amnet/network.hpp"

namespace amnet::anet {

struct LayerDef {
  std::string_view name;
  std::size_t kernel;
  std::size_t in_channels;
  std::size_t out_channels;
  std::size_t dilation;
};

/// Six size-preserving conv layers, each followed by ReLU.
inline constexpr std::array<LayerDef, 6> kLayers{{
    {"anet.conv1", 5, 3, 6, 1},
    {"anet.conv2", 3, 6, 12, 2},
    {"anet.conv3", 3, 12, 24, 3},
    {"anet.conv4", 5, 24, 36, 1},
    {"anet.conv5", 3, 36, 48, 2},
    {"anet.conv6", 3, 48, 64, 3},
}};

/// Lateral pairs (0-based layer indices) concatenated into the three levels.
inline constexpr std::array<std::array<std::size_t, 2>, 3> kLevels{{{0, 3}, {1, 4}, {2, 5}}};
inline constexpr std::array<std::size_t, 3> kLevelChannels{42, 60, 88};

inline constexpr std::string_view kFuse = "anet.fuse";

ConvSpec layer_spec(const LayerDef& layer);

/// Parameter names and dims of the appearance stream.
std::vector<ParamSpec> param_layout();

struct FeaturePyramid {
  std::array<Var, 3> levels;
};

/// Embeds a 1x3xHxW patch (H, W >= 16) into the three lateral levels; spatial
/// size is preserved.
template <typename T>
FeaturePyramid embed(const NetContext<T>& ctx, Var patch);

/// Level score maps before fusion: ROI features correlated with per-channel
/// standardized template features, then each map standardized over its plane.
template <typename T>
std::array<Var, 3> level_scores(const NetContext<T>& ctx, const FeaturePyramid& roi,
                                const FeaturePyramid& tmpl);

/// O_A of size (H_roi - H_tmpl + 1) x (W_roi - W_tmpl + 1).
template <typename T>
Var forward(const NetContext<T>& ctx, Var roi, Var tmpl);

}  // namespace amnet::anet
