#pragma once

// Tape-based reverse-mode differentiation over the fixed op vocabulary the
// networks use. Nodes are appended in execution order, so reverse order is a
// valid topological order for backward.

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "amnet/params.hpp"
#include "amnet/tensor.hpp"

namespace amnet {

/// Handle to a node on a Tape.
struct Var {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t id = kNone;
  [[nodiscard]] bool valid() const { return id != kNone; }
};

template <typename T>
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor<T>& grad_out)>;

  /// With `record_grad` false no backward closures are kept (inference).
  explicit Tape(bool record_grad = true) : record_grad_(record_grad) {}

  Var constant(Tensor<T> value);
  /// Binds a parameter. Repeated binds of the same name return the same
  /// node, so every use shares one storage and one gradient.
  Var param(ParamStore<T>& store, const std::string& name);
  /// Read-only bind: the value participates but receives no gradient.
  Var param(const ParamStore<T>& store, const std::string& name);

  [[nodiscard]] const Tensor<T>& value(Var v) const { return node(v).value; }
  /// Gradient accumulated at `v` by backward(); empty when none reached it.
  [[nodiscard]] const Tensor<T>& grad(Var v) const { return node(v).grad; }
  [[nodiscard]] bool requires_grad(Var v) const { return node(v).requires_grad; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }
  [[nodiscard]] bool recording() const { return record_grad_; }

  /// Reverse sweep from a single-element loss. When `accumulate_params` is
  /// set, parameter gradients are added into the bound ParamStore entries.
  void backward(Var loss, bool accumulate_params = true);
  /// Adds parameter gradients from the last backward() into the store.
  void accumulate_param_grads() const;

  /// Records a node. `fn` runs during backward with the node's gradient.
  Var record(Tensor<T> value, std::span<const Var> inputs, BackwardFn fn);
  /// Adds `g` into the gradient of `v` (no-op when `v` needs no gradient).
  void add_grad(Var v, const Tensor<T>& g);

  /// When enabled, relu masks and max-pool winners are hashed into a
  /// signature so callers can detect evaluations that crossed a kink.
  void set_track_kinks(bool on) { track_kinks_ = on; }
  [[nodiscard]] bool track_kinks() const { return track_kinks_; }
  void mix_kink(std::uint64_t h);
  [[nodiscard]] std::uint64_t kink_signature() const { return kink_hash_; }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    BackwardFn backward;
    ParamEntry<T>* param = nullptr;
  };

  const Node& node(Var v) const;
  Node& node(Var v);

  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::size_t> bound_params_;
  bool record_grad_ = true;
  bool backward_done_ = false;
  bool track_kinks_ = false;
  std::uint64_t kink_hash_ = 1469598103934665603ULL;
};

/// Differentiable ops. Each returns a new node on the tape.
namespace ad {

template <typename T>
Var conv2d(Tape<T>& tape, Var input, Var weight, Var bias, const ConvSpec& spec);
template <typename T>
Var relu(Tape<T>& tape, Var x);
template <typename T>
Var sigmoid(Tape<T>& tape, Var x);
template <typename T>
Var avg_pool2d(Tape<T>& tape, Var x, const PoolSpec& spec);
template <typename T>
Var max_pool2d(Tape<T>& tape, Var x, const PoolSpec& spec);
template <typename T>
Var concat_depth(Tape<T>& tape, std::span<const Var> parts);
template <typename T>
Var subtract(Tape<T>& tape, Var a, Var b);
template <typename T>
Var add(Tape<T>& tape, Var a, Var b);
template <typename T>
Var scale(Tape<T>& tape, Var x, double factor);
template <typename T>
Var bilinear_resize(Tape<T>& tape, Var x, std::size_t out_h, std::size_t out_w);
template <typename T>
Var xcorr(Tape<T>& tape, Var roi, Var tmpl);
/// Zero padding around each plane.
template <typename T>
Var pad2d(Tape<T>& tape, Var x, std::size_t top, std::size_t bottom, std::size_t left, std::size_t right);
/// Subtracts each H x W plane's maximum (first one on ties), so every plane
/// peaks at exactly 0.
template <typename T>
Var subtract_max(Tape<T>& tape, Var x);
/// Zero mean, unit variance over each H x W plane: (x - mean) / sqrt(var + eps).
template <typename T>
Var standardize(Tape<T>& tape, Var x, double eps = 1e-6);
/// Sum of all elements as a 1x1x1x1 tensor.
template <typename T>
Var sum(Tape<T>& tape, Var x);
/// Mean of squared differences as a 1x1x1x1 tensor.
template <typename T>
Var mean_squared_error(Tape<T>& tape, Var prediction, Var target);

}  // namespace ad
}  // namespace amnet
