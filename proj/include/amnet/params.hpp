#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "amnet/tensor.hpp"

namespace amnet {

template <typename T>
struct ParamEntry {
  Tensor<T> value;
  Tensor<T> grad;
  Tensor<T> adam_m;
  Tensor<T> adam_v;
};

/// Named trainable tensors with gradients and Adam moments, ordered by name.
template <typename T>
class ParamStore {
 public:
  /// Adds a parameter; throws std::invalid_argument on a duplicate name.
  ParamEntry<T>& add(const std::string& name, Tensor<T> value);

  [[nodiscard]] bool contains(const std::string& name) const { return entries_.count(name) > 0; }
  ParamEntry<T>& entry(const std::string& name);
  const ParamEntry<T>& entry(const std::string& name) const;
  Tensor<T>& value(const std::string& name) { return entry(name).value; }
  const Tensor<T>& value(const std::string& name) const { return entry(name).value; }
  Tensor<T>& grad(const std::string& name) { return entry(name).grad; }
  const Tensor<T>& grad(const std::string& name) const { return entry(name).grad; }

  [[nodiscard]] std::vector<std::string> names() const;
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] std::size_t scalar_count() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();
  /// Number of Adam updates applied so far (drives bias correction).
  [[nodiscard]] std::uint64_t step_count() const { return steps_; }
  void set_step_count(std::uint64_t s) { steps_ = s; }

  /// Copy with values converted to U; gradients and moments reset.
  template <typename U>
  [[nodiscard]] ParamStore<U> cast() const {
    ParamStore<U> out;
    for (const auto& [name, e] : entries_) out.add(name, e.value.template cast<U>());
    return out;
  }

 private:
  std::map<std::string, ParamEntry<T>> entries_;
  std::uint64_t steps_ = 0;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// One bias-corrected Adam update. Weight decay is an L2 term added to the
/// raw gradient before the moment updates.
template <typename T>
void adam_step(ParamStore<T>& store, const AdamConfig& cfg);

/// Uniform Xavier/Glorot initialization for a conv weight of dims
/// (out, in, kh, kw): U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
template <typename T>
Tensor<T> xavier_init(const Dims& dims, std::uint64_t seed);

/// Xavier bound for the given conv weight dims.
double xavier_bound(const Dims& dims);

}  // namespace amnet
