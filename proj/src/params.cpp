#include "amnet/params.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace amnet {

template <typename T>
ParamEntry<T>& ParamStore<T>::add(const std::string& name, Tensor<T> value) {
  if (entries_.count(name)) throw std::invalid_argument("duplicate parameter name: " + name);
  const Dims d = value.dims();
  ParamEntry<T> e{std::move(value), Tensor<T>(d), Tensor<T>(d), Tensor<T>(d)};
  return entries_.emplace(name, std::move(e)).first->second;
}

template <typename T>
ParamEntry<T>& ParamStore<T>::entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

template <typename T>
const ParamEntry<T>& ParamStore<T>::entry(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

template <typename T>
std::vector<std::string> ParamStore<T>::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

template <typename T>
std::size_t ParamStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, e] : entries_) n += e.value.size();
  return n;
}

template <typename T>
void ParamStore<T>::zero_grad() {
  for (auto& [name, e] : entries_) e.grad.fill(T(0));
}

template <typename T>
void adam_step(ParamStore<T>& store, const AdamConfig& cfg) {
  const std::uint64_t t = store.step_count() + 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (auto& [name, e] : store) {
    for (std::size_t i = 0; i < e.value.size(); ++i) {
      const double w = e.value[i];
      const double g = static_cast<double>(e.grad[i]) + cfg.weight_decay * w;
      const double m = cfg.beta1 * static_cast<double>(e.adam_m[i]) + (1.0 - cfg.beta1) * g;
      const double v = cfg.beta2 * static_cast<double>(e.adam_v[i]) + (1.0 - cfg.beta2) * g * g;
      e.adam_m[i] = static_cast<T>(m);
      e.adam_v[i] = static_cast<T>(v);
      e.value[i] = static_cast<T>(w - cfg.lr * (m / c1) / (std::sqrt(v / c2) + cfg.eps));
    }
  }
  store.set_step_count(t);
}

double xavier_bound(const Dims& dims) {
  const double receptive = static_cast<double>(dims.h * dims.w);
  const double fan_in = static_cast<double>(dims.c) * receptive;
  const double fan_out = static_cast<double>(dims.n) * receptive;
  return std::sqrt(6.0 / (fan_in + fan_out));
}

template <typename T>
Tensor<T> xavier_init(const Dims& dims, std::uint64_t seed) {
  const double a = xavier_bound(dims);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-a, a);
  // Rounding to T must not leave [-a, a].
  T bound = static_cast<T>(a);
  if (static_cast<double>(bound) > a) bound = std::nextafter(bound, T(0));
  Tensor<T> out(dims);
  for (auto& v : out.data()) v = std::clamp(static_cast<T>(dist(rng)), -bound, bound);
  return out;
}

template class ParamStore<float>;
template class ParamStore<double>;
template void adam_step(ParamStore<float>&, const AdamConfig&);
template void adam_step(ParamStore<double>&, const AdamConfig&);
template Tensor<float> xavier_init(const Dims&, std::uint64_t);
template Tensor<double> xavier_init(const Dims&, std::uint64_t);

}  // namespace amnet
