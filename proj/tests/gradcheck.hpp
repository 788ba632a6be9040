#pragma once

// Central finite differences against tape gradients, in f64. Coordinates
// whose +/- eps evaluations change a relu mask or max-pool winner (tracked by
// the tape's kink signature) are skipped: the function is not differentiable
// across them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>

#include "amnet/autodiff.hpp"

namespace gradcheck {

using Build = std::function<amnet::Var(amnet::Tape<double>&, amnet::ParamStore<double>&)>;

struct Result {
  double worst = 0;
  std::string worst_at;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::size_t params_covered = 0;  // parameters with at least one checked coordinate
};

inline double rel_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Checks up to `per_param` random coordinates of every parameter (all of
/// them when the tensor is smaller).
inline Result check(amnet::ParamStore<double>& store, const Build& build, std::size_t per_param,
                    std::uint64_t seed, double eps = 1e-5, double floor = 1e-4) {
  using amnet::Tape;
  store.zero_grad();
  std::uint64_t base_sig = 0;
  {
    Tape<double> tape;
    tape.set_track_kinks(true);
    const amnet::Var loss = build(tape, store);
    base_sig = tape.kink_signature();
    tape.backward(loss);
  }
  auto eval = [&](std::uint64_t& sig) {
    Tape<double> tape(false);
    tape.set_track_kinks(true);
    const amnet::Var loss = build(tape, store);
    sig = tape.kink_signature();
    return tape.value(loss)[0];
  };

  Result r;
  std::mt19937_64 rng(seed);
  for (auto& [name, e] : store) {
    const std::size_t n = e.value.size();
    std::vector<std::size_t> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    std::shuffle(coords.begin(), coords.end(), rng);
    std::size_t done = 0;
    for (std::size_t i : coords) {
      if (done == per_param) break;
      const double w = e.value[i];
      std::uint64_t sp = 0, sm = 0;
      e.value[i] = w + eps;
      const double lp = eval(sp);
      e.value[i] = w - eps;
      const double lm = eval(sm);
      e.value[i] = w;
      if (sp != base_sig || sm != base_sig) {
        ++r.skipped;
        continue;
      }
      const double fd = (lp - lm) / (2 * eps);
      const double err = rel_error(fd, e.grad[i], floor);
      if (err > r.worst) {
        r.worst = err;
        std::ostringstream os;
        os << std::setprecision(10) << name << "[" << i << "] fd=" << fd << " analytic=" << e.grad[i];
        r.worst_at = os.str();
      }
      ++r.checked;
      ++done;
    }
    if (done > 0) ++r.params_covered;
  }
  return r;
}

}  // namespace gradcheck
