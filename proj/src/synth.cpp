#include "amnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace amnet {

void SynthConfig::validate() const {
  if (frame_width < 64 || frame_height < 64) throw std::invalid_argument("frame_width: frame must be at least 64x64");
  if (target_size < 8) throw std::invalid_argument("target_size: must be at least 8");
  if (camera_jitter < 0) throw std::invalid_argument("camera_jitter: must be non-negative");
  const std::size_t margin = 2 * static_cast<std::size_t>(camera_jitter);
  if (target_size + margin > frame_width || target_size + margin > frame_height) {
    throw std::invalid_argument("target_size: target (" + std::to_string(target_size) +
                                " px) does not fit the frame");
  }
  if (num_frames == 0) throw std::invalid_argument("num_frames: must be positive");
  if (!(speed_min >= 0 && speed_max >= speed_min)) throw std::invalid_argument("speed_max: bad speed range");
  if (!(position_jitter >= 0)) throw std::invalid_argument("position_jitter: must be non-negative");
  if (occlusion_count > 0 && occlusion_length == 0) {
    throw std::invalid_argument("occlusion_length: must be positive");
  }
  if (occlusion_count * (occlusion_length + 1) + 1 > num_frames) {
    throw std::invalid_argument("occlusion_count: occlusion windows do not fit the sequence");
  }
}

namespace {

using Rng = std::mt19937_64;

/// Smooth value noise in [0, 1]: random lattice values, smoothstep blend.
class ValueNoise {
 public:
  ValueNoise(std::size_t w, std::size_t h, double cell, Rng& rng)
      : cell_(cell),
        gw_(static_cast<std::size_t>(std::ceil(static_cast<double>(w) / cell)) + 2),
        gh_(static_cast<std::size_t>(std::ceil(static_cast<double>(h) / cell)) + 2),
        grid_(gw_ * gh_) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& g : grid_) g = u(rng);
  }

  [[nodiscard]] double operator()(double x, double y) const {
    const double gx = x / cell_, gy = y / cell_;
    const auto ix = static_cast<std::size_t>(gx), iy = static_cast<std::size_t>(gy);
    const double fx = smooth(gx - static_cast<double>(ix)), fy = smooth(gy - static_cast<double>(iy));
    const double a = at(ix, iy), b = at(ix + 1, iy), c = at(ix, iy + 1), d = at(ix + 1, iy + 1);
    const double top = a + fx * (b - a), bot = c + fx * (d - c);
    return top + fy * (bot - top);
  }

 private:
  static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }
  [[nodiscard]] double at(std::size_t x, std::size_t y) const { return grid_[y * gw_ + x]; }

  double cell_;
  std::size_t gw_, gh_;
  std::vector<double> grid_;
};

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

Image render_background(std::size_t w, std::size_t h, Rng& rng) {
  Image img(w, h);
  for (std::size_t c = 0; c < 3; ++c) {
    const ValueNoise coarse(w, h, 24.0, rng), fine(w, h, 8.0, rng);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double px = static_cast<double>(x), py = static_cast<double>(y);
        const double v = 0.7 * coarse(px, py) + 0.3 * fine(px, py);
        img.at(x, y, c) = to_u8(50.0 + 150.0 * v);
      }
  }
  return img;
}

Image render_target(std::size_t size, Rng& rng) {
  Image img(size, size);
  std::uniform_real_distribution<double> tint(0.0, 1.0);
  for (std::size_t c = 0; c < 3; ++c) {
    const ValueNoise tex(size, size, 4.0, rng);
    const double base = tint(rng);
    for (std::size_t y = 0; y < size; ++y)
      for (std::size_t x = 0; x < size; ++x) {
        const double v = tex(static_cast<double>(x), static_cast<double>(y));
        img.at(x, y, c) = to_u8(255.0 * (0.6 * base + 0.4 * (v > 0.5 ? 1.0 : 0.0)));
      }
  }
  // Dark outline so the target edge is visible on any background.
  const std::size_t e = size - 1;
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t c = 0; c < 3; ++c) {
      img.at(i, 0, c) = img.at(i, e, c) = img.at(0, i, c) = img.at(e, i, c) = 10;
    }
  return img;
}

void reflect(double& p, double& v, double lo, double hi) {
  for (int i = 0; i < 4 && (p < lo || p > hi); ++i) {
    if (p < lo) p = 2 * lo - p;
    if (p > hi) p = 2 * hi - p;
    v = -v;
  }
  p = std::clamp(p, lo, hi);
}

}  // namespace

SynthSequence synth_sequence(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  const std::size_t j = static_cast<std::size_t>(cfg.camera_jitter);
  const std::size_t ww = cfg.frame_width + 2 * j, wh = cfg.frame_height + 2 * j;
  const Image world = render_background(ww, wh, rng);
  const Image target = render_target(cfg.target_size, rng);
  const std::size_t ts = cfg.target_size;

  // Target top-left in frame coordinates, kept far enough from the border
  // that camera shake never clips it.
  const double lo = static_cast<double>(j);
  const double hi_x = static_cast<double>(cfg.frame_width - ts - j);
  const double hi_y = static_cast<double>(cfg.frame_height - ts - j);
  double px, py;
  if (cfg.start) {
    px = std::clamp((*cfg.start)[0], lo, hi_x);
    py = std::clamp((*cfg.start)[1], lo, hi_y);
  } else {
    px = std::uniform_real_distribution<double>(lo, hi_x)(rng);
    py = std::uniform_real_distribution<double>(lo, hi_y)(rng);
  }
  double vx, vy;
  if (cfg.velocity) {
    vx = (*cfg.velocity)[0];
    vy = (*cfg.velocity)[1];
  } else {
    const double angle = std::uniform_real_distribution<double>(0.0, 2.0 * M_PI)(rng);
    const double speed = std::uniform_real_distribution<double>(cfg.speed_min, cfg.speed_max)(rng);
    vx = speed * std::cos(angle);
    vy = speed * std::sin(angle);
  }

  SynthSequence out;
  out.record.name = "synth_" + std::to_string(seed);
  out.occluded.assign(cfg.num_frames, false);
  for (std::size_t k = 0; k < cfg.occlusion_count; ++k) {
    // Non-overlapping windows, never on frame 0, separated by a visible frame.
    std::uniform_int_distribution<std::size_t> start(1, cfg.num_frames - cfg.occlusion_length);
    for (int attempt = 0;; ++attempt) {
      const std::size_t s = start(rng);
      const std::size_t e = s + cfg.occlusion_length;
      bool clear = true;
      for (std::size_t t = s - 1; t < std::min(e + 1, cfg.num_frames); ++t) clear = clear && !out.occluded[t];
      if (clear) {
        std::fill(out.occluded.begin() + static_cast<long>(s), out.occluded.begin() + static_cast<long>(e), true);
        break;
      }
      if (attempt > 1000) throw std::invalid_argument("synth: cannot place occlusion windows");
    }
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> shake(-cfg.camera_jitter, cfg.camera_jitter);
  for (std::size_t t = 0; t < cfg.num_frames; ++t) {
    if (t > 0) {
      px += vx;
      py += vy;
      if (cfg.position_jitter > 0) {
        px += cfg.position_jitter * noise(rng);
        py += cfg.position_jitter * noise(rng);
      }
      reflect(px, vx, lo, hi_x);
      reflect(py, vy, lo, hi_y);
    }
    int dx = 0, dy = 0;
    if (cfg.camera_jitter > 0) {
      dx = shake(rng);
      dy = shake(rng);
    }
    const long tx = std::lround(px), ty = std::lround(py);

    // frame(x, y) = world(x - dx + J, y - dy + J); the target sits at (tx, ty)
    // before the shift.
    Image frame(cfg.frame_width, cfg.frame_height);
    for (std::size_t y = 0; y < cfg.frame_height; ++y) {
      const auto wy = static_cast<std::size_t>(static_cast<long>(y + j) - dy);
      const std::uint8_t* src = &world.rgb[(wy * ww + static_cast<std::size_t>(static_cast<long>(j) - dx)) * 3];
      std::copy(src, src + cfg.frame_width * 3, frame.rgb.begin() + static_cast<long>(y * cfg.frame_width * 3));
    }
    if (!out.occluded[t]) {
      for (std::size_t y = 0; y < ts; ++y) {
        const auto fy = static_cast<std::size_t>(ty + dy + static_cast<long>(y));
        const auto fx = static_cast<std::size_t>(tx + dx);
        std::copy(&target.rgb[y * ts * 3], &target.rgb[(y + 1) * ts * 3],
                  frame.rgb.begin() + static_cast<long>((fy * cfg.frame_width + fx) * 3));
      }
    }
    out.record.frames.push_back(std::move(frame));
    out.record.gt.push_back({static_cast<double>(tx + dx), static_cast<double>(ty + dy),
                             static_cast<double>(ts), static_cast<double>(ts)});
    out.camera_shift.push_back({dx, dy});
  }
  return out;
}

}  // namespace amnet
