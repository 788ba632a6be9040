#include "amnet/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "amnet/errors.hpp"

namespace amnet {

Image load_image(const std::filesystem::path& path) {
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw DataError("cannot read image " + path.string());
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  Image img(static_cast<std::size_t>(rgb.cols), static_cast<std::size_t>(rgb.rows));
  for (int y = 0; y < rgb.rows; ++y) {
    const auto* row = rgb.ptr<std::uint8_t>(y);
    std::copy(row, row + rgb.cols * 3, img.rgb.begin() + static_cast<long>(y) * rgb.cols * 3);
  }
  return img;
}

void save_image(const Image& img, const std::filesystem::path& path) {
  if (img.empty()) throw DataError("refusing to write empty image " + path.string());
  // cv::Mat needs a mutable pointer; the data is only read.
  cv::Mat rgb(static_cast<int>(img.height), static_cast<int>(img.width), CV_8UC3,
              const_cast<std::uint8_t*>(img.rgb.data()));
  cv::Mat bgr;
  cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception& e) {
    throw DataError("cannot write image " + path.string() + ": " + e.what());
  }
  if (!ok) throw DataError("cannot write image " + path.string());
}

std::array<double, 3> channel_mean(const Image& img) {
  std::array<double, 3> sum{};
  const std::size_t n = img.width * img.height;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < 3; ++c) sum[c] += img.rgb[i * 3 + c];
  for (auto& s : sum) s = n ? s / (255.0 * static_cast<double>(n)) : 0.0;
  return sum;
}

Tensor<float> crop_resize(const Image& frame, const SquareCrop& crop, std::size_t out_size) {
  return crop_resize(frame, channel_mean(frame), crop, out_size);
}

Tensor<float> crop_resize(const Image& frame, const std::array<double, 3>& mean,
                          const SquareCrop& crop, std::size_t out_size) {
  if (!(crop.side > 0.0) || !std::isfinite(crop.side)) {
    throw std::invalid_argument("crop_resize: side must be positive, got " + std::to_string(crop.side));
  }
  if (out_size == 0) throw std::invalid_argument("crop_resize: out_size must be positive");
  const double s = crop.side / static_cast<double>(out_size);
  const double left = crop.cx - crop.side / 2.0;
  const double top = crop.cy - crop.side / 2.0;
  const long w = static_cast<long>(frame.width), h = static_cast<long>(frame.height);

  // Source tap pair and weight per output column / row; pixel centers sit at
  // integer + 0.5 in edge coordinates.
  struct Tap {
    long i0, i1;
    double f;
  };
  auto taps = [&](double origin) {
    std::vector<Tap> t(out_size);
    for (std::size_t q = 0; q < out_size; ++q) {
      const double src = origin + (static_cast<double>(q) + 0.5) * s - 0.5;
      const double fl = std::floor(src);
      t[q] = {static_cast<long>(fl), static_cast<long>(fl) + 1, src - fl};
    }
    return t;
  };
  const auto tx = taps(left), ty = taps(top);

  Tensor<float> out(1, 3, out_size, out_size);
  for (std::size_t c = 0; c < 3; ++c) {
    auto px = [&](long x, long y) {
      if (x < 0 || y < 0 || x >= w || y >= h) return mean[c];
      return frame.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c) / 255.0;
    };
    float* plane = out.plane(0, c);
    for (std::size_t r = 0; r < out_size; ++r) {
      const Tap& a = ty[r];
      for (std::size_t q = 0; q < out_size; ++q) {
        const Tap& b = tx[q];
        const double v00 = px(b.i0, a.i0), v01 = px(b.i1, a.i0);
        const double v10 = px(b.i0, a.i1), v11 = px(b.i1, a.i1);
        const double top_row = v00 + b.f * (v01 - v00);
        const double bot_row = v10 + b.f * (v11 - v10);
        plane[r * out_size + q] = static_cast<float>(top_row + a.f * (bot_row - top_row));
      }
    }
  }
  return out;
}

void draw_rect(Image& img, double x, double y, double w, double h, std::array<std::uint8_t, 3> color) {
  if (img.empty()) return;
  const long x0 = std::lround(x), y0 = std::lround(y);
  const long x1 = std::lround(x + w) - 1, y1 = std::lround(y + h) - 1;
  const long iw = static_cast<long>(img.width), ih = static_cast<long>(img.height);
  auto put = [&](long px, long py) {
    if (px < 0 || py < 0 || px >= iw || py >= ih) return;
    for (std::size_t c = 0; c < 3; ++c) img.at(static_cast<std::size_t>(px), static_cast<std::size_t>(py), c) = color[c];
  };
  for (long px = x0; px <= x1; ++px) {
    put(px, y0);
    put(px, y1);
  }
  for (long py = y0; py <= y1; ++py) {
    put(x0, py);
    put(x1, py);
  }
}

}  // namespace amnet
