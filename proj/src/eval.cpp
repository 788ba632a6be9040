#include "amnet/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/os.h>
#include <nlohmann/json.hpp>

#include "amnet/errors.hpp"

namespace fs = std::filesystem;

namespace amnet {
namespace {

/// Splits on commas, tabs and spaces; empty fields are dropped.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ',' || line[i] == '\t' || line[i] == ' ' || line[i] == '\r')) ++i;
    const std::size_t j = i;
    while (i < line.size() && line[i] != ',' && line[i] != '\t' && line[i] != ' ' && line[i] != '\r') ++i;
    if (i > j) out.push_back(line.substr(j, i - j));
  }
  return out;
}

bool parse_double(std::string_view s, double& v) {
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(v);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  return f;
}

bool is_image(const fs::path& p) {
  static const std::set<std::string> exts{".jpg", ".jpeg", ".png", ".bmp"};
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return exts.count(e) > 0;
}

}  // namespace

SequenceRecord load_otb_sequence(const fs::path& dir) {
  SequenceRecord seq;
  seq.name = dir.filename().string();
  if (seq.name.empty()) seq.name = dir.parent_path().filename().string();
  const fs::path img = dir / "img";
  const fs::path gt = dir / "groundtruth_rect.txt";
  std::error_code ec;
  if (!fs::is_directory(img, ec)) throw DataError(seq.name + ": missing directory " + img.string());
  for (const auto& e : fs::directory_iterator(img)) {
    if (e.is_regular_file() && is_image(e.path())) seq.frame_paths.push_back(e.path());
  }
  std::sort(seq.frame_paths.begin(), seq.frame_paths.end());

  std::ifstream f(gt);
  if (!f) throw DataError(seq.name + ": cannot read " + gt.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != 4) {
      throw DataError(fmt::format("{}: line {}: expected 4 values, found {}", gt.string(), lineno, fields.size()));
    }
    double v[4];
    for (std::size_t i = 0; i < 4; ++i) {
      if (!parse_double(fields[i], v[i])) {
        throw DataError(fmt::format("{}: line {}: cannot parse '{}'", gt.string(), lineno, fields[i]));
      }
    }
    const BBox b{v[0], v[1], v[2], v[3]};
    if (!b.valid()) throw DataError(fmt::format("{}: line {}: box needs positive size", gt.string(), lineno));
    seq.gt.push_back(b);
  }
  if (seq.gt.size() != seq.frame_paths.size()) {
    throw DataError(fmt::format("{}: {} frames in {} but {} boxes in {} (line {})", seq.name,
                                seq.frame_paths.size(), img.string(), seq.gt.size(), gt.string(), lineno));
  }
  if (seq.gt.empty()) throw DataError(seq.name + ": empty sequence");
  return seq;
}

std::vector<SequenceRecord> load_otb_dataset(const fs::path& root, const std::vector<std::string>& names) {
  std::vector<fs::path> dirs;
  if (!names.empty()) {
    for (const auto& n : names) dirs.push_back(root / n);
  } else {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw DataError("dataset root " + root.string() + " is not a directory");
    for (const auto& e : fs::directory_iterator(root)) {
      if (e.is_directory() && fs::exists(e.path() / "groundtruth_rect.txt")) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
  }
  if (dirs.empty()) throw DataError("no sequences under " + root.string());
  std::vector<SequenceRecord> out;
  for (const auto& d : dirs) out.push_back(load_otb_sequence(d));
  return out;
}

void write_otb_sequence(const SequenceRecord& seq, const fs::path& dir) {
  seq.validate();
  fs::create_directories(dir / "img");
  auto gt = open_out(dir / "groundtruth_rect.txt");
  for (std::size_t i = 0; i < seq.size(); ++i) {
    save_image(seq.frame(i), dir / "img" / fmt::format("{:04d}.png", i + 1));
    const BBox& b = seq.gt[i];
    gt << fmt::format("{},{},{},{}\n", b.x, b.y, b.w, b.h);
  }
}

double iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0 ? inter / uni : 0.0;
}

double center_error(const BBox& a, const BBox& b) {
  return std::hypot(a.cx() - b.cx(), a.cy() - b.cy());
}

double precision_threshold(std::size_t i) { return static_cast<double>(i); }
double success_threshold(std::size_t i) { return static_cast<double>(i) / 50.0; }

EvalReport make_report(std::vector<double> center_errors, std::vector<double> ious, double fps) {
  if (center_errors.size() != ious.size()) throw std::invalid_argument("make_report: length mismatch");
  EvalReport r;
  r.center_errors = std::move(center_errors);
  r.ious = std::move(ious);
  r.fps = fps;
  const double n = static_cast<double>(r.ious.size());
  r.precision.resize(kCurvePoints);
  r.success.resize(kCurvePoints);
  for (std::size_t i = 0; i < kCurvePoints; ++i) {
    const double tp = precision_threshold(i), ts = success_threshold(i);
    const auto p = std::count_if(r.center_errors.begin(), r.center_errors.end(), [&](double e) { return e <= tp; });
    const auto s = std::count_if(r.ious.begin(), r.ious.end(), [&](double o) { return o > ts; });
    r.precision[i] = n > 0 ? static_cast<double>(p) / n : 0.0;
    r.success[i] = n > 0 ? static_cast<double>(s) / n : 0.0;
  }
  r.precision_at_20 = r.precision[20];
  double sum = 0;
  for (double v : r.success) sum += v;
  r.success_auc = sum / static_cast<double>(kCurvePoints);
  return r;
}

OpeResult ope_evaluate(const SequenceTracker& tracker, std::span<const SequenceRecord> sequences) {
  if (sequences.empty()) throw std::invalid_argument("ope_evaluate: no sequences");
  OpeResult out;
  std::vector<double> all_err, all_iou;
  double frames = 0, seconds = 0;
  for (const auto& seq : sequences) {
    seq.validate();
    TrackResult tr = tracker(seq);
    if (tr.boxes.size() != seq.size()) {
      throw std::runtime_error(seq.name + ": tracker returned " + std::to_string(tr.boxes.size()) +
                               " boxes for " + std::to_string(seq.size()) + " frames");
    }
    std::vector<double> err, ov;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      err.push_back(center_error(tr.boxes[i], seq.gt[i]));
      ov.push_back(iou(tr.boxes[i], seq.gt[i]));
    }
    all_err.insert(all_err.end(), err.begin(), err.end());
    all_iou.insert(all_iou.end(), ov.begin(), ov.end());
    if (tr.fps > 0) {
      frames += static_cast<double>(seq.size() - 1);
      seconds += static_cast<double>(seq.size() - 1) / tr.fps;
    }
    out.sequences.push_back({seq.name, std::move(tr.boxes), make_report(std::move(err), std::move(ov), tr.fps)});
  }
  out.aggregate = make_report(std::move(all_err), std::move(all_iou), seconds > 0 ? frames / seconds : 0.0);
  return out;
}

SequenceTracker network_tracker(ResponseNetwork& net) {
  return [&net](const SequenceRecord& seq) {
    return track_sequence(net, seq.size(), [&seq](std::size_t i) { return seq.frame(i); }, seq.gt.at(0));
  };
}

TrackResult oracle_track(const SequenceRecord& seq) {
  TrackResult r;
  r.boxes = seq.gt;
  return r;
}

void write_curves_csv(const EvalReport& report, const fs::path& path) {
  auto f = open_out(path);
  f << "curve,threshold,value\n";
  for (std::size_t i = 0; i < report.precision.size(); ++i) {
    f << fmt::format("precision,{},{}\n", precision_threshold(i), report.precision[i]);
  }
  for (std::size_t i = 0; i < report.success.size(); ++i) {
    f << fmt::format("success,{},{}\n", success_threshold(i), report.success[i]);
  }
}

Curves read_curves_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot read " + path.string());
  Curves c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    const auto fields = split_fields(line);
    double th = 0, v = 0;
    if (fields.size() != 3 || !parse_double(fields[1], th) || !parse_double(fields[2], v)) {
      throw DataError(fmt::format("{}: line {}: malformed row", path.string(), lineno));
    }
    if (fields[0] == "precision") {
      c.precision.push_back(v);
    } else if (fields[0] == "success") {
      c.success.push_back(v);
    } else {
      throw DataError(fmt::format("{}: line {}: unknown curve '{}'", path.string(), lineno, fields[0]));
    }
  }
  return c;
}

void write_summary_json(const EvalReport& report, const fs::path& path) {
  const nlohmann::ordered_json j{{"precision_at_20", report.precision_at_20},
                                 {"success_auc", report.success_auc},
                                 {"fps", report.fps}};
  auto f = open_out(path);
  f << j.dump(2) << "\n";
}

void write_sequence_table(const OpeResult& result, const fs::path& path) {
  auto f = open_out(path);
  f << "sequence,frames,precision_at_20,success_auc,fps\n";
  for (const auto& s : result.sequences) {
    f << fmt::format("{},{},{},{},{}\n", s.name, s.report.ious.size(), s.report.precision_at_20,
                     s.report.success_auc, s.report.fps);
  }
}

void write_boxes_csv(const std::vector<BBox>& boxes, const fs::path& path) {
  auto f = open_out(path);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const BBox& b = boxes[i];
    f << fmt::format("{},{},{},{},{}\n", i, b.x, b.y, b.w, b.h);
  }
}

}  // namespace amnet
