#pragma once

// One-pass evaluation over OTB-layout sequences: loading, per-frame overlap
// and center error, precision/success curves and their summaries.

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "amnet/bbox.hpp"
#include "amnet/sequence.hpp"
#include "amnet/tracker.hpp"

namespace amnet {

/// Reads `dir/img/*` (sorted by file name) and `dir/groundtruth_rect.txt`
/// (one "x,y,w,h" per line; comma, tab or space separated). Boxes are taken
/// verbatim. Throws DataError citing the line on malformed input.
SequenceRecord load_otb_sequence(const std::filesystem::path& dir);
/// Every subdirectory of `root` holding a groundtruth_rect.txt, by name;
/// or just `names` when given.
std::vector<SequenceRecord> load_otb_dataset(const std::filesystem::path& root,
                                             const std::vector<std::string>& names = {});
/// Writes frames as img/0001.png ... plus groundtruth_rect.txt.
void write_otb_sequence(const SequenceRecord& seq, const std::filesystem::path& dir);

double iou(const BBox& a, const BBox& b);
double center_error(const BBox& a, const BBox& b);

inline constexpr std::size_t kCurvePoints = 51;
/// Precision threshold i is i px; success threshold i is i / 50.
double precision_threshold(std::size_t i);
double success_threshold(std::size_t i);

struct EvalReport {
  std::vector<double> center_errors;  ///< per frame, px
  std::vector<double> ious;           ///< per frame
  std::vector<double> precision;      ///< fraction with error <= threshold
  std::vector<double> success;        ///< fraction with IoU > threshold
  double precision_at_20 = 0;
  double success_auc = 0;  ///< mean of the success curve
  double fps = 0;
};

/// Builds curves and summaries from per-frame measurements.
EvalReport make_report(std::vector<double> center_errors, std::vector<double> ious, double fps);

struct SequenceResult {
  std::string name;
  std::vector<BBox> boxes;
  EvalReport report;
};

struct OpeResult {
  EvalReport aggregate;  ///< frames pooled over all sequences
  std::vector<SequenceResult> sequences;
};

using SequenceTracker = std::function<TrackResult(const SequenceRecord&)>;

/// Runs the tracker once per sequence from its frame-0 box and pools every
/// frame. Throws std::invalid_argument for an empty sequence list.
OpeResult ope_evaluate(const SequenceTracker& tracker, std::span<const SequenceRecord> sequences);
/// Tracker adaptor for a response network.
SequenceTracker network_tracker(ResponseNetwork& net);
/// Echoes the ground truth.
TrackResult oracle_track(const SequenceRecord& seq);

/// Rows "curve,threshold,value" for both curves.
void write_curves_csv(const EvalReport& report, const std::filesystem::path& path);
struct Curves {
  std::vector<double> precision, success;
};
/// Throws DataError citing the line on malformed input.
Curves read_curves_csv(const std::filesystem::path& path);
/// {"precision_at_20", "success_auc", "fps"}
void write_summary_json(const EvalReport& report, const std::filesystem::path& path);
/// Rows "sequence,frames,precision_at_20,success_auc,fps".
void write_sequence_table(const OpeResult& result, const std::filesystem::path& path);
/// Rows "frame_index,x,y,w,h".
void write_boxes_csv(const std::vector<BBox>& boxes, const std::filesystem::path& path);

}  // namespace amnet
