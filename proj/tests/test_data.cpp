#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <unistd.h>

#include "amnet/checkpoint.hpp"
#include "amnet/errors.hpp"
#include "amnet/head.hpp"
#include "amnet/model.hpp"
#include "amnet/synth.hpp"
#include "amnet/tracker.hpp"
#include "amnet/train.hpp"

using namespace amnet;
namespace fs = std::filesystem;

namespace {

ModelConfig desk() {
  ModelConfig cfg;
  cfg.template_size = 16;
  cfg.roi_size = 48;
  return cfg;
}

SynthConfig still(int jitter) {
  SynthConfig c;
  c.num_frames = 6;
  c.velocity = std::array<double, 2>{0.0, 0.0};
  c.start = std::array<double, 2>{50.0, 40.0};
  c.position_jitter = 0;
  c.camera_jitter = jitter;
  return c;
}

// Two blank frames with hand-placed boxes.
SequenceRecord two_boxes(const BBox& a, const BBox& b) {
  SequenceRecord s;
  s.name = "boxes";
  s.frames = {Image(128, 96), Image(128, 96)};
  s.gt = {a, b};
  return s;
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("amnet_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Synth, ConstantVelocityGivesArithmeticBoxes) {
  SynthConfig c = still(0);
  c.num_frames = 10;
  c.velocity = std::array<double, 2>{2.0, 0.0};
  c.start = std::array<double, 2>{20.0, 30.0};
  const auto s = synth_sequence(c, 4).record;
  ASSERT_EQ(s.gt.size(), 10u);
  for (std::size_t t = 0; t < 10; ++t) {
    EXPECT_EQ(s.gt[t].x, 20.0 + 2.0 * static_cast<double>(t));
    EXPECT_EQ(s.gt[t].y, 30.0);
    EXPECT_EQ(s.gt[t].w, 16.0);
  }
}

TEST(Synth, SameSeedSamePixels) {
  SynthConfig c;
  c.num_frames = 5;
  c.camera_jitter = 2;
  c.occlusion_count = 1;
  c.occlusion_length = 2;
  const auto a = synth_sequence(c, 9).record;
  const auto b = synth_sequence(c, 9).record;
  const auto d = synth_sequence(c, 10).record;
  EXPECT_EQ(a.frames, b.frames);
  EXPECT_EQ(a.gt, b.gt);
  EXPECT_NE(a.frames, d.frames);
}

TEST(Synth, CameraJitterShiftsWholeFrame) {
  const int j = 2;
  const auto s = synth_sequence(still(j), 21);
  const Image& f0 = s.record.frames[0];
  bool any_shift = false;
  for (std::size_t t = 1; t < s.record.size(); ++t) {
    const int sx = s.camera_shift[t][0] - s.camera_shift[0][0];
    const int sy = s.camera_shift[t][1] - s.camera_shift[0][1];
    any_shift = any_shift || sx != 0 || sy != 0;
    const Image& f = s.record.frames[t];
    for (std::size_t y = 2 * j; y + 2 * j < f.height; ++y) {
      for (std::size_t x = 2 * j; x + 2 * j < f.width; ++x) {
        for (std::size_t c = 0; c < 3; ++c) {
          ASSERT_EQ(f.at(x, y, c), f0.at(x - sx, y - sy, c)) << "frame " << t << " at " << x << "," << y;
        }
      }
    }
    EXPECT_EQ(s.record.gt[t].x - s.record.gt[0].x, sx);
    EXPECT_EQ(s.record.gt[t].y - s.record.gt[0].y, sy);
  }
  EXPECT_TRUE(any_shift);
}

TEST(Synth, OcclusionWindowsHideTarget) {
  SynthConfig c;
  c.num_frames = 40;
  c.occlusion_count = 2;
  c.occlusion_length = 5;
  const auto s = synth_sequence(c, 3);
  std::size_t hidden = 0;
  for (bool o : s.occluded) hidden += o;
  EXPECT_EQ(hidden, 10u);
  EXPECT_FALSE(s.occluded[0]);
}

TEST(Synth, TargetLargerThanFrameThrows) {
  SynthConfig c;
  c.target_size = 200;
  EXPECT_THROW(synth_sequence(c, 1), std::invalid_argument);
}

TEST(Triplet, StaticTargetPeaksAtCenter) {
  const auto seq = synth_sequence(still(0), 2).record;
  const Triplet tr = make_triplet(seq, 3, desk(), 0, 0);
  EXPECT_EQ(tr.peak_r, 24.0);
  EXPECT_EQ(tr.peak_c, 24.0);
  EXPECT_EQ(tr.box_w, 16.0);
  EXPECT_EQ(tr.roi_t.dims(), (Dims{1, 3, 48, 48}));
  EXPECT_EQ(tr.tmpl.dims(), (Dims{1, 3, 16, 16}));
}

TEST(Triplet, CropShiftMovesPeakOpposite) {
  // Box side 20 -> ROI side 60 over 48 map pixels.
  const BBox b{40, 30, 20, 20};
  const auto seq = two_boxes(b, b);
  const Triplet tr = make_triplet(seq, 1, desk(), 8, -4);
  EXPECT_DOUBLE_EQ(tr.peak_c, 24.0 - 8.0);
  EXPECT_DOUBLE_EQ(tr.peak_r, 24.0 + 4.0);
  const double s = 60.0 / 48.0;
  const double left = b.cx() + 8 * s - 30.0, top = b.cy() - 4 * s - 30.0;
  EXPECT_NEAR(map_to_image(tr.peak_c, left, 60.0, 48), b.cx(), 1e-12);
  EXPECT_NEAR(map_to_image(tr.peak_r, top, 60.0, 48), b.cy(), 1e-12);
}

TEST(Triplet, TargetMotionShiftsPeak) {
  const BBox a{40, 30, 20, 20};
  const BBox b{40, 36, 20, 20};
  const Triplet tr = make_triplet(two_boxes(a, b), 1, desk(), 0, 0);
  EXPECT_DOUBLE_EQ(tr.peak_r, 24.0 + 6.0 * 48.0 / 60.0);
  EXPECT_DOUBLE_EQ(tr.peak_c, 24.0);
}

TEST(Triplet, IndexAndRoiErrors) {
  const BBox a{40, 30, 20, 20};
  const auto seq = two_boxes(a, BBox{100, 30, 20, 20});
  EXPECT_THROW(make_triplet(seq, 0, desk(), 0, 0), std::out_of_range);
  EXPECT_THROW(make_triplet(seq, 2, desk(), 0, 0), std::out_of_range);
  EXPECT_THROW(make_triplet(seq, 1, desk(), 0, 0), DataError);
}

TEST(Triplet, SampledShiftWithinBound) {
  const auto seq = synth_sequence(still(0), 5).record;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const Triplet tr = sample_triplet(seq, 2, desk(), rng);
    EXPECT_LE(std::abs(tr.peak_r - 24.0), 4.0);
    EXPECT_LE(std::abs(tr.peak_c - 24.0), 4.0);
  }
}

TEST(Schedule, ExactValuesAtBoundaries) {
  TrainConfig t;
  EXPECT_EQ(t.lr_at(0), 1e-3);
  EXPECT_EQ(t.lr_at(1999), 1e-3);
  EXPECT_DOUBLE_EQ(t.lr_at(2000), 1e-4);
  EXPECT_DOUBLE_EQ(t.lr_at(3999), 1e-4);
  EXPECT_DOUBLE_EQ(t.lr_at(4000), 1e-5);
  EXPECT_EQ(t.lr_at(6000), 1e-5);
  EXPECT_EQ(t.lr_at(1000000), 1e-5);
}

TEST(Schedule, InvalidConfigs) {
  TrainConfig t;
  t.lr_end = 1e-2;
  EXPECT_THROW(t.validate(), std::invalid_argument);
  t = TrainConfig{};
  t.batch_size = 0;
  EXPECT_THROW(t.validate(), std::invalid_argument);
}

class TrainFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    SynthConfig c;
    c.num_frames = 12;
    c.camera_jitter = 2;
    for (int i = 0; i < 3; ++i) corpus.push_back(synth_sequence(c, 50 + i).record);
  }
  std::vector<SequenceRecord> corpus;
};

TEST_F(TrainFixture, RepeatedSampleBatchMatchesSingle) {
  const Triplet tr = make_triplet(corpus[0], 4, desk(), 2, -1);
  auto one = init_params<float>(desk(), 3);
  auto many = init_params<float>(desk(), 3);
  const std::vector<Triplet> b1{tr};
  const std::vector<Triplet> b16(16, tr);
  const double l1 = batch_gradient(one, desk(), b1);
  const double l16 = batch_gradient(many, desk(), b16);
  EXPECT_EQ(l1, l16);
  for (const auto& name : one.names()) {
    const auto& g1 = one.grad(name);
    const auto& g16 = many.grad(name);
    for (std::size_t i = 0; i < g1.size(); ++i) ASSERT_EQ(g1[i], g16[i]) << name << "[" << i << "]";
  }
}

TEST_F(TrainFixture, FixedBatchLossDecreases) {
  std::mt19937_64 rng(7);
  std::vector<Triplet> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(sample_triplet(corpus[i % 3], 3 + i, desk(), rng));
  auto p = init_params<float>(desk(), 7);
  TrainConfig t;
  double prev = 1e9;
  for (int step = 0; step < 10; ++step) {
    const double loss = train_step(p, desk(), t, batch);
    EXPECT_LT(loss, prev) << "step " << step;
    prev = loss;
  }
}

TEST_F(TrainFixture, SameSeedBitIdentical) {
  TrainConfig t;
  t.steps = 3;
  t.batch_size = 2;
  auto a = init_params<float>(desk(), 7);
  auto b = init_params<float>(desk(), 7);
  const auto ha = train(a, desk(), t, corpus);
  const auto hb = train(b, desk(), t, corpus);
  ASSERT_EQ(ha.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(ha[i].loss, hb[i].loss);
    EXPECT_EQ(ha[i].step, i);
  }
  EXPECT_EQ(serialize_checkpoint(a), serialize_checkpoint(b));
  EXPECT_EQ(a.step_count(), 3u);
}

TEST_F(TrainFixture, NonFiniteLossNamesStep) {
  TrainConfig t;
  t.steps = 2;
  t.batch_size = 1;
  auto p = init_params<float>(desk(), 7);
  p.value(std::string(head::kFuse) + ".bias")[0] = std::nanf("");
  try {
    train(p, desk(), t, corpus);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("step 0"), std::string::npos) << e.what();
  }
}

TEST(Checkpoint, RoundTripBitIdentical) {
  const auto p = init_params<float>(desk(), 11);
  const fs::path path = temp_file("rt.amnt");
  save_checkpoint(p, path);
  const auto q = load_checkpoint(path, desk());
  fs::remove(path);
  ASSERT_EQ(p.names(), q.names());
  for (const auto& name : p.names()) {
    const auto& a = p.value(name);
    const auto& b = q.value(name);
    ASSERT_EQ(a.dims(), b.dims());
    EXPECT_EQ(std::memcmp(a.raw(), b.raw(), a.size() * sizeof(float)), 0) << name;
  }
}

TEST(Checkpoint, MatchesGoldenBytes) {
  ParamStore<float> s;
  s.add("b.bias", Tensor<float>(Dims{1, 2, 1, 1}, std::vector<float>{3.25f, -7.0f}));
  s.add("a.weight", Tensor<float>(Dims{1, 1, 2, 3}, std::vector<float>{0.0f, 1.0f, -1.5f, 0.1f, 1e-3f, -0.0f}));
  const auto golden = read_bytes(fs::path(AMNET_TEST_DATA) / "golden.amnt");
  ASSERT_EQ(golden.size(), 96u);
  EXPECT_EQ(serialize_checkpoint(s), golden);
  const auto back = parse_checkpoint(golden);
  EXPECT_EQ(back.value("a.weight")[3], 0.1f);
  EXPECT_TRUE(std::signbit(back.value("a.weight")[5]));
}

TEST(Checkpoint, BadMagicAndVersion) {
  auto bytes = read_bytes(fs::path(AMNET_TEST_DATA) / "golden.amnt");
  auto bad = bytes;
  std::copy_n("XXXX", 4, bad.begin());
  EXPECT_THROW(parse_checkpoint(bad), CheckpointError);
  bad = bytes;
  bad[4] = 2;
  try {
    parse_checkpoint(bad);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("version 2"), std::string::npos) << e.what();
  }
}

TEST(Checkpoint, TruncationNamesParameter) {
  const auto bytes = read_bytes(fs::path(AMNET_TEST_DATA) / "golden.amnt");
  const std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 3);
  try {
    parse_checkpoint(cut);
    FAIL();
  } catch (const CheckpointError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("b.bias"), std::string::npos) << msg;
    EXPECT_NE(msg.find("byte 88"), std::string::npos) << msg;
  }
}

TEST(Checkpoint, ArchitectureMismatchListsDims) {
  auto p = init_params<float>(desk(), 1);
  ParamStore<float> q;
  for (const auto& name : p.names()) {
    q.add(name, name == std::string(head::kFuse) + ".weight" ? Tensor<float>(1, 3, 1, 1) : p.value(name));
  }
  const fs::path path = temp_file("mismatch.amnt");
  save_checkpoint(q, path);
  try {
    load_checkpoint(path, desk());
    FAIL();
  } catch (const CheckpointError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("1x2x1x1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("1x3x1x1"), std::string::npos) << msg;
  }
  fs::remove(path);
}
