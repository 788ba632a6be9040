#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "amnet/anet.hpp"
#include "amnet/head.hpp"
#include "amnet/mnet.hpp"
#include "amnet/model.hpp"
#include "amnet/ops.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace amnet;

namespace {

ModelConfig small_config() {
  ModelConfig cfg;
  cfg.template_size = 16;
  cfg.roi_size = 48;
  return cfg;
}

Tensor<double> standardized(const Tensor<double>& x) {
  Tensor<double> out(x.dims());
  const std::size_t hw = x.dims().plane();
  for (std::size_t p = 0; p < x.dims().n * x.dims().c; ++p) {
    long double m = 0, v = 0;
    for (std::size_t i = 0; i < hw; ++i) m += x.raw()[p * hw + i];
    m /= hw;
    for (std::size_t i = 0; i < hw; ++i) v += (x.raw()[p * hw + i] - m) * (x.raw()[p * hw + i] - m);
    v /= hw;
    for (std::size_t i = 0; i < hw; ++i) {
      out.raw()[p * hw + i] = static_cast<double>((x.raw()[p * hw + i] - m) / std::sqrt(v + 1e-6L));
    }
  }
  return out;
}

Tensor<double> relu_conv_same(const Tensor<double>& in, const Tensor<double>& w, const Tensor<double>& b,
                              std::size_t dil) {
  const std::size_t pad = dil * (w.dims().h - 1) / 2;
  std::vector<double> bias(b.data().begin(), b.data().end());
  Tensor<double> out = oracle::conv2d(in, w, bias, 1, dil, pad, pad, pad, pad);
  for (auto& v : out.data()) v = v > 0 ? v : 0;
  return out;
}

// A bright square on a flat gray background at the given top-left corner.
Tensor<double> square_frame(std::size_t size, std::size_t y0, std::size_t x0, std::size_t side) {
  Tensor<double> t(1, 3, size, size, 0.4);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = y0; y < y0 + side; ++y)
      for (std::size_t x = x0; x < x0 + side; ++x) t.at(0, c, y, x) = 0.95;
  return t;
}

}  // namespace

TEST(Anet, LevelChannelsAndSpatialSize) {
  const auto cfg = small_config();
  const auto p = init_params<double>(cfg, 1);
  std::mt19937_64 rng(2);
  Tape<double> tape(false);
  NetContext<double> ctx(tape, p);
  for (std::size_t size : {std::size_t{16}, std::size_t{48}}) {
    const auto pyr = anet::embed(ctx, tape.constant(oracle::random<double>(Dims{1, 3, size, size}, rng, 0, 1)));
    for (std::size_t l = 0; l < 3; ++l) {
      EXPECT_EQ(tape.value(pyr.levels[l]).dims(), (Dims{1, anet::kLevelChannels[l], size, size}));
    }
  }
}

TEST(Anet, RejectsBadPatches) {
  const auto p = init_params<double>(small_config(), 1);
  Tape<double> tape(false);
  NetContext<double> ctx(tape, p);
  EXPECT_THROW(anet::embed(ctx, tape.constant(Tensor<double>(1, 1, 32, 32))), ShapeError);
  EXPECT_THROW(anet::embed(ctx, tape.constant(Tensor<double>(1, 3, 8, 8))), ShapeError);
}

TEST(Anet, EmbedMatchesOracleCascade) {
  const auto p = init_params<double>(small_config(), 3);
  std::mt19937_64 rng(4);
  const auto patch = oracle::random<double>(Dims{1, 3, 20, 18}, rng, 0, 1);
  Tape<double> tape(false);
  NetContext<double> ctx(tape, p);
  const auto pyr = anet::embed(ctx, tape.constant(patch));
  std::vector<Tensor<double>> outs;
  Tensor<double> x = patch;
  for (const auto& l : anet::kLayers) {
    const std::string n(l.name);
    x = relu_conv_same(x, p.value(n + ".weight"), p.value(n + ".bias"), l.dilation);
    outs.push_back(x);
  }
  for (std::size_t l = 0; l < 3; ++l) {
    const auto& a = outs[anet::kLevels[l][0]];
    const auto& b = outs[anet::kLevels[l][1]];
    const auto cat = ops::concat_depth<double>(std::vector<const Tensor<double>*>{&a, &b});
    EXPECT_LT(oracle::max_rel_error(tape.value(pyr.levels[l]), cat, 1e-9), 1e-10) << "level " << l;
  }
}

TEST(Anet, LevelScoresAreStandardizedCorrelations) {
  const auto p = init_params<double>(small_config(), 5);
  std::mt19937_64 rng(6);
  Tape<double> tape(false);
  NetContext<double> ctx(tape, p);
  const auto z = anet::embed(ctx, tape.constant(oracle::random<double>(Dims{1, 3, 32, 32}, rng, 0, 1)));
  const auto x = anet::embed(ctx, tape.constant(oracle::random<double>(Dims{1, 3, 16, 16}, rng, 0, 1)));
  const auto scores = anet::level_scores(ctx, z, x);
  for (std::size_t l = 0; l < 3; ++l) {
    const auto ref = standardized(oracle::xcorr(tape.value(z.levels[l]), standardized(tape.value(x.levels[l]))));
    ASSERT_EQ(tape.value(scores[l]).dims(), (Dims{1, 1, 17, 17}));
    EXPECT_LT(oracle::max_rel_error(tape.value(scores[l]), ref, 1e-6), 1e-8) << "level " << l;
  }
}

TEST(Anet, ZeroPatchGivesZeroResponse) {
  const auto p = init_params<double>(small_config(), 7);
  Tape<double> tape(false);
  NetContext<double> ctx(tape, p);
  const Var o = anet::forward(ctx, tape.constant(Tensor<double>(1, 3, 48, 48)),
                              tape.constant(Tensor<double>(1, 3, 16, 16)));
  ASSERT_EQ(tape.value(o).dims(), (Dims{1, 1, 33, 33}));
  for (double v : tape.value(o).data()) EXPECT_EQ(v, 0.0);
}

TEST(Anet, ZeroFuseWeightsGiveBias) {
  auto p = init_params<double>(small_config(), 8);
  p.value("anet.fuse.weight").fill(0.0);
  p.value("anet.fuse.bias")[0] = 0.3;
  std::mt19937_64 rng(9);
  Tape<double> tape(false);
  NetContext<double> ctx(tape, std::as_const(p));
  const Var o = anet::forward(ctx, tape.constant(oracle::random<double>(Dims{1, 3, 48, 48}, rng, 0, 1)),
                              tape.constant(oracle::random<double>(Dims{1, 3, 16, 16}, rng, 0, 1)));
  for (double v : tape.value(o).data()) EXPECT_EQ(v, 0.3);
}

TEST(Anet, BranchesShareWeights) {
  auto p = init_params<double>(small_config(), 10);
  std::mt19937_64 rng(11);
  Tape<double> tape;
  NetContext<double> ctx(tape, p);
  const Var w1 = ctx.param("anet.conv1.weight");
  const std::size_t before = tape.size();
  anet::embed(ctx, tape.constant(oracle::random<double>(Dims{1, 3, 32, 32}, rng, 0, 1)));
  const std::size_t after_first = tape.size();
  anet::embed(ctx, tape.constant(oracle::random<double>(Dims{1, 3, 16, 16}, rng, 0, 1)));
  EXPECT_EQ(ctx.param("anet.conv1.weight").id, w1.id);
  // The second branch binds no new parameter nodes: same op count minus the
  // 11 remaining weight/bias bindings made by the first.
  EXPECT_EQ(tape.size() - after_first, after_first - before - 11);
}

TEST(Anet, IdenticalInputsAlignAtCenter) {
  // Template equal to the ROI center crop: level scores peak at the center
  // offset for a target on a flat background.
  const auto p = init_params<double>(small_config(), 12);
  const auto roi = square_frame(48, 20, 20, 8);
  Tensor<double> tmpl(1, 3, 16, 16);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t x = 0; x < 16; ++x) tmpl.at(0, c, y, x) = roi.at(0, c, y + 16, x + 16);
  Tape<double> tape(false);
  NetContext<double> ctx(tape, p);
  const auto z = anet::embed(ctx, tape.constant(roi));
  const auto x = anet::embed(ctx, tape.constant(tmpl));
  const auto scores = anet::level_scores(ctx, z, x);
  const auto s = tape.value(scores[0]);
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i] > s[best]) best = i;
  EXPECT_EQ(best / 33, 16u);
  EXPECT_EQ(best % 33, 16u);
}

TEST(Mnet, ContrastKeepsDimsAndMatchesOracle) {
  const auto cfg = small_config();
  const auto p = init_params<double>(cfg, 13);
  std::mt19937_64 rng(14);
  const auto patch = oracle::random<double>(Dims{1, 3, 24, 24}, rng, 0, 1);
  Tape<double> tape(false);
  NetContext<double> ctx(tape, p);
  const Var out = mnet::contrast(ctx, cfg, tape.constant(patch));
  Tensor<double> ref = patch;
  for (std::size_t i = 0; i < 3; ++i) {
    const std::string n = "mnet.contrast" + std::to_string(i + 1);
    ref = relu_conv_same(ref, p.value(n + ".weight"), p.value(n + ".bias"), 1);
  }
  ASSERT_EQ(tape.value(out).dims(), patch.dims());
  EXPECT_LT(oracle::max_rel_error(tape.value(out), ref, 1e-9), 1e-10);
}

TEST(Mnet, ContrastOfFlatPatchWithZeroSumKernels) {
  const auto cfg = small_config();
  auto p = init_params<double>(cfg, 15);
  for (std::size_t i = 1; i <= 3; ++i) {
    auto& w = p.value("mnet.contrast" + std::to_string(i) + ".weight");
    const Dims d = w.dims();
    for (std::size_t o = 0; o < d.n; ++o)
      for (std::size_t c = 0; c < d.c; ++c) {
        double s = 0;
        for (std::size_t k = 0; k < d.plane(); ++k) s += w.at(o, c, k / d.w, k % d.w);
        w.at(o, c, d.h / 2, d.w / 2) -= s;
      }
  }
  Tape<double> tape(false);
  NetContext<double> ctx(tape, std::as_const(p));
  const Var out = mnet::contrast(ctx, cfg, tape.constant(Tensor<double>(1, 3, 24, 24, 0.6)));
  // Borders see zero padding, so only the interior is flat.
  const auto& v = tape.value(out);
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 6; y < 18; ++y)
      for (std::size_t x = 6; x < 18; ++x) EXPECT_NEAR(v.at(0, c, y, x), 0.0, 1e-12);
}

TEST(Mnet, SpotlightStaticIsBias) {
  const auto cfg = small_config();
  auto p = init_params<double>(cfg, 16);
  p.value("mnet.spot_fuse.bias")[0] = -0.25;
  std::mt19937_64 rng(17);
  const auto zc = oracle::random<double>(Dims{1, 3, 20, 20}, rng);
  Tape<double> tape(false);
  NetContext<double> ctx(tape, std::as_const(p));
  const Var o = mnet::spotlight(ctx, cfg, tape.constant(zc), tape.constant(zc));
  for (double v : tape.value(o).data()) EXPECT_EQ(v, -0.25);
}

TEST(Mnet, SpotlightIsLinearWithZeroBias) {
  const auto cfg = small_config();
  const auto p = init_params<double>(cfg, 18);
  std::mt19937_64 rng(19);
  const auto a = oracle::random<double>(Dims{1, 3, 20, 20}, rng);
  const auto b = oracle::random<double>(Dims{1, 3, 20, 20}, rng);
  Tensor<double> a3 = a, b3 = b;
  for (auto& v : a3.data()) v *= -2.5;
  for (auto& v : b3.data()) v *= -2.5;
  Tape<double> tape(false);
  NetContext<double> ctx(tape, p);
  const auto base = tape.value(mnet::spotlight(ctx, cfg, tape.constant(a), tape.constant(b)));
  const auto scaled = tape.value(mnet::spotlight(ctx, cfg, tape.constant(a3), tape.constant(b3)));
  for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(scaled[i], -2.5 * base[i], 1e-12);
}

TEST(Mnet, SpotlightBrightPixelStaysLocal) {
  const auto cfg = small_config();
  const auto p = init_params<double>(cfg, 20);
  Tensor<double> prev(1, 3, 24, 24), cur(1, 3, 24, 24);
  for (std::size_t c = 0; c < 3; ++c) cur.at(0, c, 11, 13) = 1.0;
  Tape<double> tape(false);
  NetContext<double> ctx(tape, p);
  const auto o = tape.value(mnet::spotlight(ctx, cfg, tape.constant(cur), tape.constant(prev)));
  std::size_t best = 0;
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (std::abs(o[i]) > std::abs(o[best])) best = i;
    const long y = static_cast<long>(i / 24), x = static_cast<long>(i % 24);
    if (std::abs(y - 11) > 3 || std::abs(x - 13) > 3) {
      EXPECT_EQ(o[i], 0.0);
    }
  }
  EXPECT_LE(std::abs(static_cast<long>(best / 24) - 11), 3);
  EXPECT_LE(std::abs(static_cast<long>(best % 24) - 13), 3);
  EXPECT_GT(std::abs(o[best]), 0.0);
}

TEST(Mnet, SpotlightShiftCompatible) {
  const auto cfg = small_config();
  const auto p = init_params<double>(cfg, 21);
  std::mt19937_64 rng(22);
  const std::size_t n = 40, dy = 2, dx = 3;
  const auto a = oracle::random<double>(Dims{1, 3, n, n}, rng);
  const auto b = oracle::random<double>(Dims{1, 3, n, n}, rng);
  Tensor<double> as(a.dims()), bs(b.dims());
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = dy; y < n; ++y)
      for (std::size_t x = dx; x < n; ++x) {
        as.at(0, c, y, x) = a.at(0, c, y - dy, x - dx);
        bs.at(0, c, y, x) = b.at(0, c, y - dy, x - dx);
      }
  Tape<double> tape(false);
  NetContext<double> ctx(tape, p);
  const auto o = tape.value(mnet::spotlight(ctx, cfg, tape.constant(a), tape.constant(b)));
  const auto os = tape.value(mnet::spotlight(ctx, cfg, tape.constant(as), tape.constant(bs)));
  for (std::size_t y = 7 + dy; y < n - 7; ++y)
    for (std::size_t x = 7 + dx; x < n - 7; ++x)
      EXPECT_NEAR(os.at(0, 0, y, x), o.at(0, 0, y - dy, x - dx), 1e-12);
}

TEST(Mnet, BsfeZeroAndConstantInputs) {
  const auto cfg = small_config();
  EXPECT_EQ(mnet::bsfe_downsample(cfg), 8u);
  for (double c : {0.0, 1.7, -3.0}) {
    Tape<double> tape(false);
    const Var o = mnet::bsfe(tape, cfg, tape.constant(Tensor<double>(1, 1, 48, 48, c)));
    ASSERT_EQ(tape.value(o).dims(), (Dims{1, 1, 48, 48}));
    for (double v : tape.value(o).data()) EXPECT_NEAR(v, 0.0, 1e-12) << c;
  }
}

TEST(Mnet, BsfeMatchesOracleComposition) {
  const auto cfg = small_config();
  std::mt19937_64 rng(23);
  const auto in = oracle::random<double>(Dims{1, 1, 48, 48}, rng);
  Tape<double> tape(false);
  const auto out = tape.value(mnet::bsfe(tape, cfg, tape.constant(in)));
  Tensor<double> mx = in, av = in;
  for (std::size_t k : cfg.pool_kernels) {
    mx = oracle::pool(mx, k, 2, (k - 1) / 2, true);
    av = oracle::pool(av, k, 2, (k - 1) / 2, false);
  }
  ASSERT_EQ(mx.dims(), (Dims{1, 1, 6, 6}));
  Tensor<double> diff(mx.dims());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = mx[i] - av[i];
  EXPECT_LT(oracle::max_rel_error(out, oracle::resize(diff, 48, 48), 1e-9), 1e-10);
}

TEST(Mnet, StaticSceneIsExactlyZero) {
  const auto cfg = small_config();
  const auto p = init_params<float>(cfg, 24);
  std::mt19937_64 rng(25);
  const auto roi = oracle::random<float>(Dims{1, 3, 48, 48}, rng, 0, 1);
  Tape<float> tape(false);
  NetContext<float> ctx(tape, p);
  const Var o = mnet::forward(ctx, cfg, tape.constant(roi), tape.constant(roi));
  for (float v : tape.value(o).data()) EXPECT_EQ(v, 0.0f);
}

TEST(Mnet, MovingSquareResponseInsideUnion) {
  // Pass-through contrast and box-average spotlight weights, so the check is
  // about the differencing and pooling geometry rather than a random init.
  const ModelConfig cfg;
  auto p = init_params<double>(cfg, 30);
  for (std::size_t i = 1; i <= 3; ++i) {
    auto& w = p.value("mnet.contrast" + std::to_string(i) + ".weight");
    w.fill(0.0);
    const Dims d = w.dims();
    for (std::size_t c = 0; c < 3; ++c) w.at(c, c, d.h / 2, d.w / 2) = 1.0;
  }
  for (std::size_t k : cfg.spotlight_kernels) {
    p.value("mnet.spot_k" + std::to_string(k) + ".weight").fill(1.0 / static_cast<double>(3 * k * k));
  }
  p.value("mnet.spot_fuse.weight").fill(1.0 / 3.0);
  for (std::size_t side : {std::size_t{16}, std::size_t{24}, std::size_t{32}}) {
    for (std::size_t y0 : {std::size_t{64}, std::size_t{70}, std::size_t{83}}) {
      auto frame = [&](std::size_t x0) {
        Tensor<double> t(1, 3, 192, 192, 0.4);
        for (std::size_t c = 0; c < 3; ++c)
          for (std::size_t y = y0; y < y0 + side; ++y)
            for (std::size_t x = x0; x < x0 + side; ++x) t.at(0, c, y, x) = 0.95;
        return t;
      };
      Tape<double> tape(false);
      NetContext<double> ctx(tape, std::as_const(p));
      const auto o = tape.value(mnet::forward(ctx, cfg, tape.constant(frame(76)), tape.constant(frame(70))));
      std::size_t best = 0;
      for (std::size_t i = 1; i < o.size(); ++i)
        if (std::abs(o[i]) > std::abs(o[best])) best = i;
      const std::size_t y = best / 192, x = best % 192;
      EXPECT_TRUE(y >= y0 && y < y0 + side && x >= 70 && x < 76 + side)
          << "side " << side << " top " << y0 << ": argmax at " << y << "," << x;
    }
  }
}

TEST(Head, ZeroWeightsGiveHalf) {
  auto p = init_params<double>(small_config(), 26);
  p.value("head.fuse.weight").fill(0.0);
  std::mt19937_64 rng(27);
  Tape<double> tape(false);
  NetContext<double> ctx(tape, std::as_const(p));
  const Var o = head::fuse(ctx, tape.constant(oracle::random<double>(Dims{1, 1, 33, 33}, rng)),
                           tape.constant(oracle::random<double>(Dims{1, 1, 48, 48}, rng)));
  ASSERT_EQ(tape.value(o).dims(), (Dims{1, 1, 48, 48}));
  for (double v : tape.value(o).data()) EXPECT_EQ(v, 0.5);
}

TEST(Head, DeadMotionChannel) {
  auto p = init_params<double>(small_config(), 28);
  p.value("head.fuse.weight")[0] = 1.0;
  p.value("head.fuse.weight")[1] = 0.0;
  std::mt19937_64 rng(29);
  const auto oa = oracle::random<double>(Dims{1, 1, 33, 33}, rng);
  Tape<double> tape(false);
  NetContext<double> ctx(tape, std::as_const(p));
  const auto a = tape.value(head::fuse(ctx, tape.constant(oa),
                                        tape.constant(oracle::random<double>(Dims{1, 1, 48, 48}, rng))));
  const auto b = tape.value(head::fuse(ctx, tape.constant(oa),
                                        tape.constant(oracle::random<double>(Dims{1, 1, 48, 48}, rng))));
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Head, OutputStrictlyInsideUnitInterval) {
  auto p = init_params<float>(small_config(), 30);
  p.value("head.fuse.weight")[0] = 1e4f;
  p.value("head.fuse.weight")[1] = -1e4f;
  std::mt19937_64 rng(31);
  Tape<float> tape(false);
  NetContext<float> ctx(tape, std::as_const(p));
  const auto o = tape.value(head::fuse(ctx, tape.constant(oracle::random<float>(Dims{1, 1, 33, 33}, rng)),
                                        tape.constant(oracle::random<float>(Dims{1, 1, 48, 48}, rng))));
  for (float v : o.data()) {
    EXPECT_GT(v, 0.0f);
    EXPECT_LT(v, 1.0f);
  }
}

TEST(Head, AppearanceMapAlignedToRoiGrid) {
  // A single appearance peak at correlation offset (i, j) lands on ROI pixel
  // (i + T/2, j + T/2); here T = 16.
  auto p = init_params<double>(small_config(), 41);
  p.value("head.fuse.weight")[0] = 1.0;
  p.value("head.fuse.weight")[1] = 0.0;
  Tensor<double> oa(1, 1, 33, 33);
  oa.at(0, 0, 5, 20) = 1.0;
  Tape<double> tape(false);
  NetContext<double> ctx(tape, std::as_const(p));
  const auto o = tape.value(head::fuse(ctx, tape.constant(oa), tape.constant(Tensor<double>(1, 1, 48, 48))));
  std::size_t best = 0;
  for (std::size_t i = 1; i < o.size(); ++i)
    if (o[i] > o[best]) best = i;
  EXPECT_EQ(best / 48, 13u);
  EXPECT_EQ(best % 48, 28u);
}

TEST(Head, FuseShapeErrors) {
  const auto p = init_params<double>(small_config(), 32);
  Tape<double> tape(false);
  NetContext<double> ctx(tape, p);
  EXPECT_THROW(head::fuse(ctx, tape.constant(Tensor<double>(1, 2, 33, 33)),
                          tape.constant(Tensor<double>(1, 1, 48, 48))),
               ShapeError);
  EXPECT_THROW(head::fuse(ctx, tape.constant(Tensor<double>(1, 1, 50, 50)),
                          tape.constant(Tensor<double>(1, 1, 48, 48))),
               ShapeError);
}

TEST(Head, FusionWeightGradients) {
  auto p = init_params<double>(small_config(), 33);
  std::mt19937_64 rng(34);
  const auto oa = oracle::random<double>(Dims{1, 1, 33, 33}, rng);
  const auto om = oracle::random<double>(Dims{1, 1, 48, 48}, rng);
  const auto gt = head::gaussian_gt<double>(48, 48, 20, 25, 3.0);
  ParamStore<double> fuse;
  fuse.add("head.fuse.weight", p.value("head.fuse.weight"));
  fuse.add("head.fuse.bias", Tensor<double>(1, 1, 1, 1, 0.2));
  const auto r = gradcheck::check(fuse, [&](Tape<double>& t, ParamStore<double>& s) {
    NetContext<double> ctx(t, s);
    return head::ridge_loss(t, head::fuse(ctx, t.constant(oa), t.constant(om)), t.constant(gt));
  }, 8, 35);
  EXPECT_EQ(r.checked, 3u);
  EXPECT_LT(r.worst, 1e-6) << r.worst_at;
}

TEST(GaussianGt, PeakAndSigmaValues) {
  const auto g = head::gaussian_gt<double>(64, 64, 30, 20, 4.0);
  EXPECT_EQ(g.at(0, 0, 30, 20), 1.0);
  EXPECT_NEAR(g.at(0, 0, 34, 20), std::exp(-0.5), 1e-12);
  EXPECT_NEAR(g.at(0, 0, 30, 16), 0.6065, 1e-4);
  for (double v : g.data()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(GaussianGt, MassMatchesIntegral) {
  const double sigma = 9.6;
  const auto g = head::gaussian_gt<double>(192, 192, 96, 96, sigma);
  double s = 0;
  for (double v : g.data()) s += v;
  EXPECT_NEAR(s / (2 * M_PI * sigma * sigma), 1.0, 0.01);
  EXPECT_NEAR(s, 579.1, 5.791);
}

TEST(GaussianGt, DiagonalSymmetryAndMonotone) {
  const auto g = head::gaussian_gt<double>(40, 40, 17, 17, 5.0);
  for (std::size_t r = 0; r < 40; ++r)
    for (std::size_t c = 0; c < 40; ++c) EXPECT_EQ(g.at(0, 0, r, c), g.at(0, 0, c, r));
  for (std::size_t c = 17; c + 1 < 40; ++c) EXPECT_GE(g.at(0, 0, 17, c), g.at(0, 0, 17, c + 1));
}

TEST(GaussianGt, Errors) {
  EXPECT_THROW(head::gaussian_gt<double>(10, 10, 10, 2, 1.0), std::invalid_argument);
  EXPECT_THROW(head::gaussian_gt<double>(10, 10, -0.5, 2, 1.0), std::invalid_argument);
  EXPECT_THROW(head::gaussian_gt<double>(10, 10, 2, 2, 0.0), std::invalid_argument);
}

TEST(RidgeLoss, Examples) {
  Tape<double> tape(false);
  const Var half = tape.constant(Tensor<double>(1, 1, 8, 8, 0.5));
  EXPECT_EQ(tape.value(head::ridge_loss(tape, half, tape.constant(Tensor<double>(1, 1, 8, 8, 0.5))))[0], 0.0);
  EXPECT_EQ(tape.value(head::ridge_loss(tape, half, tape.constant(Tensor<double>(1, 1, 8, 8, 1.0))))[0], 0.25);
  std::mt19937_64 rng(36);
  const auto a = oracle::random<double>(Dims{1, 1, 9, 7}, rng);
  const auto b = oracle::random<double>(Dims{1, 1, 9, 7}, rng);
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  const double loss = tape.value(head::ridge_loss(tape, tape.constant(a), tape.constant(b)))[0];
  EXPECT_NEAR(loss, static_cast<double>(s / a.size()), 1e-15);
  EXPECT_GT(loss, 0.0);
  EXPECT_THROW(head::ridge_loss(tape, tape.constant(a), half), ShapeError);
}

TEST(GtSigma, ProportionalToBoxScale) {
  ModelConfig cfg;
  EXPECT_NEAR(head::gt_sigma(cfg, 96, 96), 9.6, 1e-12);
  EXPECT_NEAR(head::gt_sigma(cfg, 16, 64), 3.2, 1e-12);
}

TEST(Model, LayoutAndInit) {
  const auto cfg = small_config();
  const auto p = init_params<float>(cfg, 37);
  EXPECT_NO_THROW(check_layout(p, cfg));
  const auto names = p.names();
  EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
  for (const auto& n : names) {
    if (n.ends_with(".bias")) {
      for (float v : p.value(n).data()) EXPECT_EQ(v, 0.0f) << n;
    }
  }
  const auto again = init_params<float>(cfg, 37);
  for (const auto& n : names) {
    EXPECT_TRUE(std::equal(p.value(n).data().begin(), p.value(n).data().end(), again.value(n).data().begin()));
  }
  ModelConfig other = cfg;
  other.spotlight_kernels = {3, 5};
  EXPECT_THROW(check_layout(p, other), std::invalid_argument);
}

TEST(Model, ConfigValidation) {
  ModelConfig cfg = small_config();
  cfg.roi_size = 50;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.pool_kernels = {3, 4};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = small_config();
  cfg.gt_sigma_factor = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Model, EndToEndGradientsOnMiniature) {
  ModelConfig cfg;
  cfg.template_size = 16;
  cfg.roi_size = 32;
  auto p = init_params<double>(cfg, 38);
  std::mt19937_64 rng(39);
  const auto roi_t = oracle::random<double>(Dims{1, 3, 32, 32}, rng, 0, 1);
  const auto roi_prev = oracle::random<double>(Dims{1, 3, 32, 32}, rng, 0, 1);
  const auto tmpl = oracle::random<double>(Dims{1, 3, 16, 16}, rng, 0, 1);
  const auto gt = head::gaussian_gt<double>(32, 32, 15, 17, 2.0);
  const auto r = gradcheck::check(p, [&](Tape<double>& t, ParamStore<double>& s) {
    NetContext<double> ctx(t, s);
    const auto f = amnet_forward(ctx, cfg, t.constant(roi_t), t.constant(roi_prev), t.constant(tmpl));
    return head::ridge_loss(t, f.o_am, t.constant(gt));
  }, 2, 40);
  EXPECT_GT(r.checked, p.size());
  EXPECT_LT(r.worst, 1e-6) << r.worst_at;
}
