#include "amnet/train.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "amnet/errors.hpp"
#include "amnet/head.hpp"
#include "amnet/model.hpp"
#include "amnet/tracker.hpp"

namespace amnet {

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size: must be at least 1");
  if (!(lr_start > 0) || !(lr_end > 0)) throw std::invalid_argument("lr_start: learning rates must be positive");
  if (lr_end > lr_start) throw std::invalid_argument("lr_end: must not exceed lr_start");
  if (lr_step < 1) throw std::invalid_argument("lr_step: must be at least 1");
  if (!(weight_decay >= 0)) throw std::invalid_argument("weight_decay: must be non-negative");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) {
    throw std::invalid_argument("beta1: adam betas must lie in [0, 1)");
  }
  if (!(eps > 0)) throw std::invalid_argument("eps: must be positive");
}

double TrainConfig::lr_at(std::uint64_t step) const {
  const double drops = static_cast<double>(step / lr_step);
  return std::max(lr_end, lr_start * std::pow(0.1, drops));
}

Triplet make_triplet(const SequenceRecord& seq, std::size_t t, const ModelConfig& cfg, double dx,
                     double dy) {
  if (t < 1 || t >= seq.size()) {
    throw std::out_of_range(seq.name + ": triplet index " + std::to_string(t) + " outside [1, " +
                            std::to_string(seq.size()) + ")");
  }
  const BBox& prev = seq.gt[t - 1];
  const BBox& cur = seq.gt[t];
  const std::size_t n = cfg.roi_size;
  const double ratio = static_cast<double>(cfg.roi_size) / static_cast<double>(cfg.template_size);
  const double side = ratio * std::max(prev.w, prev.h);
  const double s = side / static_cast<double>(n);
  const SquareCrop roi{prev.cx() + dx * s, prev.cy() + dy * s, side};

  Triplet out;
  out.peak_r = image_to_map(cur.cy(), roi.cy - side / 2.0, side, n);
  out.peak_c = image_to_map(cur.cx(), roi.cx - side / 2.0, side, n);
  const double lim = static_cast<double>(n);
  if (!(out.peak_r >= 0 && out.peak_r < lim && out.peak_c >= 0 && out.peak_c < lim)) {
    throw DataError(seq.name + ": target at frame " + std::to_string(t) + " leaves the ROI");
  }
  out.box_w = cur.w / s;
  out.box_h = cur.h / s;

  const Image f_prev = seq.frame(t - 1);
  const Image f_cur = seq.frame(t);
  const auto mean_prev = channel_mean(f_prev);
  out.roi_prev = crop_resize(f_prev, mean_prev, roi, n);
  out.roi_t = crop_resize(f_cur, roi, n);
  out.tmpl = crop_resize(f_prev, mean_prev, {prev.cx(), prev.cy(), std::max(prev.w, prev.h)},
                         cfg.template_size);
  return out;
}

Triplet sample_triplet(const SequenceRecord& seq, std::size_t t, const ModelConfig& cfg,
                       std::mt19937_64& rng) {
  const double r = static_cast<double>(cfg.roi_size) / 12.0;
  std::uniform_real_distribution<double> shift(-r, r);
  const double dx = shift(rng);
  const double dy = shift(rng);
  return make_triplet(seq, t, cfg, dx, dy);
}

double batch_gradient(ParamStore<float>& params, const ModelConfig& cfg, std::span<const Triplet> batch) {
  if (batch.empty()) throw std::invalid_argument("batch_gradient: empty batch");
  std::vector<std::vector<double>> acc;
  std::vector<ParamEntry<float>*> entries;
  for (auto& [name, e] : params) {
    entries.push_back(&e);
    acc.emplace_back(e.value.size(), 0.0);
  }
  const std::vector<std::string> names = params.names();
  double loss_sum = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Triplet& tr = batch[b];
    Tape<float> tape;
    const NetContext<float> ctx(tape, params);
    const ForwardVars f = amnet_forward(ctx, cfg, tape.constant(tr.roi_t), tape.constant(tr.roi_prev),
                                        tape.constant(tr.tmpl));
    const Var gt = tape.constant(head::gaussian_gt<float>(cfg.roi_size, cfg.roi_size, tr.peak_r, tr.peak_c,
                                                         head::gt_sigma(cfg, tr.box_w, tr.box_h)));
    const Var loss = head::ridge_loss(tape, f.o_am, gt);
    const double l = tape.value(loss)[0];
    if (!std::isfinite(l)) throw NumericError("non-finite loss in sample " + std::to_string(b));
    loss_sum += l;
    tape.backward(loss, false);
    for (std::size_t p = 0; p < names.size(); ++p) {
      const Tensor<float>& g = tape.grad(tape.param(params, names[p]));
      if (g.empty()) continue;
      for (std::size_t i = 0; i < g.size(); ++i) acc[p][i] += g[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (std::size_t p = 0; p < entries.size(); ++p) {
    Tensor<float>& g = entries[p]->grad;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = acc[p][i] * inv;
      if (!std::isfinite(v)) throw NumericError("non-finite gradient for " + names[p]);
      g[i] = static_cast<float>(v);
    }
  }
  return loss_sum * inv;
}

double train_step(ParamStore<float>& params, const ModelConfig& cfg, const TrainConfig& tcfg,
                  std::span<const Triplet> batch) {
  const double loss = batch_gradient(params, cfg, batch);
  AdamConfig adam;
  adam.lr = tcfg.lr_at(params.step_count());
  adam.beta1 = tcfg.beta1;
  adam.beta2 = tcfg.beta2;
  adam.eps = tcfg.eps;
  adam.weight_decay = tcfg.weight_decay;
  adam_step(params, adam);
  return loss;
}

std::vector<TrainRecord> train(ParamStore<float>& params, const ModelConfig& cfg,
                               const TrainConfig& tcfg, std::span<const SequenceRecord> corpus,
                               const std::function<void(const TrainRecord&)>& on_step) {
  tcfg.validate();
  cfg.validate();
  check_layout(params, cfg);
  if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
  for (const auto& seq : corpus) {
    seq.validate();
    if (seq.size() < 2) throw DataError(seq.name + ": training needs at least 2 frames");
  }
  const std::uint64_t step0 = params.step_count();
  std::mt19937_64 rng(tcfg.seed * 0x9E3779B97F4A7C15ULL + step0);
  std::uniform_int_distribution<std::size_t> pick_seq(0, corpus.size() - 1);

  std::vector<TrainRecord> history;
  history.reserve(tcfg.steps);
  std::vector<Triplet> batch(tcfg.batch_size);
  for (std::size_t k = 0; k < tcfg.steps; ++k) {
    for (auto& tr : batch) {
      const SequenceRecord& seq = corpus[pick_seq(rng)];
      const std::size_t t = std::uniform_int_distribution<std::size_t>(1, seq.size() - 1)(rng);
      tr = sample_triplet(seq, t, cfg, rng);
    }
    TrainRecord rec;
    rec.step = params.step_count();
    rec.lr = tcfg.lr_at(rec.step);
    try {
      rec.loss = train_step(params, cfg, tcfg, batch);
    } catch (const NumericError& e) {
      throw NumericError("step " + std::to_string(rec.step) + ": " + e.what());
    }
    history.push_back(rec);
    if (on_step) on_step(rec);
  }
  return history;
}

}  // namespace amnet
