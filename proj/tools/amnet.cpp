// amnet: train, track, eval and synth subcommands.

#include <CLI11.hpp>
#include <filesystem>
#include <fmt/core.h>
#include <fmt/os.h>
#include <optional>

#include "amnet/checkpoint.hpp"
#include "amnet/config.hpp"
#include "amnet/errors.hpp"
#include "amnet/eval.hpp"
#include "amnet/model.hpp"
#include "amnet/synth.hpp"
#include "amnet/tracker.hpp"
#include "amnet/train.hpp"

namespace fs = std::filesystem;
using namespace amnet;

namespace {

enum Exit : int { kOk = 0, kOther = 1, kConfig = 2, kNumeric = 3, kCheckpoint = 4, kData = 5 };

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_config(path);
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

int cmd_train(const std::string& config, const fs::path& out, std::optional<std::uint64_t> seed,
              fs::path loss_csv) {
  RunConfig cfg = load_config(config);
  if (seed) cfg.train.seed = *seed;
  if (loss_csv.empty()) loss_csv = fs::path(out).concat(".loss.csv");
  const auto corpus = make_corpus(cfg.corpus);
  ParamStore<float> params = init_params<float>(cfg.model, cfg.train.seed);
  ensure_parent(out);
  ensure_parent(loss_csv);
  auto csv = fmt::output_file(loss_csv.string());
  csv.print("step,lr,loss\n");
  train(params, cfg.model, cfg.train, corpus, [&](const TrainRecord& r) {
    csv.print("{},{},{}\n", r.step, r.lr, r.loss);
    if ((r.step + 1) % 10 == 0) fmt::print("step {} loss {:.6f}\n", r.step + 1, r.loss);
  });
  csv.close();
  save_checkpoint(params, out);
  fmt::print("wrote {} and {}\n", out.string(), loss_csv.string());
  return kOk;
}

int cmd_track(const std::string& config, const fs::path& ckpt, const fs::path& seq_dir,
              const fs::path& out, const fs::path& render) {
  const RunConfig cfg = config_or_default(config);
  const ParamStore<float> params = load_checkpoint(ckpt, cfg.model);
  const SequenceRecord seq = load_otb_sequence(seq_dir);
  AmnetResponse net(cfg.model, params);
  const TrackResult r = track_sequence(net, seq.size(), [&](std::size_t i) { return seq.frame(i); }, seq.gt.at(0));
  ensure_parent(out);
  write_boxes_csv(r.boxes, out);
  if (!render.empty()) {
    fs::create_directories(render);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      Image img = seq.frame(i);
      const BBox& g = seq.gt[i];
      const BBox& b = r.boxes[i];
      draw_rect(img, g.x, g.y, g.w, g.h, {0, 255, 0});
      draw_rect(img, b.x, b.y, b.w, b.h, {255, 0, 0});
      save_image(img, render / fmt::format("{:04d}.png", i + 1));
    }
  }
  fmt::print("{} frames, {} forward calls, {:.2f} ms per forward\n", r.boxes.size(), r.forward_calls,
             r.mean_forward_ms);
  return kOk;
}

void write_report(const OpeResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  write_curves_csv(r.aggregate, dir / "curves.csv");
  write_summary_json(r.aggregate, dir / "summary.json");
  write_sequence_table(r, dir / "sequences.csv");
  fmt::print("{}: precision@20 {:.4f} success AUC {:.4f} fps {:.1f}\n", dir.string(),
             r.aggregate.precision_at_20, r.aggregate.success_auc, r.aggregate.fps);
}

int cmd_eval(const std::string& config, const fs::path& ckpt, fs::path dataset, const fs::path& out,
             bool ablation, const fs::path& anet_ckpt, bool oracle) {
  const RunConfig cfg = config_or_default(config);
  if (dataset.empty()) dataset = cfg.eval.dataset;
  if (dataset.empty()) throw ConfigError("eval.dataset", "no dataset given");
  const auto seqs = load_otb_dataset(dataset, cfg.eval.sequences);
  if (oracle) {
    write_report(ope_evaluate(oracle_track, seqs), out);
    return kOk;
  }
  if (ckpt.empty()) throw ConfigError("--ckpt", "required unless --oracle is given");
  ParamStore<float> params = load_checkpoint(ckpt, cfg.model);
  {
    AmnetResponse net(cfg.model, params);
    write_report(ope_evaluate(network_tracker(net), seqs), ablation ? out / "amnet" : out);
  }
  if (ablation) {
    ParamStore<float> anet = anet_ckpt.empty() ? params : load_checkpoint(anet_ckpt, cfg.model);
    ablate_motion(anet);
    AmnetResponse net(cfg.model, anet);
    write_report(ope_evaluate(network_tracker(net), seqs), out / "anet");
  }
  return kOk;
}

int cmd_synth(const std::string& config, const fs::path& out, std::uint64_t seed, std::size_t count) {
  const RunConfig cfg = load_config(config);
  for (std::size_t i = 0; i < count; ++i) {
    const SynthSequence s = synth_sequence(cfg.corpus.synth, seed + i);
    write_otb_sequence(s.record, count == 1 ? out : out / s.record.name);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AMNet appearance + motion tracker"};
  app.require_subcommand(1);

  std::string config;
  fs::path out, ckpt, seq_dir, dataset, render, anet_ckpt, loss_csv;
  std::optional<std::uint64_t> seed;
  std::uint64_t synth_seed = 0;
  std::size_t count = 1;
  bool ablation = false, oracle = false;

  auto* train_cmd = app.add_subcommand("train", "Train on the synthetic corpus");
  train_cmd->add_option("--config", config, "JSON run config")->required();
  train_cmd->add_option("--out", out, "checkpoint path")->required();
  train_cmd->add_option("--seed", seed, "overrides train.seed");
  train_cmd->add_option("--loss-csv", loss_csv, "default: <out>.loss.csv");

  auto* track_cmd = app.add_subcommand("track", "Track one OTB-layout sequence");
  track_cmd->add_option("--config", config, "JSON run config (model section)");
  track_cmd->add_option("--ckpt", ckpt)->required();
  track_cmd->add_option("--seq", seq_dir, "sequence directory")->required();
  track_cmd->add_option("--out", out, "boxes CSV")->required();
  track_cmd->add_option("--render", render, "write frames with drawn boxes here");

  auto* eval_cmd = app.add_subcommand("eval", "One-pass evaluation over a dataset");
  eval_cmd->add_option("--config", config, "JSON run config (model and eval sections)");
  eval_cmd->add_option("--ckpt", ckpt);
  eval_cmd->add_option("--dataset", dataset, "overrides eval.dataset");
  eval_cmd->add_option("--out", out, "report directory")->required();
  eval_cmd->add_flag("--ablation", ablation, "also report the ANet-only variant");
  eval_cmd->add_option("--anet-ckpt", anet_ckpt, "separately trained checkpoint for the ablation");
  eval_cmd->add_flag("--oracle", oracle, "evaluate the ground-truth echo tracker");

  auto* synth_cmd = app.add_subcommand("synth", "Write synthetic sequences in OTB layout");
  synth_cmd->add_option("--config", config, "JSON run config (synth section)")->required();
  synth_cmd->add_option("--out", out)->required();
  synth_cmd->add_option("--seed", synth_seed)->required();
  synth_cmd->add_option("--count", count, "number of sequences, seeded seed, seed+1, ...")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*train_cmd) return cmd_train(config, out, seed, loss_csv);
    if (*track_cmd) return cmd_track(config, ckpt, seq_dir, out, render);
    if (*eval_cmd) return cmd_eval(config, ckpt, dataset, out, ablation, anet_ckpt, oracle);
    return cmd_synth(config, out, synth_seed, count);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfig;
  } catch (const NumericError& e) {
    fmt::print(stderr, "numeric error: {}\n", e.what());
    return kNumeric;
  } catch (const CheckpointError& e) {
    fmt::print(stderr, "checkpoint error: {}\n", e.what());
    return kCheckpoint;
  } catch (const DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kData;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kOther;
  }
}
