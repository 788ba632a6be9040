#pragma once

// JSON run configuration: model, train, synth and eval sections. Every
// section and field is optional; absent ones keep their defaults. Unknown
// keys and type mismatches raise ConfigError naming the field path.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "amnet/network.hpp"
#include "amnet/synth.hpp"
#include "amnet/train.hpp"

namespace amnet {

/// Synthetic training corpus: `sequences` generator runs seeded seed, seed+1, ...
struct CorpusConfig {
  SynthConfig synth;
  std::size_t sequences = 16;
  std::uint64_t seed = 1000;
};

struct EvalConfig {
  std::filesystem::path dataset;
  std::vector<std::string> sequences;  ///< empty: every sequence under `dataset`
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  CorpusConfig corpus;
  EvalConfig eval;
};

/// Generates the training corpus in memory.
std::vector<SequenceRecord> make_corpus(const CorpusConfig& cfg);

/// Throws ConfigError.
RunConfig parse_config(const std::string& json_text);
/// Throws ConfigError for an unreadable file (path "<file>") or bad content.
RunConfig load_config(const std::filesystem::path& path);
/// Round-trips through parse_config.
std::string dump_config(const RunConfig& cfg);

}  // namespace amnet
