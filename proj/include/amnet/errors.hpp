#pragma once

#include <stdexcept>
#include <string>

namespace amnet {

/// Unreadable or malformed input data (images, sequences, annotations).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Corrupt, truncated or mismatched checkpoint.
struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite values during training or inference.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration; `path` names the offending field.
struct ConfigError : std::runtime_error {
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  [[nodiscard]] const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace amnet
