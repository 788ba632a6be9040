#include "amnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "amnet/errors.hpp"
#include "amnet/model.hpp"

namespace amnet {
namespace {

constexpr char kMagic[4] = {'A', 'M', 'N', 'T'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  template <typename U>
  U le(const char* what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(b_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  [[nodiscard]] std::size_t pos() const { return pos_; }
  [[nodiscard]] bool done() const { return pos_ == b_.size(); }
  void set_context(std::string c) { context_ = std::move(c); }
  [[noreturn]] void fail(const std::string& msg) const {
    throw CheckpointError("checkpoint byte " + std::to_string(pos_) + context_ + ": " + msg);
  }

 private:
  void need(std::size_t n, const char* what) const {
    if (b_.size() - pos_ < n) {
      fail(std::string("truncated while reading ") + what + " (need " + std::to_string(n) + " bytes, " +
           std::to_string(b_.size() - pos_) + " left)");
    }
  }

  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
  std::string context_;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const ParamStore<float>& params) {
  Writer w;
  w.bytes(kMagic, 4);
  w.le<std::uint32_t>(kCheckpointVersion);
  w.le<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, e] : params) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw CheckpointError("parameter name too long: " + name.substr(0, 32) + "...");
    }
    w.le<std::uint16_t>(static_cast<std::uint16_t>(name.size()));
    w.bytes(name.data(), name.size());
    const Dims d = e.value.dims();
    w.le<std::uint8_t>(4);
    for (std::size_t v : {d.n, d.c, d.h, d.w}) w.le<std::uint32_t>(static_cast<std::uint32_t>(v));
    for (float v : e.value.data()) w.le<std::uint32_t>(std::bit_cast<std::uint32_t>(v));
  }
  return w.take();
}

ParamStore<float> parse_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) r.fail("bad magic (not an AMNT checkpoint)");
  const auto version = r.le<std::uint32_t>("version");
  if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version));
  const auto count = r.le<std::uint32_t>("parameter count");
  ParamStore<float> out;
  for (std::uint32_t p = 0; p < count; ++p) {
    r.set_context(" (parameter #" + std::to_string(p) + ")");
    const auto len = r.le<std::uint16_t>("name length");
    const auto raw = r.take(len, "name");
    const std::string name(raw.begin(), raw.end());
    r.set_context(" (parameter " + name + ")");
    const auto ndim = r.le<std::uint8_t>("ndim");
    if (ndim == 0 || ndim > 4) r.fail("unsupported rank " + std::to_string(ndim));
    std::size_t dims[4] = {1, 1, 1, 1};
    std::uint64_t count_elems = 1;
    for (std::size_t i = 0; i < ndim; ++i) {
      dims[4 - ndim + i] = r.le<std::uint32_t>("dims");
      count_elems *= dims[4 - ndim + i];
    }
    if (count_elems > bytes.size()) r.fail("dims exceed file size");
    Tensor<float> t(dims[0], dims[1], dims[2], dims[3]);
    const auto payload = r.take(t.size() * 4, "values");
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::uint32_t u = 0;
      for (std::size_t k = 0; k < 4; ++k) u |= static_cast<std::uint32_t>(payload[i * 4 + k]) << (8 * k);
      t[i] = std::bit_cast<float>(u);
    }
    if (out.contains(name)) r.fail("duplicate parameter");
    out.add(name, std::move(t));
  }
  r.set_context("");
  if (!r.done()) r.fail("trailing bytes after last parameter");
  return out;
}

void save_checkpoint(const ParamStore<float>& params, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(params);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CheckpointError("failed writing " + path.string());
}

ParamStore<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return parse_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

ParamStore<float> load_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg) {
  ParamStore<float> p = load_checkpoint(path);
  try {
    check_layout(p, cfg);
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(path.string() + ": architecture mismatch: " + e.what());
  }
  return p;
}

}  // namespace amnet
