#include "amnet/config.hpp"

#include <array>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "amnet/errors.hpp"

namespace amnet {

namespace {

using json = nlohmann::json;

// Reads fields out of one JSON object, remembering which keys were consumed
// so leftovers can be reported.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_, "expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key), std::string("expected ") + expected<T>() + ", got " + it->dump());
    }
  }

  void get_size(const char* key, std::size_t& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    if (!it->is_number_integer() || it->get<long long>() < 0) {
      throw ConfigError(field(key), "expected a non-negative integer, got " + it->dump());
    }
    out = it->get<std::size_t>();
  }

  void get_sizes(const char* key, std::vector<std::size_t>& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    if (!it->is_array()) throw ConfigError(field(key), "expected an array, got " + it->dump());
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& e = (*it)[i];
      if (!e.is_number_integer() || e.get<long long>() < 0) {
        throw ConfigError(field(key) + "[" + std::to_string(i) + "]",
                          "expected a non-negative integer, got " + e.dump());
      }
      v.push_back(e.get<std::size_t>());
    }
    out = std::move(v);
  }

  void get_pair(const char* key, std::optional<std::array<double, 2>>& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
      throw ConfigError(field(key), "expected [x, y], got " + it->dump());
    }
    out = std::array<double, 2>{(*it)[0].get<double>(), (*it)[1].get<double>()};
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) throw ConfigError(field(k.c_str()), "unknown field");
    }
  }

  [[nodiscard]] std::string field(const char* key) const { return path_ + "." + key; }
  [[nodiscard]] const std::string& path() const { return path_; }

 private:
  template <typename T>
  static const char* expected() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_same_v<T, std::string>) return "a string";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a list of strings";
  }

  const json& obj_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

// Runs a validate() that reports "field: message" and rethrows as ConfigError.
void validated(const std::string& section, const std::function<void()>& validate) {
  try {
    validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    if (colon == std::string::npos) throw ConfigError(section, msg);
    throw ConfigError(section + "." + msg.substr(0, colon), msg.substr(colon + 2));
  }
}

void read_model(Section s, ModelConfig& m) {
  s.get_size("template_size", m.template_size);
  s.get_size("roi_size", m.roi_size);
  s.get_sizes("spotlight_kernels", m.spotlight_kernels);
  s.get_sizes("contrast_kernels", m.contrast_kernels);
  s.get_sizes("pool_kernels", m.pool_kernels);
  s.get("gt_sigma_factor", m.gt_sigma_factor);
  s.get("mnet_luminance", m.mnet_luminance);
  s.finish();
}

void read_train(Section s, TrainConfig& t) {
  s.get_size("batch_size", t.batch_size);
  s.get("lr_start", t.lr_start);
  s.get("lr_end", t.lr_end);
  s.get_size("lr_step", t.lr_step);
  s.get("weight_decay", t.weight_decay);
  s.get("beta1", t.beta1);
  s.get("beta2", t.beta2);
  s.get("eps", t.eps);
  s.get_size("steps", t.steps);
  s.get("seed", t.seed);
  s.finish();
}

void read_synth(Section s, CorpusConfig& c) {
  SynthConfig& y = c.synth;
  s.get_size("frame_width", y.frame_width);
  s.get_size("frame_height", y.frame_height);
  s.get_size("target_size", y.target_size);
  s.get_size("num_frames", y.num_frames);
  s.get("speed_min", y.speed_min);
  s.get("speed_max", y.speed_max);
  s.get_pair("velocity", y.velocity);
  s.get_pair("start", y.start);
  s.get("position_jitter", y.position_jitter);
  s.get("camera_jitter", y.camera_jitter);
  s.get_size("occlusion_length", y.occlusion_length);
  s.get_size("occlusion_count", y.occlusion_count);
  s.get_size("sequences", c.sequences);
  s.get("seed", c.seed);
  s.finish();
}

void read_eval(Section s, EvalConfig& e) {
  std::string root = e.dataset.string();
  s.get("dataset", root);
  e.dataset = root;
  s.get("sequences", e.sequences);
  s.finish();
}

json pair_json(const std::optional<std::array<double, 2>>& p) {
  return p ? json::array({(*p)[0], (*p)[1]}) : json(nullptr);
}

}  // namespace

std::vector<SequenceRecord> make_corpus(const CorpusConfig& cfg) {
  std::vector<SequenceRecord> out;
  out.reserve(cfg.sequences);
  for (std::size_t i = 0; i < cfg.sequences; ++i) out.push_back(synth_sequence(cfg.synth, cfg.seed + i).record);
  return out;
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  RunConfig cfg;
  if (!doc.is_object()) throw ConfigError("<document>", "expected a JSON object");
  static const std::map<std::string, int> kSections{{"model", 0}, {"train", 1}, {"synth", 2}, {"eval", 3}};
  for (const auto& [key, value] : doc.items()) {
    const auto it = kSections.find(key);
    if (it == kSections.end()) throw ConfigError(key, "unknown section");
    switch (it->second) {
      case 0: read_model(Section(value, key), cfg.model); break;
      case 1: read_train(Section(value, key), cfg.train); break;
      case 2: read_synth(Section(value, key), cfg.corpus); break;
      default: read_eval(Section(value, key), cfg.eval); break;
    }
  }
  validated("model", [&] { cfg.model.validate(); });
  if (cfg.model.roi_size != 3 * cfg.model.template_size) {
    throw ConfigError("model.roi_size", "must be 3 x template_size (" +
                                            std::to_string(3 * cfg.model.template_size) + "), got " +
                                            std::to_string(cfg.model.roi_size));
  }
  validated("train", [&] { cfg.train.validate(); });
  validated("synth", [&] { cfg.corpus.synth.validate(); });
  if (cfg.corpus.sequences == 0) throw ConfigError("synth.sequences", "must be positive");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot read config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.path(), std::string(e.what()).substr(e.path().size() + 2));
  }
}

std::string dump_config(const RunConfig& cfg) {
  const ModelConfig& m = cfg.model;
  const TrainConfig& t = cfg.train;
  const SynthConfig& y = cfg.corpus.synth;
  json doc;
  doc["model"] = {{"template_size", m.template_size},       {"roi_size", m.roi_size},
                  {"spotlight_kernels", m.spotlight_kernels}, {"contrast_kernels", m.contrast_kernels},
                  {"pool_kernels", m.pool_kernels},         {"gt_sigma_factor", m.gt_sigma_factor},
                  {"mnet_luminance", m.mnet_luminance}};
  doc["train"] = {{"batch_size", t.batch_size}, {"lr_start", t.lr_start}, {"lr_end", t.lr_end},
                  {"lr_step", t.lr_step},       {"weight_decay", t.weight_decay},
                  {"beta1", t.beta1},           {"beta2", t.beta2},
                  {"eps", t.eps},               {"steps", t.steps},
                  {"seed", t.seed}};
  doc["synth"] = {{"frame_width", y.frame_width},
                  {"frame_height", y.frame_height},
                  {"target_size", y.target_size},
                  {"num_frames", y.num_frames},
                  {"speed_min", y.speed_min},
                  {"speed_max", y.speed_max},
                  {"velocity", pair_json(y.velocity)},
                  {"start", pair_json(y.start)},
                  {"position_jitter", y.position_jitter},
                  {"camera_jitter", y.camera_jitter},
                  {"occlusion_length", y.occlusion_length},
                  {"occlusion_count", y.occlusion_count},
                  {"sequences", cfg.corpus.sequences},
                  {"seed", cfg.corpus.seed}};
  doc["eval"] = {{"dataset", cfg.eval.dataset.string()}, {"sequences", cfg.eval.sequences}};
  return doc.dump(2) + "\n";
}

}  // namespace amnet
