#include "oodgen/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace oodgen {

using nlohmann::json;

namespace {

[[noreturn]] void bad_field(const std::string& where, const std::string& what) {
  throw std::invalid_argument("config: field '" + where + "': " + what);
}

// Pulls `key` out of `j`, enforcing presence for required fields and marking
// the key as consumed so leftovers can be reported.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {}

  template <typename T>
  void get(const char* key, T& out, bool required = false) {
    seen_.insert(key);
    if (!j_.contains(key)) {
      if (required) bad_field(name_ + "." + key, "missing required field");
      return;
    }
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      bad_field(name_ + "." + key, "wrong type");
    }
  }

  json sub(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return json::object();
    if (!j_.at(key).is_object()) bad_field(name_ + "." + key, "expected an object");
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) bad_field(name_ + "." + it.key(), "unknown field");
    }
  }

 private:
  const json j_;  // by value: sub() hands out temporaries
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

FilterConfig TrainConfig::filter_config() const {
  FilterConfig fc;
  fc.metric = similarity_metric_from_string(filter.metric);
  fc.threshold = filter.threshold;
  fc.dedupe = filter.dedupe;
  return fc;
}

TrainConfig TrainConfig::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

TrainConfig TrainConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }
  TrainConfig c;
  Section root(j, "");
  root.get("seed", c.seed, /*required=*/true);
  root.get("out_dir", c.out_dir);

  {
    Section s(root.sub("data"), "data");
    std::string format = "generic_tsv";
    s.get("path", c.data.path, /*required=*/true);
    s.get("format", format);
    s.get("max_len", c.data.max_len);
    s.get("min_count", c.data.min_count);
    s.finish();
    c.data.format = dataset_format_from_string(format);
    if (c.data.max_len < 3) bad_field("data.max_len", "must be >= 3");
    if (c.data.min_count < 1) bad_field("data.min_count", "must be >= 1");
  }
  {
    Section s(root.sub("generator"), "generator");
    s.get("emb_dim", c.generator.emb_dim);
    s.get("hidden_dim", c.generator.hidden_dim);
    s.get("lr", c.generator.lr);
    s.get("temperature", c.generator.temperature);
    s.get("embeddings_path", c.generator.embeddings_path);
    s.finish();
  }
  {
    Section s(root.sub("discriminator"), "discriminator");
    s.get("emb_dim", c.discriminator.emb_dim);
    s.get("hidden_dim", c.discriminator.hidden_dim);
    s.get("lr", c.discriminator.lr);
    s.finish();
  }
  {
    Section s(root.sub("classifier"), "classifier");
    s.get("emb_dim", c.classifier.emb_dim);
    s.get("filters_per_width", c.classifier.filters_per_width);
    s.get("dense_dim", c.classifier.dense_dim);
    s.get("dropout", c.classifier.dropout);
    s.get("leaky_slope", c.classifier.leaky_slope);
    s.get("lr", c.classifier.lr);
    s.finish();
  }
  {
    Section s(root.sub("pretrain"), "pretrain");
    s.get("batch_size", c.pretrain.batch_size);
    s.get("classifier_max_epochs", c.pretrain.classifier_max_epochs);
    s.get("generator_max_epochs", c.pretrain.generator_max_epochs);
    s.get("patience", c.pretrain.patience);
    s.get("discriminator_epochs", c.pretrain.discriminator_epochs);
    s.finish();
  }
  {
    Section s(root.sub("adversarial"), "adversarial");
    s.get("epochs", c.adversarial.epochs);
    s.get("batch_size", c.adversarial.batch_size);
    s.get("rollout_k", c.adversarial.rollout_k);
    s.get("reward_attribution", c.adversarial.reward_attribution);
    s.get("baseline_window", c.adversarial.baseline_window);
    s.get("collapse_duplicate_fraction", c.adversarial.collapse_duplicate_fraction);
    s.get("eval_every", c.adversarial.eval_every);
    s.get("eval_patience", c.adversarial.eval_patience);
    s.finish();
    if (c.adversarial.reward_attribution != "rollout" &&
        c.adversarial.reward_attribution != "terminal_only")
      bad_field("adversarial.reward_attribution", "must be 'rollout' or 'terminal_only'");
    if (c.adversarial.rollout_k < 1) bad_field("adversarial.rollout_k", "must be >= 1");
  }
  {
    Section s(root.sub("filter"), "filter");
    s.get("metric", c.filter.metric);
    s.get("threshold", c.filter.threshold);
    s.get("dedupe", c.filter.dedupe);
    s.get("max_rounds", c.filter.max_rounds);
    s.finish();
    similarity_metric_from_string(c.filter.metric);  // validates
    if (c.filter.threshold < 0.0 || c.filter.threshold > 1.0)
      bad_field("filter.threshold", "must be in [0, 1]");
  }
  {
    Section s(root.sub("detector"), "detector");
    s.get("lambda", c.detector.lambda);
    s.get("batch_size", c.detector.batch_size);
    s.get("max_epochs", c.detector.max_epochs);
    s.get("patience", c.detector.patience);
    s.get("val_ood_fraction", c.detector.val_ood_fraction);
    s.finish();
    if (c.detector.lambda < 0.0) bad_field("detector.lambda", "must be >= 0");
  }
  root.finish();

  for (const auto& [name, v] :
       {std::pair<const char*, int>{"pretrain.batch_size", c.pretrain.batch_size},
        {"adversarial.batch_size", c.adversarial.batch_size},
        {"detector.batch_size", c.detector.batch_size},
        {"adversarial.epochs", c.adversarial.epochs},
        {"pretrain.discriminator_epochs", c.pretrain.discriminator_epochs}}) {
    if (v < 1) bad_field(name, "must be >= 1");
  }
  return c;
}

std::string TrainConfig::to_json_text() const {
  json j;
  j["seed"] = seed;
  j["out_dir"] = out_dir;
  j["data"] = {{"path", data.path},
               {"format", data.format == DatasetFormat::generic_tsv  ? "generic_tsv"
                          : data.format == DatasetFormat::rostd_tsv ? "rostd_tsv"
                                                                    : "osq_json"},
               {"max_len", data.max_len},
               {"min_count", data.min_count}};
  j["generator"] = {{"emb_dim", generator.emb_dim},
                    {"hidden_dim", generator.hidden_dim},
                    {"lr", generator.lr},
                    {"temperature", generator.temperature},
                    {"embeddings_path", generator.embeddings_path}};
  j["discriminator"] = {{"emb_dim", discriminator.emb_dim},
                        {"hidden_dim", discriminator.hidden_dim},
                        {"lr", discriminator.lr}};
  j["classifier"] = {{"emb_dim", classifier.emb_dim},
                     {"filters_per_width", classifier.filters_per_width},
                     {"dense_dim", classifier.dense_dim},
                     {"dropout", classifier.dropout},
                     {"leaky_slope", classifier.leaky_slope},
                     {"lr", classifier.lr}};
  j["pretrain"] = {{"batch_size", pretrain.batch_size},
                   {"classifier_max_epochs", pretrain.classifier_max_epochs},
                   {"generator_max_epochs", pretrain.generator_max_epochs},
                   {"patience", pretrain.patience},
                   {"discriminator_epochs", pretrain.discriminator_epochs}};
  j["adversarial"] = {{"epochs", adversarial.epochs},
                      {"batch_size", adversarial.batch_size},
                      {"rollout_k", adversarial.rollout_k},
                      {"reward_attribution", adversarial.reward_attribution},
                      {"baseline_window", adversarial.baseline_window},
                      {"collapse_duplicate_fraction", adversarial.collapse_duplicate_fraction},
                      {"eval_every", adversarial.eval_every},
                      {"eval_patience", adversarial.eval_patience}};
  j["filter"] = {{"metric", filter.metric},
                 {"threshold", filter.threshold},
                 {"dedupe", filter.dedupe},
                 {"max_rounds", filter.max_rounds}};
  j["detector"] = {{"lambda", detector.lambda},
                   {"batch_size", detector.batch_size},
                   {"max_epochs", detector.max_epochs},
                   {"patience", detector.patience},
                   {"val_ood_fraction", detector.val_ood_fraction}};
  return j.dump(2);
}

std::uint64_t TrainConfig::hash() const {
  const std::string text = to_json_text();
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string TrainConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

}  // namespace oodgen
