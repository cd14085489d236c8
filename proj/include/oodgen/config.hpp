#pragma once

#include <cstdint>
#include <string>

#include "oodgen/dataset.hpp"
#include "oodgen/filter.hpp"

namespace oodgen {

// Single configuration file driving every pipeline phase. The seed is
// mandatory: there is no wall-clock fallback, so a config fully determines
// a run.
struct TrainConfig {
  std::uint64_t seed = 0;

  struct Data {
    std::string path;
    DatasetFormat format = DatasetFormat::generic_tsv;
    int max_len = 28;  // tokens including BOS/EOS
    int min_count = 1;
  } data;

  struct GeneratorCfg {
    int emb_dim = 300;
    int hidden_dim = 256;
    double lr = 1e-3;
    double temperature = 1.0;
    std::string embeddings_path;  // optional pretrained vectors
  } generator;

  struct DiscriminatorCfg {
    int emb_dim = 300;
    int hidden_dim = 256;
    double lr = 0.1;
  } discriminator;

  struct ClassifierCfg {
    int emb_dim = 300;
    int filters_per_width = 256;
    int dense_dim = 256;
    double dropout = 0.5;
    double leaky_slope = 0.01;
    double lr = 1e-4;
  } classifier;

  struct Pretrain {
    int batch_size = 32;
    int classifier_max_epochs = 100;
    int generator_max_epochs = 100;
    int patience = 5;
    int discriminator_epochs = 3;
  } pretrain;

  struct Adversarial {
    int epochs = 30;
    int batch_size = 32;
    int rollout_k = 16;
    std::string reward_attribution = "rollout";  // or "terminal_only"
    int baseline_window = 100;                   // batches in the reward running mean
    double collapse_duplicate_fraction = 0.9;
    int eval_every = 5;  // downstream FPR95 probe cadence; 0 disables
    int eval_patience = 2;
  } adversarial;

  struct Filtering {
    std::string metric = "jaccard";
    double threshold = 0.8;
    bool dedupe = true;
    int max_rounds = 20;
  } filter;

  struct Detector {
    double lambda = 1.0;
    int batch_size = 32;
    int max_epochs = 100;
    int patience = 5;
    double val_ood_fraction = 0.1;
  } detector;

  std::string out_dir = "out";

  FilterConfig filter_config() const;

  // Strict parse: unknown or missing-required fields raise an error naming
  // the field.
  static TrainConfig from_json_file(const std::string& path);
  static TrainConfig from_json_text(const std::string& text);
  std::string to_json_text() const;

  // FNV-1a of the canonical serialization; embedded in output artifacts.
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

}  // namespace oodgen
