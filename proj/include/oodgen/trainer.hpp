#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "oodgen/classifier.hpp"
#include "oodgen/config.hpp"
#include "oodgen/dataset.hpp"
#include "oodgen/detector.hpp"
#include "oodgen/discriminator.hpp"
#include "oodgen/filter.hpp"
#include "oodgen/generator.hpp"
#include "oodgen/rewards.hpp"
#include "oodgen/rng.hpp"

namespace oodgen {

// Generator emitted (nearly) the same sequence for a whole batch; training
// halts rather than filling the OOD corpus with one utterance.
struct CollapseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Running mean over the last `window` batch-level rewards; the REINFORCE
// baseline.
class RunningMean {
 public:
  explicit RunningMean(int window) : window_(window) {}
  void push(double v) {
    values_.push_back(v);
    if (static_cast<int>(values_.size()) > window_) values_.pop_front();
  }
  double mean() const {
    if (values_.empty()) return 0.0;
    double s = 0.0;
    for (double v : values_) s += v;
    return s / static_cast<double>(values_.size());
  }

 private:
  int window_;
  std::deque<double> values_;
};

struct AdversarialEpochStats {
  int epoch = 0;
  int batches = 0;
  int generator_updates = 0;
  int discriminator_updates = 0;
  double policy_loss_disc = 0.0;     // step (a)
  double policy_loss_entropy = 0.0;  // step (b)
  double disc_loss = 0.0;            // step (c)
  double mean_disc_reward = 0.0;
  double mean_entropy_reward = 0.0;
  double max_duplicate_fraction = 0.0;
};

// Orchestrates the training procedure:
//   1. train the auxiliary intent classifier to convergence,
//   2. train the generator as a language model to convergence,
//   3. pretrain the discriminator on real vs sampled data,
//   4. adversarial epochs with three optimization steps per batch:
//      (a) REINFORCE on discriminator rewards, (b) REINFORCE on classifier
//      entropy rewards, (c) discriminator update. The two reward sources are
//      alternated, never summed. The classifier stays frozen.
class Trainer {
 public:
  using LogSink = std::function<void(const std::string& jsonl)>;

  Trainer(const TrainConfig& cfg, LoadedData data);

  FitResult pretrain_classifier();
  FitResult pretrain_generator();
  double pretrain_discriminator();
  AdversarialEpochStats adversarial_epoch();

  // Runs all four phases, with the optional downstream-FPR95 probe every
  // cfg.adversarial.eval_every epochs deciding early stopping.
  void run(const LogSink& sink = {});

  // Per-timestep rewards via Monte Carlo rollouts: positions before the last
  // take the mean terminal score of k policy completions of their prefix;
  // the last position is scored directly. With reward_attribution ==
  // "terminal_only", classifier entropy rewards instead apply the terminal
  // score uniformly to every step.
  std::vector<RewardVector> compute_rewards(const GenerationBatch& batch, RewardSource source,
                                            int k);

  Generator& generator() { return *generator_; }
  Discriminator& discriminator() { return *discriminator_; }
  CnnClassifier& classifier() { return *classifier_; }
  const LoadedData& data() const { return data_; }
  const TrainConfig& config() const { return cfg_; }
  Rng& rng() { return train_rng_; }

  bool classifier_pretrained() const { return classifier_pretrained_; }
  bool generator_pretrained() const { return generator_pretrained_; }
  bool discriminator_pretrained() const { return discriminator_pretrained_; }

  // Fraction of non-unique sequences in a sampled batch (1 - unique/total).
  static double duplicate_fraction(const GenerationBatch& batch);

 private:
  double downstream_fpr95_probe();
  void check_collapse(const GenerationBatch& batch) const;
  std::vector<TokenSequence> train_sequences() const;

  TrainConfig cfg_;
  LoadedData data_;
  Rng train_rng_;
  std::unique_ptr<Generator> generator_;
  std::unique_ptr<Discriminator> discriminator_;
  std::unique_ptr<CnnClassifier> classifier_;
  RunningMean disc_baseline_;
  RunningMean entropy_baseline_;
  int adv_epochs_done_ = 0;
  bool classifier_pretrained_ = false;
  bool generator_pretrained_ = false;
  bool discriminator_pretrained_ = false;
};

// Sample-generate-filter loop: repeats until `quota` accepted OOD sequences
// exist or `max_rounds` is hit (then throws with the rejection report).
// Rejection rules match filter_generated: exact duplicates (also across
// rounds), items at least cfg.threshold-similar to an IND utterance, and
// empty generations.
std::vector<TokenSequence> generate_filtered_ood(Generator& generator,
                                                 const std::vector<std::vector<TokenId>>& ind_content,
                                                 int quota, const FilterConfig& cfg,
                                                 int max_rounds, int max_len, Rng& rng,
                                                 FilterReport* report_out = nullptr);

}  // namespace oodgen
