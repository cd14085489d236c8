#pragma once

#include <vector>

#include <Eigen/Core>

#include "oodgen/nn/gru.hpp"
#include "oodgen/nn/optim.hpp"
#include "oodgen/rewards.hpp"
#include "oodgen/rng.hpp"
#include "oodgen/types.hpp"
#include "oodgen/vocab.hpp"

namespace oodgen {

struct GeneratorConfig {
  int vocab_size = 0;
  int emb_dim = 300;
  int hidden_dim = 256;
  double lr = 1e-3;
  double temperature = 1.0;
};

// Sequences sampled from the generator plus the log-probability of every
// action under the sampling policy. Sequences hold emitted tokens only; the
// BOS start state is implicit. `complete[i]` is true when EOS was emitted
// within the length budget.
struct GenerationBatch {
  std::vector<TokenSequence> sequences;
  std::vector<std::vector<double>> step_log_probs;
  std::vector<char> complete;

  std::size_t size() const { return sequences.size(); }
};

// Single-layer GRU language model over token sequences. Trains by teacher-
// forced NLL (Adam) and by REINFORCE against externally supplied per-step
// rewards. PAD is masked out of the output softmax, so the model can never
// emit padding.
class Generator {
 public:
  Generator(const GeneratorConfig& cfg, Rng& init_rng);

  const GeneratorConfig& config() const { return cfg_; }

  // --- language-model training -------------------------------------------
  // Mean per-token NLL over the batch; fills parameter gradients.
  double nll_loss_and_grad(const std::vector<TokenSequence>& batch);
  // nll_loss_and_grad followed by one Adam update.
  double nll_step(const std::vector<TokenSequence>& batch);
  double mean_nll(const std::vector<TokenSequence>& batch) const;
  double perplexity(const std::vector<TokenSequence>& batch) const;

  // --- sampling ------------------------------------------------------------
  // n sequences sampled autoregressively from BOS. Content is capped at
  // max_len - 2 tokens, mirroring encode()'s BOS/EOS budget.
  GenerationBatch sample(int n, int max_len, Rng& rng) const;

  // k completions of a canonical prefix (BOS + tokens, no EOS) under the
  // current policy. Completions are emitted-token sequences that always end
  // with EOS (forced when the budget runs out), ready for terminal scoring.
  std::vector<TokenSequence> rollout(const TokenSequence& prefix, int k, int max_len,
                                     Rng& rng) const;

  // --- policy gradient -----------------------------------------------------
  // loss = -mean over all (sequence, step) of log_prob * (reward - baseline).
  double reinforce_loss_and_grad(const GenerationBatch& batch,
                                 const std::vector<RewardVector>& rewards, double baseline);
  double reinforce_step(const GenerationBatch& batch, const std::vector<RewardVector>& rewards,
                        double baseline);

  // --- inspection ----------------------------------------------------------
  // Sum of action log-probs of an emitted-token sequence under the policy.
  double sequence_log_prob(const TokenSequence& actions) const;
  // Next-token distribution after consuming a canonical prefix (BOS first).
  Eigen::VectorXd next_token_distribution(const std::vector<TokenId>& prefix) const;

  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  Adam& optimizer() { return adam_; }
  void set_embedding_row(TokenId id, const Eigen::VectorXd& vec);

 private:
  struct ForwardPlan;  // teacher-forced step layout shared by NLL and REINFORCE

  ForwardPlan make_plan(const std::vector<TokenSequence>& batch) const;
  double weighted_nll(const ForwardPlan& plan, bool with_grad);

  // Masked softmax over logits column; PAD gets probability zero.
  Eigen::VectorXd step_distribution(const Eigen::VectorXd& h) const;

  GeneratorConfig cfg_;
  ParamSet params_;
  GruCell cell_;
  Param* emb_;   // vocab x emb
  Param* Wo_;    // vocab x hidden
  Param* bo_;    // vocab x 1
  Adam adam_;
};

// Text-format embedding file: `word v1 ... v<emb_dim>` per line. Returns the
// number of vocabulary tokens that received a pretrained vector.
int load_pretrained_embeddings(const std::string& path, const Vocabulary& vocab,
                               Generator& generator);

}  // namespace oodgen
