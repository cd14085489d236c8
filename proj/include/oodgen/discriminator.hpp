#pragma once

#include <vector>

#include <Eigen/Core>

#include "oodgen/nn/gru.hpp"
#include "oodgen/nn/optim.hpp"
#include "oodgen/rng.hpp"
#include "oodgen/types.hpp"

namespace oodgen {

struct DiscriminatorConfig {
  int vocab_size = 0;
  int emb_dim = 300;
  int hidden_dim = 256;  // per direction, per layer
  double lr = 0.1;       // Adagrad
};

// Binary real-vs-generated sequence classifier: embedding -> two-layer
// bidirectional GRU -> tanh projection of the last layer's two final states
// -> sigmoid. Scores depend only on content tokens, so padding (and the
// BOS/EOS framing of encoded examples) never leaks label information.
class Discriminator {
 public:
  Discriminator(const DiscriminatorConfig& cfg, Rng& init_rng);

  const DiscriminatorConfig& config() const { return cfg_; }

  // D(seq) in (0, 1); pure function of the parameters and the sequence.
  double score(const TokenSequence& seq) const;

  // Mean binary cross-entropy with real labeled 1 and fake labeled 0;
  // fills gradients / applies one Adagrad update.
  double bce_loss_and_grad(const std::vector<TokenSequence>& real,
                           const std::vector<TokenSequence>& fake);
  double train_step(const std::vector<TokenSequence>& real,
                    const std::vector<TokenSequence>& fake);

  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  // forward pass for one sequence; returns the pre-sigmoid output and, when
  // training, keeps every intermediate needed for backprop
  struct Trace;
  double forward(const std::vector<TokenId>& content, Trace* trace) const;
  void backward(double dlogit, const Trace& trace);

  DiscriminatorConfig cfg_;
  ParamSet params_;
  Param* emb_;
  GruCell fwd1_, bwd1_;  // layer 1 over embeddings
  GruCell fwd2_, bwd2_;  // layer 2 over layer-1 outputs (2H wide)
  Param* Wh_;            // hidden x 2H head projection
  Param* bh_;
  Param* wout_;          // 1 x hidden
  Param* bout_;
  Adagrad adagrad_;
};

}  // namespace oodgen
