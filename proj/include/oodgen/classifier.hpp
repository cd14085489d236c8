#pragma once

#include <vector>

#include <Eigen/Core>

#include "oodgen/nn/optim.hpp"
#include "oodgen/nn/params.hpp"
#include "oodgen/rng.hpp"
#include "oodgen/types.hpp"

namespace oodgen {

struct ClassifierConfig {
  int vocab_size = 0;
  int num_classes = 0;
  int emb_dim = 300;
  std::vector<int> filter_widths{2, 3, 4, 5};
  int filters_per_width = 256;
  int dense_dim = 256;
  double dropout = 0.5;
  double leaky_slope = 0.01;
  double lr = 1e-4;  // Adam
};

// -sum_i p_i ln p_i, with 0 * ln 0 taken as 0.
double shannon_entropy(const Eigen::VectorXd& p);

// Convolutional sentence classifier: embedding -> parallel filter banks over
// widths 2..5 -> LeakyReLU -> max-over-time pooling -> dropout -> dense ->
// LeakyReLU -> dropout -> softmax over intent classes. Inputs shorter than
// the widest filter are padded with PAD up to that width.
//
// Doubles as the OOD detector: detector_loss_and_grad combines cross-entropy
// on labeled IND batches with a weighted negative-entropy term on unlabeled
// OOD batches. With lambda == 0 it takes exactly the plain classifier path
// (same arithmetic, same RNG consumption).
class CnnClassifier {
 public:
  CnnClassifier(const ClassifierConfig& cfg, Rng& init_rng);

  const ClassifierConfig& config() const { return cfg_; }

  // Evaluation mode (dropout off); valid probability vector over m classes.
  Eigen::VectorXd predict(const TokenSequence& seq) const;

  // Shannon entropy of predict(seq); in [0, ln m].
  double entropy_reward(const TokenSequence& seq) const;

  int predicted_label(const TokenSequence& seq) const;  // ties -> lowest id

  // Mean cross-entropy over the batch; dropout active when rng != nullptr.
  double ce_loss_and_grad(const std::vector<LabeledExample>& batch, Rng* dropout_rng);
  // ce_loss_and_grad + one Adam update.
  double train_step(const std::vector<LabeledExample>& batch, Rng& dropout_rng);

  // mean over ood of sum_i p_i ln p_i (the negative entropy).
  double neg_entropy_loss_and_grad(const std::vector<TokenSequence>& ood, Rng* dropout_rng);

  // CE(ind) + lambda * negative-entropy(ood); the ood batch is not touched
  // when lambda == 0.
  double detector_loss_and_grad(const std::vector<LabeledExample>& ind,
                                const std::vector<TokenSequence>& ood, double lambda,
                                Rng* dropout_rng);
  double detector_step(const std::vector<LabeledExample>& ind,
                       const std::vector<TokenSequence>& ood, double lambda, Rng& dropout_rng);

  double accuracy(const std::vector<LabeledExample>& data) const;

  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }
  Adam& optimizer() { return adam_; }

 private:
  struct Trace;
  // Returns per-class log-probabilities; trace captured when non-null.
  Eigen::VectorXd forward(const TokenSequence& seq, Rng* dropout_rng, Trace* trace) const;
  // dlogp = dLoss/dlogits expressed via softmax backward inputs; see .cpp
  void backward(const Eigen::VectorXd& dlogits, const Trace& trace);

  ClassifierConfig cfg_;
  ParamSet params_;
  Param* emb_;
  std::vector<Param*> filters_;       // per width: nf x (w * emb)
  std::vector<Param*> filter_bias_;   // per width: nf x 1
  Param *W1_, *b1_, *W2_, *b2_;
  Adam adam_;
};

}  // namespace oodgen
