#pragma once

#include <vector>

#include "oodgen/classifier.hpp"
#include "oodgen/detector_types.hpp"
#include "oodgen/rng.hpp"
#include "oodgen/types.hpp"

namespace oodgen {

struct DetectorTrainConfig {
  double lambda = 1.0;        // weight of the negative-entropy term
  int batch_size = 32;
  int max_epochs = 100;
  int patience = 5;           // epochs without improvement before stopping
  double val_ood_fraction = 0.1;  // tail share of the OOD corpus held out
};

struct FitResult {
  int epochs_run = 0;
  int best_epoch = 0;
  double best_metric = 0.0;  // val accuracy (lambda == 0) or -joint objective
  double final_train_loss = 0.0;
};

// Trains `model` with cross-entropy on IND batches and, when lambda > 0, the
// negative-entropy loss on OOD batches interleaved 1:1 per optimization step.
// Early stops on the validation joint objective (plain validation accuracy
// when lambda == 0, which makes lambda == 0 bit-identical to classifier
// pretraining under the same seed). Restores the best epoch's parameters.
FitResult train_detector(CnnClassifier& model, const std::vector<LabeledExample>& train_ind,
                         const std::vector<LabeledExample>& valid_ind,
                         const std::vector<TokenSequence>& ood, const DetectorTrainConfig& cfg,
                         Rng& rng);

// One record per input, IND examples first (in order), then OOD.
DetectionScores score_dataset(const CnnClassifier& model,
                              const std::vector<LabeledExample>& ind,
                              const std::vector<TokenSequence>& ood);

struct ThresholdChoice {
  double threshold = 0.0;
  double joint_accuracy = 0.0;
};

// Maximizes joint accuracy over a grid of candidate thresholds (0, every
// distinct score, every midpoint between adjacent distinct scores, 1, and one
// value above the maximum). Midpoints win ties, then larger thresholds.
ThresholdChoice select_threshold(const DetectionScores& validation);

}  // namespace oodgen
