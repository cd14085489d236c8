#pragma once

#include <string>
#include <vector>

#include "oodgen/detector_types.hpp"

namespace oodgen {

// OOD is the positive class throughout; the detection statistic is oriented
// so that a LOWER max-probability score means MORE OOD.

// Probability that a random OOD record ranks more-OOD than a random IND
// record, ties counted 1/2 (Mann-Whitney).
double auroc(const DetectionScores& scores);

// Area under precision-recall with OOD positive; step-wise summation
// (precision at each achieved recall level times the recall increment).
double aupr(const DetectionScores& scores);

// Minimum false-positive rate over thresholds reaching TPR >= target_tpr.
double fpr_at_tpr(const DetectionScores& scores, double target_tpr);

// Fraction of IND records whose predicted label matches the true label;
// threshold-independent.
double ind_accuracy(const DetectionScores& scores);

// Per threshold: correct = OOD with score < t, plus IND with score >= t and
// a correct argmax. Joint accuracy = correct / total.
std::vector<std::pair<double, double>> joint_accuracy_curve(const DetectionScores& scores,
                                                            const std::vector<double>& thresholds);

struct MetricReport {
  double auroc = 0.0;
  double aupr = 0.0;
  double fpr95 = 0.0;
  double fpr90 = 0.0;
  double ind_acc = 0.0;
};

MetricReport compute_metric_report(const DetectionScores& scores);

// Flat `key<TAB>value` text file plus a JSON twin next to it (.json appended).
void write_metric_report(const std::string& path, const MetricReport& report,
                         const std::string& config_hash);

}  // namespace oodgen
