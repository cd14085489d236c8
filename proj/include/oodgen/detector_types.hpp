#pragma once

#include <string>
#include <vector>

namespace oodgen {

// One scored example: score = max class probability, pred_label = argmax
// (ties broken toward the lowest class id), true_label = -1 for OOD rows.
struct DetectionRecord {
  double score = 0.0;
  bool is_ood = false;
  int pred_label = -1;
  int true_label = -1;
};

using DetectionScores = std::vector<DetectionRecord>;

// Line format: score<TAB>is_ood<TAB>pred_label<TAB>true_label.
void save_detection_scores(const std::string& path, const DetectionScores& scores,
                           const std::string& config_hash);
DetectionScores load_detection_scores(const std::string& path);

}  // namespace oodgen
