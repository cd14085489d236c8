#pragma once

#include <string>

#include "oodgen/detector_types.hpp"

namespace oodgen {

// Self-contained SVG figures (no plotting dependency, byte-stable output).

// Overlaid IND vs OOD histograms of detection scores, 20 bins over [0, 1].
void plot_score_histogram(const std::string& path, const DetectionScores& scores,
                          const std::string& config_hash);

// Joint accuracy against threshold, with the maximizing threshold marked.
void plot_threshold_curve(const std::string& path, const DetectionScores& scores,
                          const std::string& config_hash);

}  // namespace oodgen
