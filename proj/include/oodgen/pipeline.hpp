#pragma once

#include <functional>
#include <string>
#include <vector>

#include "oodgen/config.hpp"
#include "oodgen/metrics.hpp"
#include "oodgen/types.hpp"

namespace oodgen {

using ConsoleSink = std::function<void(const std::string&)>;

// train: runs the full four-phase procedure and writes vocab.txt,
// classifier.ckpt / generator.ckpt / discriminator.ckpt, config.json and
// train_log.jsonl into cfg.out_dir.
void run_train(const TrainConfig& cfg, const ConsoleSink& console = {});

// generate: loads the trained generator, runs the sample-generate-filter
// loop until `count` accepted sequences exist (count <= 0 means "as many as
// the IND train split") and writes them as generic_tsv to out_path.
void run_generate(const TrainConfig& cfg, int count, const std::string& out_path,
                  const ConsoleSink& console = {});

// evaluate: trains the threshold-based detector on IND train plus the given
// generated-OOD file (ood_path may be empty when cfg.detector.lambda == 0),
// scores the test split and writes the metric report and scores file.
MetricReport run_evaluate(const TrainConfig& cfg, const std::string& ood_path,
                          const std::string& report_path, const std::string& scores_path,
                          const ConsoleSink& console = {});

}  // namespace oodgen
