#include "oodgen/pipeline.hpp"

#include <filesystem>
#include <fstream>

#include "oodgen/checkpoint.hpp"
#include "oodgen/detector.hpp"
#include "oodgen/text.hpp"
#include "oodgen/trainer.hpp"

namespace oodgen {

namespace fs = std::filesystem;

namespace {

void say(const ConsoleSink& console, const std::string& msg) {
  if (console) console(msg);
}

std::vector<TokenSequence> load_ood_tsv(const std::string& path, const Vocabulary& vocab,
                                        int max_len) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("evaluate: cannot open OOD file " + path);
  std::vector<TokenSequence> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("evaluate: " + path + ":" + std::to_string(line_no) +
                               ": expected label<TAB>text");
    out.push_back(vocab.encode(tokenize(line.substr(tab + 1)), max_len));
  }
  if (out.empty()) throw std::runtime_error("evaluate: OOD file " + path + " is empty");
  return out;
}

}  // namespace

void run_train(const TrainConfig& cfg, const ConsoleSink& console) {
  LoadedData data = load_dataset(cfg.data.path, cfg.data.format, cfg.data.max_len,
                                 cfg.data.min_count);
  say(console, "dataset: " + std::to_string(data.split.train.size()) + " train / " +
                   std::to_string(data.split.valid.size()) + " valid / " +
                   std::to_string(data.split.test.size()) + " test IND, " +
                   std::to_string(data.split.test_ood.size()) + " test OOD, " +
                   std::to_string(data.split.num_classes()) + " intents, vocab " +
                   std::to_string(data.vocab.size()));

  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  std::ofstream log((out / "train_log.jsonl").string(), std::ios::binary);
  if (!log) throw std::runtime_error("train: cannot write log in " + cfg.out_dir);
  log << "{\"phase\":\"config\",\"config_hash\":\"" << cfg.hash_hex() << "\"}\n";

  Trainer trainer(cfg, std::move(data));
  trainer.run([&](const std::string& line) {
    log << line << '\n';
    say(console, line);
  });

  const std::uint64_t vh = trainer.data().vocab.hash();
  const std::uint64_t ch = cfg.hash();
  trainer.data().vocab.save((out / "vocab.txt").string());
  save_checkpoint((out / "classifier.ckpt").string(), "classifier",
                  trainer.classifier().params(), vh, ch);
  save_checkpoint((out / "generator.ckpt").string(), "generator", trainer.generator().params(),
                  vh, ch);
  save_checkpoint((out / "discriminator.ckpt").string(), "discriminator",
                  trainer.discriminator().params(), vh, ch);
  std::ofstream cfg_copy((out / "config.json").string(), std::ios::binary);
  cfg_copy << cfg.to_json_text() << '\n';
  say(console, "train: checkpoints written to " + cfg.out_dir);
}

void run_generate(const TrainConfig& cfg, int count, const std::string& out_path,
                  const ConsoleSink& console) {
  LoadedData data = load_dataset(cfg.data.path, cfg.data.format, cfg.data.max_len,
                                 cfg.data.min_count);
  GeneratorConfig gc;
  gc.vocab_size = data.vocab.size();
  gc.emb_dim = cfg.generator.emb_dim;
  gc.hidden_dim = cfg.generator.hidden_dim;
  gc.lr = cfg.generator.lr;
  gc.temperature = cfg.generator.temperature;
  Rng init(cfg.seed);
  Generator generator(gc, init);
  load_checkpoint((fs::path(cfg.out_dir) / "generator.ckpt").string(), "generator",
                  generator.params(), data.vocab.hash());

  const int quota = count > 0 ? count : static_cast<int>(data.split.train.size());
  std::vector<std::vector<TokenId>> ind_content;
  ind_content.reserve(data.split.train.size());
  for (const auto& ex : data.split.train) ind_content.push_back(ex.sequence.content());

  Rng gen_rng = Rng(cfg.seed).fork(5);
  FilterReport report;
  const auto accepted = generate_filtered_ood(generator, ind_content, quota,
                                              cfg.filter_config(), cfg.filter.max_rounds,
                                              cfg.data.max_len, gen_rng, &report);
  say(console, "generate: " + report.summary());

  std::vector<std::pair<std::string, std::string>> rows;
  rows.reserve(accepted.size());
  for (const auto& seq : accepted) rows.emplace_back(kGeneratedOodLabel, data.vocab.decode(seq));
  write_generic_tsv(out_path, rows, "config " + cfg.hash_hex());
  say(console, "generate: wrote " + std::to_string(rows.size()) + " OOD utterances to " +
                   out_path);
}

MetricReport run_evaluate(const TrainConfig& cfg, const std::string& ood_path,
                          const std::string& report_path, const std::string& scores_path,
                          const ConsoleSink& console) {
  LoadedData data = load_dataset(cfg.data.path, cfg.data.format, cfg.data.max_len,
                                 cfg.data.min_count);
  if (data.split.test_ood.empty())
    throw std::runtime_error("evaluate: test split has no OOD rows to evaluate against");

  std::vector<TokenSequence> ood_train;
  if (!ood_path.empty()) {
    ood_train = load_ood_tsv(ood_path, data.vocab, cfg.data.max_len);
  } else if (cfg.detector.lambda > 0.0) {
    throw std::runtime_error("evaluate: an OOD file is required when detector.lambda > 0");
  }

  ClassifierConfig cc;
  cc.vocab_size = data.vocab.size();
  cc.num_classes = data.split.num_classes();
  cc.emb_dim = cfg.classifier.emb_dim;
  cc.filters_per_width = cfg.classifier.filters_per_width;
  cc.dense_dim = cfg.classifier.dense_dim;
  cc.dropout = cfg.classifier.dropout;
  cc.leaky_slope = cfg.classifier.leaky_slope;
  cc.lr = cfg.classifier.lr;
  Rng init = Rng(cfg.seed).fork(6);
  Rng train_rng = Rng(cfg.seed).fork(7);
  CnnClassifier detector(cc, init);

  DetectorTrainConfig dc;
  dc.lambda = cfg.detector.lambda;
  dc.batch_size = cfg.detector.batch_size;
  dc.max_epochs = cfg.detector.max_epochs;
  dc.patience = cfg.detector.patience;
  dc.val_ood_fraction = cfg.detector.val_ood_fraction;
  const FitResult fit =
      train_detector(detector, data.split.train, data.split.valid, ood_train, dc, train_rng);
  say(console, "evaluate: detector trained for " + std::to_string(fit.epochs_run) +
                   " epochs (best " + std::to_string(fit.best_epoch) + ")");

  const DetectionScores scores = score_dataset(detector, data.split.test, data.split.test_ood);
  const MetricReport report = compute_metric_report(scores);

  fs::create_directories(cfg.out_dir);
  save_checkpoint((fs::path(cfg.out_dir) / "detector.ckpt").string(), "classifier",
                  detector.params(), data.vocab.hash(), cfg.hash());
  save_detection_scores(scores_path, scores, cfg.hash_hex());
  write_metric_report(report_path, report, cfg.hash_hex());
  char line[160];
  std::snprintf(line, sizeof(line),
                "evaluate: auroc=%.4f aupr=%.4f fpr95=%.4f fpr90=%.4f ind_acc=%.4f",
                report.auroc, report.aupr, report.fpr95, report.fpr90, report.ind_acc);
  say(console, line);
  return report;
}

}  // namespace oodgen
