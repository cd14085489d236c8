#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oodgen/config.hpp"
#include "oodgen/checkpoint.hpp"
#include "oodgen/detector.hpp"
#include "oodgen/pipeline.hpp"
#include "oodgen/plot.hpp"
#include "testutil.hpp"

using namespace oodgen;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// tiny two-intent dataset on disk + a fast config
TrainConfig tiny_file_config(const std::string& name) {
  const auto dir = testutil::fresh_dir(name);
  std::vector<std::pair<std::string, std::string>> train{
      {"greet", "hello there friend"},  {"greet", "hi there buddy"},
      {"greet", "good morning friend"}, {"greet", "hello hello buddy"},
      {"greet", "hi good friend"},      {"greet", "good morning buddy"},
      {"bye", "see you later friend"},  {"bye", "goodbye for now buddy"},
      {"bye", "see you soon friend"},   {"bye", "goodbye buddy see you"},
      {"bye", "later for now friend"},  {"bye", "goodbye good friend"},
  };
  std::vector<std::pair<std::string, std::string>> valid{
      {"greet", "hello good morning"},
      {"bye", "see you now buddy"},
  };
  std::vector<std::pair<std::string, std::string>> test{
      {"greet", "hi there friend"},
      {"bye", "later buddy goodbye"},
      {kOodLabel, "where do mangoes grow"},
      {kOodLabel, "how tall is that tower"},
  };
  write_generic_tsv((dir / "train.tsv").string(), train);
  write_generic_tsv((dir / "valid.tsv").string(), valid);
  write_generic_tsv((dir / "test.tsv").string(), test);

  TrainConfig cfg;
  cfg.seed = 99;
  cfg.data.path = dir.string();
  cfg.data.max_len = 8;
  cfg.out_dir = (dir / "out").string();
  cfg.generator.emb_dim = 6;
  cfg.generator.hidden_dim = 8;
  cfg.discriminator.emb_dim = 6;
  cfg.discriminator.hidden_dim = 6;
  cfg.classifier.emb_dim = 6;
  cfg.classifier.filters_per_width = 4;
  cfg.classifier.dense_dim = 6;
  cfg.pretrain.batch_size = 4;
  cfg.pretrain.classifier_max_epochs = 12;
  cfg.pretrain.generator_max_epochs = 8;
  cfg.pretrain.discriminator_epochs = 1;
  cfg.adversarial.epochs = 1;
  cfg.adversarial.batch_size = 4;
  cfg.adversarial.rollout_k = 2;
  cfg.adversarial.eval_every = 0;
  cfg.detector.batch_size = 4;
  cfg.detector.max_epochs = 10;
  cfg.detector.patience = 3;
  cfg.filter.threshold = 0.99;
  return cfg;
}

}  // namespace

TEST_CASE("config parsing requires a seed and rejects unknown fields") {
  CHECK_THROWS_WITH_AS(TrainConfig::from_json_text(R"({"data":{"path":"x"}})"),
                       doctest::Contains("seed"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      TrainConfig::from_json_text(R"({"seed":1,"data":{"path":"x","max_len":"wide"}})"),
      doctest::Contains("data.max_len"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      TrainConfig::from_json_text(R"({"seed":1,"data":{"path":"x"},"typo_section":{}})"),
      doctest::Contains("typo_section"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      TrainConfig::from_json_text(
          R"({"seed":1,"data":{"path":"x"},"adversarial":{"reward_attribution":"sum"}})"),
      doctest::Contains("reward_attribution"), std::invalid_argument);
}

TEST_CASE("config hash is stable and sensitive to field changes") {
  TrainConfig a = tiny_file_config("cfg_hash");
  TrainConfig b = a;
  CHECK(a.hash_hex() == b.hash_hex());
  b.detector.lambda = 2.0;
  CHECK(a.hash_hex() != b.hash_hex());
  const TrainConfig reparsed = TrainConfig::from_json_text(a.to_json_text());
  CHECK(reparsed.hash_hex() == a.hash_hex());
}

TEST_CASE("train, generate, evaluate round-trip on a tiny dataset") {
  const TrainConfig cfg = tiny_file_config("pipe_roundtrip");
  run_train(cfg);
  CHECK(fs::exists(fs::path(cfg.out_dir) / "generator.ckpt"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "discriminator.ckpt"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "classifier.ckpt"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "vocab.txt"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "train_log.jsonl"));

  const auto ood_path = (fs::path(cfg.out_dir) / "generated_ood.tsv").string();
  run_generate(cfg, 8, ood_path);
  const std::string ood_text = read_file(ood_path);
  CHECK(ood_text.find(kGeneratedOodLabel) != std::string::npos);
  CHECK(ood_text.find("# config " + cfg.hash_hex()) != std::string::npos);
  int rows = 0;
  for (char c : ood_text)
    if (c == '\n') ++rows;
  CHECK(rows == 8 + 1);  // 8 utterances + comment line

  const auto report_path = (fs::path(cfg.out_dir) / "report.txt").string();
  const auto scores_path = (fs::path(cfg.out_dir) / "scores.tsv").string();
  const MetricReport report = run_evaluate(cfg, ood_path, report_path, scores_path);
  CHECK(report.auroc >= 0.0);
  CHECK(report.auroc <= 1.0);
  CHECK(report.ind_acc >= 0.0);
  const std::string report_text = read_file(report_path);
  for (const char* key : {"auroc", "aupr", "fpr95", "fpr90", "ind_acc", "config_hash"})
    CHECK(report_text.find(key) != std::string::npos);
  CHECK(fs::exists(report_path + ".json"));
  const auto scores = load_detection_scores(scores_path);
  CHECK(scores.size() == 4);  // 2 test IND + 2 test OOD
}

TEST_CASE("generate and evaluate are byte-idempotent for a fixed seed") {
  const TrainConfig cfg = tiny_file_config("pipe_idempotent");
  run_train(cfg);
  const auto ood_a = (fs::path(cfg.out_dir) / "ood_a.tsv").string();
  const auto ood_b = (fs::path(cfg.out_dir) / "ood_b.tsv").string();
  run_generate(cfg, 6, ood_a);
  run_generate(cfg, 6, ood_b);
  CHECK(read_file(ood_a) == read_file(ood_b));

  const auto rep_a = (fs::path(cfg.out_dir) / "rep_a.txt").string();
  const auto rep_b = (fs::path(cfg.out_dir) / "rep_b.txt").string();
  const auto sc_a = (fs::path(cfg.out_dir) / "sc_a.tsv").string();
  const auto sc_b = (fs::path(cfg.out_dir) / "sc_b.tsv").string();
  run_evaluate(cfg, ood_a, rep_a, sc_a);
  run_evaluate(cfg, ood_a, rep_b, sc_b);
  CHECK(read_file(rep_a) == read_file(rep_b));
  CHECK(read_file(sc_a) == read_file(sc_b));
}

TEST_CASE("checkpoints validate kind, shapes and vocabulary hash") {
  const auto dir = testutil::fresh_dir("ckpt");
  Rng rng(86);
  ParamSet params;
  params.add_uniform("w", 3, 2, 0.5, rng);
  params.add("b", 3, 1);
  const auto path = (dir / "model.ckpt").string();
  save_checkpoint(path, "classifier", params, /*vocab_hash=*/111, /*config_hash=*/7);

  ParamSet same;
  same.add("w", 3, 2);
  same.add("b", 3, 1);
  const CheckpointInfo info = load_checkpoint(path, "classifier", same, 111);
  CHECK(info.config_hash == 7);
  CHECK(same.at(0).value == params.at(0).value);

  ParamSet wrong_shape;
  wrong_shape.add("w", 2, 2);
  wrong_shape.add("b", 3, 1);
  CHECK_THROWS_AS(load_checkpoint(path, "classifier", wrong_shape, 111), std::runtime_error);
  ParamSet ok_shape;
  ok_shape.add("w", 3, 2);
  ok_shape.add("b", 3, 1);
  CHECK_THROWS_AS(load_checkpoint(path, "generator", ok_shape, 111), std::runtime_error);
  CHECK_THROWS_AS(load_checkpoint(path, "classifier", ok_shape, 999), std::runtime_error);
}

TEST_CASE("generate with count 1 writes a single row") {
  const TrainConfig cfg = tiny_file_config("pipe_one");
  run_train(cfg);
  const auto ood_path = (fs::path(cfg.out_dir) / "one.tsv").string();
  run_generate(cfg, 1, ood_path);
  const std::string text = read_file(ood_path);
  int rows = 0;
  for (char c : text)
    if (c == '\n') ++rows;
  CHECK(rows == 2);
}

TEST_CASE("evaluate without an OOD file requires lambda == 0") {
  TrainConfig cfg = tiny_file_config("pipe_lambda0");
  const auto report_path = (fs::path(cfg.out_dir) / "report.txt").string();
  const auto scores_path = (fs::path(cfg.out_dir) / "scores.tsv").string();
  CHECK_THROWS_AS(run_evaluate(cfg, "", report_path, scores_path), std::runtime_error);
  cfg.detector.lambda = 0.0;
  const MetricReport report = run_evaluate(cfg, "", report_path, scores_path);
  CHECK(report.ind_acc >= 0.0);
}

TEST_CASE("missing dataset path fails with nonzero CLI exit status") {
  const auto dir = testutil::fresh_dir("cli_missing");
  TrainConfig cfg;
  cfg.seed = 5;
  cfg.data.path = (dir / "nope").string();
  cfg.out_dir = (dir / "out").string();
  std::ofstream((dir / "cfg.json").string()) << cfg.to_json_text();
  const std::string cmd = std::string(OODGEN_CLI_PATH) + " train --config " +
                          (dir / "cfg.json").string() + " >/dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) != 0);
}

TEST_CASE("CLI flags override config fields") {
  TrainConfig cfg = tiny_file_config("cli_override");
  const auto dir = fs::path(cfg.data.path);
  const auto cfg_path = (dir / "cfg.json").string();
  std::ofstream(cfg_path) << cfg.to_json_text();
  const auto alt_out = (dir / "alt_out").string();
  const std::string cmd = std::string(OODGEN_CLI_PATH) + " train --config " + cfg_path +
                          " --out-dir " + alt_out + " --seed 1234 >/dev/null 2>&1";
  REQUIRE(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(fs::path(alt_out) / "generator.ckpt"));
  CHECK(!fs::exists(fs::path(cfg.out_dir) / "generator.ckpt"));
}

TEST_CASE("CLI plot renders both figure kinds") {
  const auto dir = testutil::fresh_dir("cli_plot");
  Rng rng(55);
  auto scores = testutil::random_scores(rng, 40);
  const auto scores_path = (dir / "scores.tsv").string();
  save_detection_scores(scores_path, scores, "feedf00d");
  for (const std::string kind : {"histogram", "threshold_curve"}) {
    const auto out = (dir / (kind + ".svg")).string();
    const std::string cmd = std::string(OODGEN_CLI_PATH) + " plot --scores " + scores_path +
                            " --kind " + kind + " --out " + out + " >/dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::file_size(out) > 500);
    const std::string svg = read_file(out);
    CHECK(svg.find("<svg") != std::string::npos);
  }
}

TEST_CASE("plot output is byte-stable against the golden file") {
  // fixed score set; regenerating must reproduce the committed golden bytes
  DetectionScores s;
  for (int i = 0; i < 12; ++i) {
    DetectionRecord r;
    r.is_ood = i < 6;
    r.score = r.is_ood ? 0.05 + 0.05 * i : 0.55 + 0.05 * (i - 6);
    r.true_label = r.is_ood ? -1 : i % 3;
    r.pred_label = r.is_ood ? 1 : i % 3;
    s.push_back(r);
  }
  const auto dir = testutil::fresh_dir("plot_golden");
  const auto hist = (dir / "hist.svg").string();
  const auto curve = (dir / "curve.svg").string();
  plot_score_histogram(hist, s, "0123456789abcdef");
  plot_threshold_curve(curve, s, "0123456789abcdef");
  const fs::path golden_dir(OODGEN_TEST_DATA_DIR);
  CHECK(read_file(hist) == read_file(golden_dir / "golden_histogram.svg"));
  CHECK(read_file(curve) == read_file(golden_dir / "golden_threshold_curve.svg"));
}

TEST_CASE("threshold curve marker matches select_threshold") {
  Rng rng(57);
  auto scores = testutil::random_scores(rng, 30);
  const auto dir = testutil::fresh_dir("plot_marker");
  const auto out = (dir / "curve.svg").string();
  plot_threshold_curve(out, scores, "");
  const ThresholdChoice choice = select_threshold(scores);
  char marker[64];
  std::snprintf(marker, sizeof(marker), "t=%.4f", choice.threshold);
  CHECK(read_file(out).find(marker) != std::string::npos);
}

TEST_CASE("plotting an empty score set is an error") {
  const auto dir = testutil::fresh_dir("plot_empty");
  CHECK_THROWS_AS(plot_score_histogram((dir / "x.svg").string(), {}, ""),
                  std::invalid_argument);
}
