#include <doctest.h>

#include <cmath>

#include "oodgen/detector.hpp"
#include "oodgen/metrics.hpp"
#include "testutil.hpp"

using namespace oodgen;

namespace {

ClassifierConfig tiny_config(int vocab, int classes) {
  ClassifierConfig c;
  c.vocab_size = vocab;
  c.num_classes = classes;
  c.emb_dim = 6;
  c.filter_widths = {2, 3};
  c.filters_per_width = 4;
  c.dense_dim = 5;
  c.lr = 0.05;
  return c;
}

TokenSequence toks(std::initializer_list<int> ids) {
  return TokenSequence::of(std::vector<TokenId>(ids.begin(), ids.end()));
}

std::vector<LabeledExample> toy_ind() {
  return {
      {toks({4, 5, 6}), 0}, {toks({4, 6}), 0},  {toks({5, 4, 5}), 0},
      {toks({7, 8, 9}), 1}, {toks({8, 9}), 1},  {toks({9, 8, 7}), 1},
  };
}

std::vector<TokenSequence> toy_ood() {
  return {toks({10, 11}), toks({11, 10, 11}), toks({10, 10}), toks({11, 11, 10})};
}

}  // namespace

TEST_CASE("lambda 0 training is bit-identical to plain classifier training") {
  const auto ind = toy_ind();
  const std::vector<LabeledExample> valid{{toks({4, 5}), 0}, {toks({8, 7}), 1}};

  DetectorTrainConfig cfg;
  cfg.lambda = 0.0;
  cfg.batch_size = 3;
  cfg.max_epochs = 12;
  cfg.patience = 4;

  Rng init_a(71);
  CnnClassifier a(tiny_config(14, 2), init_a);
  Rng train_a(72);
  train_detector(a, ind, valid, {}, cfg, train_a);

  // same seeds, OOD data present but weightless: must not perturb anything
  Rng init_b(71);
  CnnClassifier b(tiny_config(14, 2), init_b);
  Rng train_b(72);
  train_detector(b, ind, valid, toy_ood(), cfg, train_b);

  const auto va = a.params().flatten_values();
  const auto vb = b.params().flatten_values();
  REQUIRE(va.size() == vb.size());
  for (std::size_t i = 0; i < va.size(); ++i) REQUIRE(va[i] == vb[i]);
}

TEST_CASE("entropy training lowers OOD scores below IND scores") {
  const auto ind = toy_ind();
  const std::vector<LabeledExample> valid{{toks({4, 4, 6}), 0}, {toks({7, 9}), 1}};
  DetectorTrainConfig cfg;
  cfg.lambda = 1.0;
  cfg.batch_size = 3;
  cfg.max_epochs = 60;
  cfg.patience = 60;  // fixed-length run for the toy check
  Rng init(73);
  CnnClassifier model(tiny_config(14, 2), init);
  Rng train(74);
  train_detector(model, ind, valid, toy_ood(), cfg, train);

  double mean_ind = 0.0, mean_ood = 0.0;
  for (const auto& ex : ind) mean_ind += model.predict(ex.sequence).maxCoeff();
  for (const auto& seq : toy_ood()) mean_ood += model.predict(seq).maxCoeff();
  mean_ind /= static_cast<double>(ind.size());
  mean_ood /= static_cast<double>(toy_ood().size());
  CHECK(mean_ood < mean_ind);
}

TEST_CASE("lambda > 0 without OOD data is rejected") {
  DetectorTrainConfig cfg;
  cfg.lambda = 0.5;
  Rng init(75);
  CnnClassifier model(tiny_config(10, 2), init);
  Rng train(76);
  CHECK_THROWS_AS(
      train_detector(model, toy_ind(), {{toks({4}), 0}}, {}, cfg, train),
      std::invalid_argument);
}

TEST_CASE("score_dataset emits one record per example with argmax fields") {
  Rng init(77);
  CnnClassifier model(tiny_config(12, 3), init);
  const std::vector<LabeledExample> ind{{toks({4, 5}), 2}, {toks({6}), 0}};
  const std::vector<TokenSequence> ood{toks({7, 8})};
  const DetectionScores scores = score_dataset(model, ind, ood);
  REQUIRE(scores.size() == 3);
  CHECK(!scores[0].is_ood);
  CHECK(scores[0].true_label == 2);
  CHECK(scores[2].is_ood);
  CHECK(scores[2].true_label == -1);
  for (const auto& r : scores) {
    CHECK(r.score > 0.0);
    CHECK(r.score <= 1.0);
    CHECK(r.score >= 1.0 / 3.0 - 1e-9);  // max of a 3-class distribution
    CHECK(r.pred_label >= 0);
    CHECK(r.pred_label < 3);
  }
}

TEST_CASE("score_dataset is permutation equivariant") {
  Rng init(78);
  CnnClassifier model(tiny_config(12, 2), init);
  const std::vector<LabeledExample> ind{{toks({4, 5}), 0}, {toks({6, 7}), 1}, {toks({8}), 0}};
  const auto fwd = score_dataset(model, ind, {});
  const std::vector<LabeledExample> rev{ind[2], ind[0], ind[1]};
  const auto swapped = score_dataset(model, rev, {});
  CHECK(swapped[0].score == fwd[2].score);
  CHECK(swapped[1].score == fwd[0].score);
  CHECK(swapped[2].score == fwd[1].score);
}

TEST_CASE("select_threshold returns the gap midpoint under perfect separation") {
  DetectionScores s;
  for (double v : {0.1, 0.2, 0.3}) {
    DetectionRecord r;
    r.is_ood = true;
    r.score = v;
    r.true_label = -1;
    s.push_back(r);
  }
  for (double v : {0.8, 0.9}) {
    DetectionRecord r;
    r.is_ood = false;
    r.score = v;
    r.true_label = 0;
    r.pred_label = 0;
    s.push_back(r);
  }
  const ThresholdChoice choice = select_threshold(s);
  CHECK(choice.joint_accuracy == doctest::Approx(1.0));
  CHECK(choice.threshold == doctest::Approx(0.55));  // midpoint of 0.3 and 0.8
}

TEST_CASE("select_threshold on all-equal scores lands on that score") {
  DetectionScores s;
  for (int i = 0; i < 6; ++i) {
    DetectionRecord r;
    r.is_ood = i < 2;  // IND majority, all predicted correctly
    r.score = 0.6;
    r.true_label = r.is_ood ? -1 : 0;
    r.pred_label = 0;
    s.push_back(r);
  }
  const ThresholdChoice choice = select_threshold(s);
  CHECK(choice.threshold == doctest::Approx(0.6));
  CHECK(choice.joint_accuracy == doctest::Approx(4.0 / 6.0));  // the IND prior wins
}

TEST_CASE("select_threshold beats the exhaustive-grid oracle nowhere") {
  Rng rng(79);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = testutil::random_scores(rng, 20);
    const ThresholdChoice choice = select_threshold(s);
    // oracle: every midpoint plus the endpoints
    std::vector<double> grid{0.0, 1.0, 1.0000001};
    std::vector<double> uniq;
    for (const auto& r : s) uniq.push_back(r.score);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (std::size_t i = 0; i + 1 < uniq.size(); ++i)
      grid.push_back(0.5 * (uniq[i] + uniq[i + 1]));
    for (double u : uniq) grid.push_back(u);
    double best = 0.0;
    for (double t : grid) best = std::max(best, testutil::oracle_joint_accuracy(s, t));
    CHECK(choice.joint_accuracy == doctest::Approx(best).epsilon(1e-12));
    CHECK(testutil::oracle_joint_accuracy(s, choice.threshold) ==
          doctest::Approx(choice.joint_accuracy).epsilon(1e-12));
    // never worse than the degenerate endpoints
    CHECK(choice.joint_accuracy >= testutil::oracle_joint_accuracy(s, 0.0) - 1e-12);
    CHECK(choice.joint_accuracy >= testutil::oracle_joint_accuracy(s, 1.0) - 1e-12);
  }
}

TEST_CASE("select_threshold requires both classes") {
  DetectionScores s;
  DetectionRecord r;
  r.is_ood = false;
  r.score = 0.5;
  r.true_label = r.pred_label = 0;
  s.push_back(r);
  CHECK_THROWS_AS(select_threshold(s), std::invalid_argument);
}
