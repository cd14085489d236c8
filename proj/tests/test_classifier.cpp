#include <doctest.h>

#include <cmath>

#include "oodgen/classifier.hpp"
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
  c.dropout = 0.5;
  c.lr = 0.05;
  return c;
}

TokenSequence toks(std::initializer_list<int> ids) {
  return TokenSequence::of(std::vector<TokenId>(ids.begin(), ids.end()));
}

// two-class set separable on a single token
std::vector<LabeledExample> separable_set() {
  return {
      {toks({4, 5, 6}), 0}, {toks({4, 6, 5}), 0}, {toks({5, 4}), 0},
      {toks({7, 8, 9}), 1}, {toks({8, 7}), 1},    {toks({9, 7, 8}), 1},
  };
}

}  // namespace

TEST_CASE("predict returns a valid distribution") {
  Rng rng(1);
  CnnClassifier model(tiny_config(12, 4), rng);
  for (auto seq : {toks({4}), toks({4, 5, 6, 7, 8, 9}), toks({kUnkId})}) {
    const Eigen::VectorXd p = model.predict(seq);
    REQUIRE(p.size() == 4);
    CHECK(std::abs(p.sum() - 1.0) < 1e-6);
    for (int i = 0; i < p.size(); ++i) CHECK(p[i] >= 0.0);
  }
}

TEST_CASE("predict is deterministic in evaluation mode") {
  Rng rng(2);
  CnnClassifier model(tiny_config(10, 3), rng);
  const auto seq = toks({4, 5, 6, 7});
  const Eigen::VectorXd p1 = model.predict(seq);
  const Eigen::VectorXd p2 = model.predict(seq);
  CHECK((p1 - p2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("inputs shorter than the widest filter are padded") {
  Rng rng(3);
  ClassifierConfig cfg = tiny_config(10, 2);
  cfg.filter_widths = {2, 3, 4, 5};
  CnnClassifier model(cfg, rng);
  CHECK_NOTHROW(model.predict(toks({4})));
  // an all-specials sequence has empty content and still pads up
  TokenSequence empty_content;
  empty_content.ids = {kBosId, kEosId};
  empty_content.length = 2;
  CHECK_NOTHROW(model.predict(empty_content));
}

TEST_CASE("shannon entropy on constructed distributions") {
  Eigen::VectorXd onehot = Eigen::VectorXd::Zero(6);
  onehot[2] = 1.0;
  CHECK(shannon_entropy(onehot) == doctest::Approx(0.0).epsilon(1e-12));
  const Eigen::VectorXd uniform4 = Eigen::VectorXd::Constant(4, 0.25);
  CHECK(shannon_entropy(uniform4) == doctest::Approx(std::log(4.0)).epsilon(1e-9));
  Eigen::VectorXd half(2);
  half << 0.5, 0.5;
  CHECK(shannon_entropy(half) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("entropy is permutation symmetric and bounded by ln m") {
  Rng rng(5);
  for (int m : {2, 3, 7, 20}) {
    Eigen::VectorXd p(m);
    for (int i = 0; i < m; ++i) p[i] = rng.uniform() + 1e-6;
    p /= p.sum();
    const double h = shannon_entropy(p);
    CHECK(h >= 0.0);
    CHECK(h <= std::log(static_cast<double>(m)) + 1e-12);
    std::vector<double> vals(p.data(), p.data() + m);
    rng.shuffle(vals);
    Eigen::VectorXd q = Eigen::Map<Eigen::VectorXd>(vals.data(), m);
    CHECK(shannon_entropy(q) == doctest::Approx(h).epsilon(1e-12));
  }
}

TEST_CASE("entropy_reward of the model prediction is within bounds") {
  Rng rng(6);
  CnnClassifier model(tiny_config(10, 5), rng);
  const double h = model.entropy_reward(toks({4, 5, 6}));
  CHECK(h >= 0.0);
  CHECK(h <= std::log(5.0));
}

TEST_CASE("training memorizes a single repeated example") {
  Rng rng(7);
  CnnClassifier model(tiny_config(10, 2), rng);
  Rng drop(8);
  const std::vector<LabeledExample> batch{{toks({4, 5, 6}), 1}};
  double loss = 0.0;
  for (int step = 0; step < 300; ++step) loss = model.train_step(batch, drop);
  CHECK(loss < 0.05);
  CHECK(model.predicted_label(batch[0].sequence) == 1);
}

TEST_CASE("training reaches accuracy 1.0 on a separable toy set") {
  Rng rng(9);
  CnnClassifier model(tiny_config(12, 2), rng);
  Rng drop(10);
  const auto data = separable_set();
  for (int step = 0; step < 400; ++step) model.train_step(data, drop);
  CHECK(model.accuracy(data) == doctest::Approx(1.0));
}

TEST_CASE("cross-entropy gradients match finite differences") {
  Rng rng(11);
  ClassifierConfig cfg = tiny_config(8, 3);
  cfg.dropout = 0.0;  // deterministic loss for the finite-difference probe
  CnnClassifier model(cfg, rng);
  const std::vector<LabeledExample> batch{{toks({4, 5, 6}), 0}, {toks({6, 7}), 2}};
  const double err = testutil::gradient_check(
      model.params(), [&] { return model.ce_loss_and_grad(batch, nullptr); });
  CHECK(err < 1e-3);
}

TEST_CASE("negative-entropy gradients match finite differences") {
  Rng rng(12);
  ClassifierConfig cfg = tiny_config(8, 4);
  cfg.dropout = 0.0;
  CnnClassifier model(cfg, rng);
  const std::vector<TokenSequence> ood{toks({4, 6, 5}), toks({7, 7})};
  const double err = testutil::gradient_check(
      model.params(), [&] { return model.neg_entropy_loss_and_grad(ood, nullptr); });
  CHECK(err < 1e-3);
}

TEST_CASE("combined detector loss gradients match finite differences") {
  Rng rng(13);
  ClassifierConfig cfg = tiny_config(9, 3);
  cfg.dropout = 0.0;
  CnnClassifier model(cfg, rng);
  const std::vector<LabeledExample> ind{{toks({4, 5}), 1}};
  const std::vector<TokenSequence> ood{toks({6, 7, 8})};
  const double err = testutil::gradient_check(model.params(), [&] {
    return model.detector_loss_and_grad(ind, ood, 1.7, nullptr);
  });
  CHECK(err < 1e-3);
}

TEST_CASE("labels out of range are rejected") {
  Rng rng(14);
  CnnClassifier model(tiny_config(8, 2), rng);
  Rng drop(15);
  std::vector<LabeledExample> bad{{toks({4}), 2}};
  CHECK_THROWS_AS(model.train_step(bad, drop), std::invalid_argument);
}

TEST_CASE("config with fewer than 2 classes is rejected") {
  Rng rng(16);
  CHECK_THROWS_AS(CnnClassifier(tiny_config(8, 1), rng), std::invalid_argument);
}

TEST_CASE("a 12-intent classifier (three categories of four) trains without error") {
  Rng rng(17);
  CnnClassifier model(tiny_config(40, 12), rng);
  Rng drop(18);
  std::vector<LabeledExample> batch;
  Rng data_rng(19);
  for (int label = 0; label < 12; ++label) {
    std::vector<TokenId> ids;
    for (int j = 0; j < 4; ++j) ids.push_back(4 + static_cast<TokenId>(data_rng.uniform_int(36)));
    batch.push_back({TokenSequence::of(ids), label});
  }
  const double loss = model.train_step(batch, drop);
  CHECK(std::isfinite(loss));
  const Eigen::VectorXd p = model.predict(batch[0].sequence);
  CHECK(p.size() == 12);
  CHECK(std::abs(p.sum() - 1.0) < 1e-6);
}
