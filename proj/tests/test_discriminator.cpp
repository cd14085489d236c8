#include <doctest.h>

#include <cmath>

#include "oodgen/discriminator.hpp"
#include "testutil.hpp"

using namespace oodgen;

namespace {

DiscriminatorConfig tiny_config(int vocab, int emb = 5, int hidden = 6) {
  DiscriminatorConfig c;
  c.vocab_size = vocab;
  c.emb_dim = emb;
  c.hidden_dim = hidden;
  c.lr = 0.1;
  return c;
}

TokenSequence toks(std::initializer_list<int> ids) {
  return TokenSequence::of(std::vector<TokenId>(ids.begin(), ids.end()));
}

}  // namespace

TEST_CASE("scores stay inside the open unit interval") {
  Rng rng(61);
  Discriminator d(tiny_config(10), rng);
  for (auto seq : {toks({4}), toks({4, 5, 6, 7}), toks({kEosId})}) {
    const double s = d.score(seq);
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
}

TEST_CASE("scoring twice without training gives the identical value") {
  Rng rng(62);
  Discriminator d(tiny_config(10), rng);
  const auto seq = toks({4, 5, 6});
  CHECK(d.score(seq) == d.score(seq));
}

TEST_CASE("score ignores trailing padding and BOS/EOS framing") {
  Rng rng(63);
  Discriminator d(tiny_config(10), rng);
  TokenSequence bare = toks({5, 6, 7});
  TokenSequence padded = bare;
  padded.ids.insert(padded.ids.end(), 4, kPadId);
  TokenSequence framed;
  framed.ids = {kBosId, 5, 6, 7, kEosId, kPadId, kPadId};
  framed.length = 5;
  CHECK(d.score(bare) == d.score(padded));
  CHECK(d.score(bare) == d.score(framed));
}

TEST_CASE("training separates a trivially separable toy set") {
  Rng rng(64);
  Discriminator d(tiny_config(8, 4, 5), rng);
  const std::vector<TokenSequence> real{toks({4, 4})};
  const std::vector<TokenSequence> fake{toks({5, 5})};
  double loss = 1.0;
  for (int step = 0; step < 120; ++step) loss = d.train_step(real, fake);
  CHECK(loss < 0.05);
  CHECK(d.score(real[0]) > 0.9);
  CHECK(d.score(fake[0]) < 0.1);
}

TEST_CASE("identical real and fake batches drive scores to one half") {
  Rng rng(65);
  Discriminator d(tiny_config(8, 4, 5), rng);
  const std::vector<TokenSequence> batch{toks({4, 5}), toks({6, 7}), toks({5, 5, 6})};
  double loss = 0.0;
  for (int step = 0; step < 150; ++step) loss = d.train_step(batch, batch);
  CHECK(loss >= std::log(2.0) - 1e-6);  // ln 2 is the optimum
  CHECK(loss < std::log(2.0) + 0.1);
  double mean_score = 0.0;
  for (const auto& seq : batch) mean_score += d.score(seq);
  mean_score /= static_cast<double>(batch.size());
  CHECK(mean_score == doctest::Approx(0.5).epsilon(0.1));  // within 0.05 absolute
  CHECK(std::abs(mean_score - 0.5) < 0.05);
}

TEST_CASE("BCE gradients match finite differences") {
  Rng rng(66);
  Discriminator d(tiny_config(5, 3, 3), rng);
  const std::vector<TokenSequence> real{toks({4, 4, kEosId}), toks({4})};
  const std::vector<TokenSequence> fake{toks({4, kEosId})};
  const double err = testutil::gradient_check(
      d.params(), [&] { return d.bce_loss_and_grad(real, fake); }, 1e-5);
  CHECK(err < 1e-3);
}

TEST_CASE("empty batches are rejected") {
  Rng rng(67);
  Discriminator d(tiny_config(6), rng);
  const std::vector<TokenSequence> some{toks({4})};
  CHECK_THROWS_AS(d.train_step({}, some), std::invalid_argument);
  CHECK_THROWS_AS(d.train_step(some, {}), std::invalid_argument);
}

TEST_CASE("empty-content sequences are scorable") {
  Rng rng(68);
  Discriminator d(tiny_config(6), rng);
  TokenSequence eos_only = toks({kEosId});
  const double s = d.score(eos_only);
  CHECK(s > 0.0);
  CHECK(s < 1.0);
}
