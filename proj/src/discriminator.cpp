#include "oodgen/discriminator.hpp"

#include <cmath>
#include <stdexcept>

namespace oodgen {

namespace {
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
}  // namespace

struct Discriminator::Trace {
  std::vector<TokenId> content;
  int L = 0;
  std::vector<GruCell::Cache> f1, b1, f2, b2;  // caches in processing order
  Eigen::MatrixXd o1;                          // 2H x L, layer-2 inputs
  Eigen::VectorXd final_concat;                // 2H
  Eigen::VectorXd a;                           // head tanh output
  double logit = 0.0;
};

Discriminator::Discriminator(const DiscriminatorConfig& cfg, Rng& init_rng)
    : cfg_(cfg),
      fwd1_(GruCell::create(params_, "fwd1", cfg.emb_dim, cfg.hidden_dim, init_rng)),
      bwd1_(GruCell::create(params_, "bwd1", cfg.emb_dim, cfg.hidden_dim, init_rng)),
      fwd2_(GruCell::create(params_, "fwd2", 2 * cfg.hidden_dim, cfg.hidden_dim, init_rng)),
      bwd2_(GruCell::create(params_, "bwd2", 2 * cfg.hidden_dim, cfg.hidden_dim, init_rng)),
      adagrad_(cfg.lr) {
  if (cfg.vocab_size <= kNumSpecialTokens)
    throw std::invalid_argument("discriminator: vocab_size too small");
  emb_ = &params_.add_uniform("emb", cfg.vocab_size, cfg.emb_dim, 0.1, init_rng);
  const int H = cfg.hidden_dim;
  Wh_ = &params_.add_uniform("Wh", H, 2 * H, 1.0 / std::sqrt(2.0 * H), init_rng);
  bh_ = &params_.add("bh", H, 1);
  wout_ = &params_.add_uniform("wout", 1, H, 1.0 / std::sqrt(static_cast<double>(H)), init_rng);
  bout_ = &params_.add("bout", 1, 1);
}

double Discriminator::forward(const std::vector<TokenId>& content, Trace* trace) const {
  const int H = cfg_.hidden_dim;
  const int L = static_cast<int>(content.size());

  Eigen::MatrixXd o1 = Eigen::MatrixXd::Zero(2 * H, std::max(L, 1));
  Eigen::MatrixXd hf = Eigen::MatrixXd::Zero(H, 1), hb = Eigen::MatrixXd::Zero(H, 1);
  if (trace) {
    trace->content = content;
    trace->L = L;
  }

  for (int t = 0; t < L; ++t) {
    Eigen::MatrixXd x = emb_->value.row(content[static_cast<std::size_t>(t)]).transpose();
    GruCell::Cache c;
    hf = fwd1_.forward(x, hf, trace ? &c : nullptr);
    if (trace) trace->f1.push_back(std::move(c));
    o1.col(t).head(H) = hf.col(0);
  }
  for (int t = L - 1; t >= 0; --t) {
    Eigen::MatrixXd x = emb_->value.row(content[static_cast<std::size_t>(t)]).transpose();
    GruCell::Cache c;
    hb = bwd1_.forward(x, hb, trace ? &c : nullptr);
    if (trace) trace->b1.push_back(std::move(c));
    o1.col(t).tail(H) = hb.col(0);
  }

  Eigen::MatrixXd gf = Eigen::MatrixXd::Zero(H, 1), gb = Eigen::MatrixXd::Zero(H, 1);
  for (int t = 0; t < L; ++t) {
    GruCell::Cache c;
    gf = fwd2_.forward(o1.col(t), gf, trace ? &c : nullptr);
    if (trace) trace->f2.push_back(std::move(c));
  }
  for (int t = L - 1; t >= 0; --t) {
    GruCell::Cache c;
    gb = bwd2_.forward(o1.col(t), gb, trace ? &c : nullptr);
    if (trace) trace->b2.push_back(std::move(c));
  }

  Eigen::VectorXd final_concat(2 * H);
  final_concat.head(H) = gf.col(0);
  final_concat.tail(H) = gb.col(0);
  const Eigen::VectorXd a = (Wh_->value * final_concat + bh_->value.col(0)).array().tanh();
  const double logit = (wout_->value * a)(0, 0) + bout_->value(0, 0);

  if (trace) {
    trace->o1 = o1;
    trace->final_concat = final_concat;
    trace->a = a;
    trace->logit = logit;
  }
  return logit;
}

void Discriminator::backward(double dlogit, const Trace& trace) {
  const int H = cfg_.hidden_dim;
  const int L = trace.L;

  wout_->grad.noalias() += dlogit * trace.a.transpose();
  bout_->grad(0, 0) += dlogit;
  const Eigen::VectorXd da = wout_->value.transpose() * dlogit;
  const Eigen::VectorXd dz = da.array() * (1.0 - trace.a.array().square());
  Wh_->grad.noalias() += dz * trace.final_concat.transpose();
  bh_->grad.col(0) += dz;
  const Eigen::VectorXd dfinal = Wh_->value.transpose() * dz;
  if (L == 0) return;

  Eigen::MatrixXd do1 = Eigen::MatrixXd::Zero(2 * H, L);
  Eigen::MatrixXd dx, dh_prev;

  // layer 2, forward direction: gradient enters at the last processing step
  Eigen::MatrixXd dh = dfinal.head(H);
  for (int step = L - 1; step >= 0; --step) {
    fwd2_.backward(dh, trace.f2[static_cast<std::size_t>(step)], &dx, &dh_prev);
    do1.col(step) += dx.col(0);
    dh = dh_prev;
  }
  // layer 2, backward direction: processing step `step` consumed o1[L-1-step]
  dh = dfinal.tail(H);
  for (int step = L - 1; step >= 0; --step) {
    bwd2_.backward(dh, trace.b2[static_cast<std::size_t>(step)], &dx, &dh_prev);
    do1.col(L - 1 - step) += dx.col(0);
    dh = dh_prev;
  }

  // layer 1: each step also receives gradient from its o1 slice
  dh = Eigen::MatrixXd::Zero(H, 1);
  for (int step = L - 1; step >= 0; --step) {
    dh.col(0) += do1.col(step).head(H);
    fwd1_.backward(dh, trace.f1[static_cast<std::size_t>(step)], &dx, &dh_prev);
    emb_->grad.row(trace.content[static_cast<std::size_t>(step)]) += dx.col(0).transpose();
    dh = dh_prev;
  }
  dh = Eigen::MatrixXd::Zero(H, 1);
  for (int step = L - 1; step >= 0; --step) {
    const int t = L - 1 - step;
    dh.col(0) += do1.col(t).tail(H);
    bwd1_.backward(dh, trace.b1[static_cast<std::size_t>(step)], &dx, &dh_prev);
    emb_->grad.row(trace.content[static_cast<std::size_t>(t)]) += dx.col(0).transpose();
    dh = dh_prev;
  }
}

double Discriminator::score(const TokenSequence& seq) const {
  const double logit = forward(seq.content(), nullptr);
  return 1.0 / (1.0 + std::exp(-logit));
}

double Discriminator::bce_loss_and_grad(const std::vector<TokenSequence>& real,
                                        const std::vector<TokenSequence>& fake) {
  if (real.empty() || fake.empty())
    throw std::invalid_argument("discriminator: real and fake batches must be non-empty");
  params_.zero_grad();
  const double n = static_cast<double>(real.size() + fake.size());
  double loss = 0.0;
  const auto accumulate = [&](const TokenSequence& seq, double y) {
    Trace trace;
    const double logit = forward(seq.content(), &trace);
    loss += (y > 0.5 ? softplus(-logit) : softplus(logit)) / n;
    const double s = 1.0 / (1.0 + std::exp(-logit));
    backward((s - y) / n, trace);
  };
  for (const auto& seq : real) accumulate(seq, 1.0);
  for (const auto& seq : fake) accumulate(seq, 0.0);
  return loss;
}

double Discriminator::train_step(const std::vector<TokenSequence>& real,
                                 const std::vector<TokenSequence>& fake) {
  const double loss = bce_loss_and_grad(real, fake);
  adagrad_.step(params_);
  return loss;
}

}  // namespace oodgen
