#include "oodgen/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oodgen {

double shannon_entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

struct CnnClassifier::Trace {
  std::vector<TokenId> tokens;              // padded to the widest filter
  Eigen::MatrixXd X;                        // emb x L
  std::vector<Eigen::MatrixXd> act;         // per width: nf x P (post-LeakyReLU)
  std::vector<std::vector<int>> argmax;     // per width: pooled position per filter
  Eigen::VectorXd pooled;                   // widths * nf
  Eigen::VectorXd drop0;                    // dropout scale mask (1/(1-p) or 0)
  Eigen::VectorXd v_dropped;
  Eigen::VectorXd a1;                       // post-LeakyReLU dense activation
  Eigen::VectorXd drop1;
  Eigen::VectorXd a1_dropped;
};

CnnClassifier::CnnClassifier(const ClassifierConfig& cfg, Rng& init_rng)
    : cfg_(cfg), adam_(cfg.lr) {
  if (cfg.vocab_size <= kNumSpecialTokens)
    throw std::invalid_argument("classifier: vocab_size too small");
  if (cfg.num_classes < 2) throw std::invalid_argument("classifier: need at least 2 classes");
  emb_ = &params_.add_uniform("emb", cfg.vocab_size, cfg.emb_dim, 0.1, init_rng);
  for (int w : cfg.filter_widths) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w * cfg.emb_dim));
    filters_.push_back(&params_.add_uniform("conv" + std::to_string(w), cfg.filters_per_width,
                                            w * cfg.emb_dim, bound, init_rng));
    filter_bias_.push_back(&params_.add("conv" + std::to_string(w) + ".b",
                                        cfg.filters_per_width, 1));
  }
  const int pooled_dim = static_cast<int>(cfg.filter_widths.size()) * cfg.filters_per_width;
  W1_ = &params_.add_uniform("W1", cfg.dense_dim, pooled_dim,
                             1.0 / std::sqrt(static_cast<double>(pooled_dim)), init_rng);
  b1_ = &params_.add("b1", cfg.dense_dim, 1);
  W2_ = &params_.add_uniform("W2", cfg.num_classes, cfg.dense_dim,
                             1.0 / std::sqrt(static_cast<double>(cfg.dense_dim)), init_rng);
  b2_ = &params_.add("b2", cfg.num_classes, 1);
}

namespace {

Eigen::VectorXd dropout_mask(int n, double p, Rng* rng) {
  if (!rng || p <= 0.0) return Eigen::VectorXd::Ones(n);
  Eigen::VectorXd mask(n);
  const double keep = 1.0 - p;
  for (int i = 0; i < n; ++i) mask[i] = rng->uniform() < keep ? 1.0 / keep : 0.0;
  return mask;
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  const double lse = std::log((logits.array() - m).exp().sum());
  return logits.array() - m - lse;
}

}  // namespace

Eigen::VectorXd CnnClassifier::forward(const TokenSequence& seq, Rng* dropout_rng,
                                       Trace* trace) const {
  std::vector<TokenId> tokens = seq.content();
  const int widest = *std::max_element(cfg_.filter_widths.begin(), cfg_.filter_widths.end());
  while (static_cast<int>(tokens.size()) < widest) tokens.push_back(kPadId);
  const int L = static_cast<int>(tokens.size());
  const int nf = cfg_.filters_per_width;
  const double slope = cfg_.leaky_slope;

  Eigen::MatrixXd X(cfg_.emb_dim, L);
  for (int t = 0; t < L; ++t)
    X.col(t) = emb_->value.row(tokens[static_cast<std::size_t>(t)]).transpose();

  Eigen::VectorXd pooled(static_cast<int>(cfg_.filter_widths.size()) * nf);
  if (trace) {
    trace->tokens = tokens;
    trace->X = X;
    trace->act.resize(cfg_.filter_widths.size());
    trace->argmax.resize(cfg_.filter_widths.size());
  }

  for (std::size_t wi = 0; wi < cfg_.filter_widths.size(); ++wi) {
    const int w = cfg_.filter_widths[wi];
    const int P = L - w + 1;
    Eigen::MatrixXd windows(w * cfg_.emb_dim, P);
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < w; ++j)
        windows.col(i).segment(j * cfg_.emb_dim, cfg_.emb_dim) = X.col(i + j);
    Eigen::MatrixXd pre =
        (filters_[wi]->value * windows).colwise() + filter_bias_[wi]->value.col(0);
    Eigen::MatrixXd act = pre.array().max(slope * pre.array());
    std::vector<int> argmax(static_cast<std::size_t>(nf), 0);
    for (int f = 0; f < nf; ++f) {
      int best = 0;
      for (int i = 1; i < P; ++i)
        if (act(f, i) > act(f, best)) best = i;
      argmax[static_cast<std::size_t>(f)] = best;
      pooled[static_cast<int>(wi) * nf + f] = act(f, best);
    }
    if (trace) {
      trace->act[wi] = std::move(act);
      trace->argmax[wi] = std::move(argmax);
    }
  }

  const Eigen::VectorXd drop0 = dropout_mask(static_cast<int>(pooled.size()), cfg_.dropout,
                                             dropout_rng);
  const Eigen::VectorXd v = pooled.cwiseProduct(drop0);
  const Eigen::VectorXd z1 = W1_->value * v + b1_->value.col(0);
  const Eigen::VectorXd a1 = z1.array().max(slope * z1.array());
  const Eigen::VectorXd drop1 = dropout_mask(cfg_.dense_dim, cfg_.dropout, dropout_rng);
  const Eigen::VectorXd a1d = a1.cwiseProduct(drop1);
  const Eigen::VectorXd logits = W2_->value * a1d + b2_->value.col(0);

  if (trace) {
    trace->pooled = pooled;
    trace->drop0 = drop0;
    trace->v_dropped = v;
    trace->a1 = a1;
    trace->drop1 = drop1;
    trace->a1_dropped = a1d;
  }
  return log_softmax(logits);
}

void CnnClassifier::backward(const Eigen::VectorXd& dlogits, const Trace& trace) {
  const int nf = cfg_.filters_per_width;
  const double slope = cfg_.leaky_slope;

  W2_->grad.noalias() += dlogits * trace.a1_dropped.transpose();
  b2_->grad.col(0) += dlogits;
  Eigen::VectorXd da1 =
      (W2_->value.transpose() * dlogits).cwiseProduct(trace.drop1);
  Eigen::VectorXd dz1(da1.size());
  for (Eigen::Index i = 0; i < da1.size(); ++i)
    dz1[i] = da1[i] * (trace.a1[i] > 0.0 ? 1.0 : slope);
  W1_->grad.noalias() += dz1 * trace.v_dropped.transpose();
  b1_->grad.col(0) += dz1;
  Eigen::VectorXd dpooled =
      (W1_->value.transpose() * dz1).cwiseProduct(trace.drop0);

  Eigen::MatrixXd dX = Eigen::MatrixXd::Zero(trace.X.rows(), trace.X.cols());
  for (std::size_t wi = 0; wi < cfg_.filter_widths.size(); ++wi) {
    const int w = cfg_.filter_widths[wi];
    for (int f = 0; f < nf; ++f) {
      const double g = dpooled[static_cast<int>(wi) * nf + f];
      if (g == 0.0) continue;
      const int pos = trace.argmax[wi][static_cast<std::size_t>(f)];
      const double a = trace.act[wi](f, pos);
      const double dpre = g * (a > 0.0 ? 1.0 : slope);
      filter_bias_[wi]->grad(f, 0) += dpre;
      for (int j = 0; j < w; ++j) {
        filters_[wi]->grad.row(f).segment(j * cfg_.emb_dim, cfg_.emb_dim) +=
            dpre * trace.X.col(pos + j).transpose();
        dX.col(pos + j) += dpre * filters_[wi]
                                      ->value.row(f)
                                      .segment(j * cfg_.emb_dim, cfg_.emb_dim)
                                      .transpose();
      }
    }
  }
  for (int t = 0; t < static_cast<int>(trace.tokens.size()); ++t)
    emb_->grad.row(trace.tokens[static_cast<std::size_t>(t)]) += dX.col(t).transpose();
}

Eigen::VectorXd CnnClassifier::predict(const TokenSequence& seq) const {
  return forward(seq, nullptr, nullptr).array().exp();
}

double CnnClassifier::entropy_reward(const TokenSequence& seq) const {
  return shannon_entropy(predict(seq));
}

int CnnClassifier::predicted_label(const TokenSequence& seq) const {
  const Eigen::VectorXd p = predict(seq);
  int best = 0;
  for (int i = 1; i < p.size(); ++i)
    if (p[i] > p[best]) best = i;
  return best;
}

double CnnClassifier::detector_loss_and_grad(const std::vector<LabeledExample>& ind,
                                             const std::vector<TokenSequence>& ood,
                                             double lambda, Rng* dropout_rng) {
  if (ind.empty()) throw std::invalid_argument("classifier: IND batch is empty");
  if (lambda < 0.0) throw std::invalid_argument("classifier: lambda must be >= 0");
  params_.zero_grad();
  double loss = 0.0;

  const double w_ind = 1.0 / static_cast<double>(ind.size());
  for (const auto& ex : ind) {
    if (ex.label < 0 || ex.label >= cfg_.num_classes)
      throw std::invalid_argument("classifier: label out of range");
    Trace trace;
    const Eigen::VectorXd logp = forward(ex.sequence, dropout_rng, &trace);
    loss += w_ind * (-logp[ex.label]);
    Eigen::VectorXd dlogits = logp.array().exp() * w_ind;
    dlogits[ex.label] -= w_ind;
    backward(dlogits, trace);
  }

  if (lambda > 0.0 && !ood.empty()) {
    const double w_ood = lambda / static_cast<double>(ood.size());
    for (const auto& seq : ood) {
      Trace trace;
      const Eigen::VectorXd logp = forward(seq, dropout_rng, &trace);
      const Eigen::VectorXd p = logp.array().exp();
      const double neg_entropy = p.dot(logp);  // sum p ln p
      loss += w_ood * neg_entropy;
      // d(sum p ln p)/dlogit_j = p_j * (ln p_j - sum_i p_i ln p_i)
      Eigen::VectorXd dlogits = w_ood * p.cwiseProduct(logp - Eigen::VectorXd::Constant(
                                                                  logp.size(), neg_entropy));
      backward(dlogits, trace);
    }
  }
  return loss;
}

double CnnClassifier::ce_loss_and_grad(const std::vector<LabeledExample>& batch,
                                       Rng* dropout_rng) {
  return detector_loss_and_grad(batch, {}, 0.0, dropout_rng);
}

double CnnClassifier::train_step(const std::vector<LabeledExample>& batch, Rng& dropout_rng) {
  const double loss = ce_loss_and_grad(batch, &dropout_rng);
  adam_.step(params_);
  return loss;
}

double CnnClassifier::neg_entropy_loss_and_grad(const std::vector<TokenSequence>& ood,
                                                Rng* dropout_rng) {
  if (ood.empty()) throw std::invalid_argument("classifier: OOD batch is empty");
  params_.zero_grad();
  double loss = 0.0;
  const double w = 1.0 / static_cast<double>(ood.size());
  for (const auto& seq : ood) {
    Trace trace;
    const Eigen::VectorXd logp = forward(seq, dropout_rng, &trace);
    const Eigen::VectorXd p = logp.array().exp();
    const double neg_entropy = p.dot(logp);
    loss += w * neg_entropy;
    Eigen::VectorXd dlogits =
        w * p.cwiseProduct(logp - Eigen::VectorXd::Constant(logp.size(), neg_entropy));
    backward(dlogits, trace);
  }
  return loss;
}

double CnnClassifier::detector_step(const std::vector<LabeledExample>& ind,
                                    const std::vector<TokenSequence>& ood, double lambda,
                                    Rng& dropout_rng) {
  const double loss = detector_loss_and_grad(ind, ood, lambda, &dropout_rng);
  adam_.step(params_);
  return loss;
}

double CnnClassifier::accuracy(const std::vector<LabeledExample>& data) const {
  if (data.empty()) throw std::invalid_argument("classifier: accuracy over empty set");
  int correct = 0;
  for (const auto& ex : data)
    if (predicted_label(ex.sequence) == ex.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace oodgen
