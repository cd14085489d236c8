#include "oodgen/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace oodgen {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

struct Generator::ForwardPlan {
  int batch_size = 0;
  int max_steps = 0;
  Eigen::MatrixXi inputs;   // steps x batch, token fed at step t
  Eigen::MatrixXi targets;  // steps x batch, token scored at step t
  Eigen::MatrixXd weights;  // steps x batch, loss weight (0 = inactive)
  std::vector<int> step_counts;
};

Generator::Generator(const GeneratorConfig& cfg, Rng& init_rng)
    : cfg_(cfg),
      cell_(GruCell::create(params_, "gru", cfg.emb_dim, cfg.hidden_dim, init_rng)),
      adam_(cfg.lr) {
  if (cfg.vocab_size <= kNumSpecialTokens)
    throw std::invalid_argument("generator: vocab_size too small");
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim));
  emb_ = &params_.add_uniform("emb", cfg.vocab_size, cfg.emb_dim, 0.1, init_rng);
  Wo_ = &params_.add_uniform("Wo", cfg.vocab_size, cfg.hidden_dim, bound, init_rng);
  bo_ = &params_.add("bo", cfg.vocab_size, 1);
}

void Generator::set_embedding_row(TokenId id, const Eigen::VectorXd& vec) {
  if (vec.size() != cfg_.emb_dim) throw std::invalid_argument("embedding dimension mismatch");
  emb_->value.row(id) = vec.transpose();
}

Generator::ForwardPlan Generator::make_plan(const std::vector<TokenSequence>& batch) const {
  ForwardPlan plan;
  plan.batch_size = static_cast<int>(batch.size());
  for (const auto& seq : batch) {
    if (seq.length < 1) throw std::invalid_argument("generator: empty sequence in batch");
    const bool canonical = seq.ids[0] == kBosId;
    plan.step_counts.push_back(canonical ? seq.length - 1 : seq.length);
  }
  plan.max_steps = *std::max_element(plan.step_counts.begin(), plan.step_counts.end());
  plan.inputs = Eigen::MatrixXi::Constant(plan.max_steps, plan.batch_size, kPadId);
  plan.targets = Eigen::MatrixXi::Constant(plan.max_steps, plan.batch_size, kPadId);
  plan.weights = Eigen::MatrixXd::Zero(plan.max_steps, plan.batch_size);
  for (int b = 0; b < plan.batch_size; ++b) {
    const auto& seq = batch[static_cast<std::size_t>(b)];
    const bool canonical = seq.ids[0] == kBosId;
    for (int t = 0; t < plan.step_counts[static_cast<std::size_t>(b)]; ++t) {
      if (canonical) {
        plan.inputs(t, b) = seq.ids[static_cast<std::size_t>(t)];
        plan.targets(t, b) = seq.ids[static_cast<std::size_t>(t) + 1];
      } else {
        plan.inputs(t, b) = t == 0 ? kBosId : seq.ids[static_cast<std::size_t>(t) - 1];
        plan.targets(t, b) = seq.ids[static_cast<std::size_t>(t)];
      }
      plan.weights(t, b) = 1.0;
    }
  }
  return plan;
}

namespace {

// log-softmax over the non-PAD rows of one logits column.
struct ColumnSoftmax {
  double max_logit;
  double log_denom;
};

ColumnSoftmax masked_logsumexp(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  const int v = static_cast<int>(logits.size());
  ColumnSoftmax s;
  s.max_logit = logits.segment(1, v - 1).maxCoeff();
  s.log_denom = std::log((logits.segment(1, v - 1).array() - s.max_logit).exp().sum());
  return s;
}

}  // namespace

double Generator::weighted_nll(const ForwardPlan& plan, bool with_grad) {
  const int T = plan.max_steps;
  const int B = plan.batch_size;
  const int V = cfg_.vocab_size;
  const int H = cfg_.hidden_dim;
  const int E = cfg_.emb_dim;
  const double inv_temp = 1.0 / cfg_.temperature;

  std::vector<GruCell::Cache> caches;
  std::vector<Eigen::MatrixXd> hs, dlogits_steps;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(H, B);
  Eigen::MatrixXd x(E, B);
  double loss = 0.0;

  for (int t = 0; t < T; ++t) {
    for (int b = 0; b < B; ++b) x.col(b) = emb_->value.row(plan.inputs(t, b)).transpose();
    GruCell::Cache cache;
    h = cell_.forward(x, h, with_grad ? &cache : nullptr);
    if (with_grad) caches.push_back(std::move(cache));
    if (with_grad) hs.push_back(h);

    Eigen::MatrixXd logits = ((Wo_->value * h).colwise() + bo_->value.col(0)) * inv_temp;
    Eigen::MatrixXd dlog;
    if (with_grad) dlog = Eigen::MatrixXd::Zero(V, B);
    for (int b = 0; b < B; ++b) {
      const double w = plan.weights(t, b);
      if (w == 0.0) continue;
      const auto sm = masked_logsumexp(logits.col(b));
      const int y = plan.targets(t, b);
      const double logp = logits(y, b) - sm.max_logit - sm.log_denom;
      loss += w * (-logp);
      if (with_grad) {
        dlog.col(b).segment(1, V - 1) =
            w * inv_temp *
            (logits.col(b).segment(1, V - 1).array() - sm.max_logit - sm.log_denom).exp();
        dlog(y, b) -= w * inv_temp;
      }
    }
    if (with_grad) dlogits_steps.push_back(std::move(dlog));
  }

  if (with_grad) {
    Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(H, B);
    Eigen::MatrixXd dx(E, B), dh_prev(H, B);
    for (int t = T - 1; t >= 0; --t) {
      Wo_->grad.noalias() += dlogits_steps[static_cast<std::size_t>(t)] *
                             hs[static_cast<std::size_t>(t)].transpose();
      bo_->grad.col(0).noalias() += dlogits_steps[static_cast<std::size_t>(t)].rowwise().sum();
      dh.noalias() += Wo_->value.transpose() * dlogits_steps[static_cast<std::size_t>(t)];
      cell_.backward(dh, caches[static_cast<std::size_t>(t)], &dx, &dh_prev);
      for (int b = 0; b < B; ++b)
        emb_->grad.row(plan.inputs(t, b)) += dx.col(b).transpose();
      dh = dh_prev;
    }
  }
  return loss;
}

double Generator::nll_loss_and_grad(const std::vector<TokenSequence>& batch) {
  if (batch.empty()) throw std::invalid_argument("nll: batch is empty");
  ForwardPlan plan = make_plan(batch);
  double tokens = plan.weights.sum();
  plan.weights /= tokens;
  params_.zero_grad();
  return weighted_nll(plan, true);
}

double Generator::nll_step(const std::vector<TokenSequence>& batch) {
  const double loss = nll_loss_and_grad(batch);
  adam_.step(params_);
  return loss;
}

double Generator::mean_nll(const std::vector<TokenSequence>& batch) const {
  if (batch.empty()) throw std::invalid_argument("nll: batch is empty");
  ForwardPlan plan = make_plan(batch);
  plan.weights /= plan.weights.sum();
  return const_cast<Generator*>(this)->weighted_nll(plan, false);
}

double Generator::perplexity(const std::vector<TokenSequence>& batch) const {
  return std::exp(mean_nll(batch));
}

Eigen::VectorXd Generator::step_distribution(const Eigen::VectorXd& h) const {
  Eigen::VectorXd logits = (Wo_->value * h + bo_->value.col(0)) / cfg_.temperature;
  const auto sm = masked_logsumexp(logits);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(cfg_.vocab_size);
  p.segment(1, cfg_.vocab_size - 1) =
      (logits.segment(1, cfg_.vocab_size - 1).array() - sm.max_logit - sm.log_denom).exp();
  return p;
}

GenerationBatch Generator::sample(int n, int max_len, Rng& rng) const {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  if (max_len < 3) throw std::invalid_argument("sample: max_len must be >= 3");
  const int budget = max_len - 2;  // content tokens, mirroring encode()
  const int H = cfg_.hidden_dim;
  const int E = cfg_.emb_dim;

  GenerationBatch out;
  out.sequences.resize(static_cast<std::size_t>(n));
  out.step_log_probs.resize(static_cast<std::size_t>(n));
  out.complete.assign(static_cast<std::size_t>(n), 0);

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(H, n);
  Eigen::VectorXi last = Eigen::VectorXi::Constant(n, kBosId);
  std::vector<char> active(static_cast<std::size_t>(n), 1);
  std::vector<int> content(static_cast<std::size_t>(n), 0);
  Eigen::MatrixXd x(E, n);
  int n_active = n;

  while (n_active > 0) {
    for (int b = 0; b < n; ++b) x.col(b) = emb_->value.row(last[b]).transpose();
    h = cell_.forward(x, h, nullptr);
    for (int b = 0; b < n; ++b) {
      if (!active[static_cast<std::size_t>(b)]) continue;
      const Eigen::VectorXd p = step_distribution(h.col(b));
      const int token = rng.categorical(p);
      out.sequences[static_cast<std::size_t>(b)].ids.push_back(token);
      out.step_log_probs[static_cast<std::size_t>(b)].push_back(
          std::min(std::log(p[token]), 0.0));
      last[b] = token;
      if (token == kEosId) {
        out.complete[static_cast<std::size_t>(b)] = 1;
        active[static_cast<std::size_t>(b)] = 0;
        --n_active;
      } else if (++content[static_cast<std::size_t>(b)] >= budget) {
        active[static_cast<std::size_t>(b)] = 0;  // budget exhausted, no EOS
        --n_active;
      }
    }
  }
  for (auto& seq : out.sequences) seq.length = static_cast<int>(seq.ids.size());
  return out;
}

std::vector<TokenSequence> Generator::rollout(const TokenSequence& prefix, int k, int max_len,
                                              Rng& rng) const {
  if (k < 1) throw std::invalid_argument("rollout: k must be >= 1");
  if (prefix.length < 1 || prefix.ids[0] != kBosId)
    throw std::invalid_argument("rollout: prefix must start with BOS");
  for (int i = 0; i < prefix.length; ++i)
    if (prefix.ids[static_cast<std::size_t>(i)] == kEosId)
      throw std::invalid_argument("rollout: prefix is already complete");
  const int budget = max_len - 2;
  const int prefix_content = prefix.length - 1;
  if (prefix_content > budget) throw std::invalid_argument("rollout: prefix exceeds max_len");

  // consume the prefix once, then fan out k lanes from that state
  Eigen::MatrixXd h1 = Eigen::MatrixXd::Zero(cfg_.hidden_dim, 1);
  for (int t = 0; t < prefix.length - 1; ++t) {
    Eigen::MatrixXd x = emb_->value.row(prefix.ids[static_cast<std::size_t>(t)]).transpose();
    h1 = cell_.forward(x, h1, nullptr);
  }
  Eigen::MatrixXd h = h1.replicate(1, k);
  Eigen::VectorXi last =
      Eigen::VectorXi::Constant(k, prefix.ids[static_cast<std::size_t>(prefix.length - 1)]);

  std::vector<TokenSequence> out(static_cast<std::size_t>(k));
  for (auto& seq : out)
    seq.ids.assign(prefix.ids.begin() + 1, prefix.ids.begin() + prefix.length);

  std::vector<char> active(static_cast<std::size_t>(k), 1);
  std::vector<int> content(static_cast<std::size_t>(k), prefix_content);
  Eigen::MatrixXd x(cfg_.emb_dim, k);
  int n_active = k;

  while (n_active > 0) {
    // lanes at the content budget can only terminate
    for (int b = 0; b < k; ++b) {
      if (active[static_cast<std::size_t>(b)] && content[static_cast<std::size_t>(b)] >= budget) {
        out[static_cast<std::size_t>(b)].ids.push_back(kEosId);
        active[static_cast<std::size_t>(b)] = 0;
        --n_active;
      }
    }
    if (n_active == 0) break;
    for (int b = 0; b < k; ++b) x.col(b) = emb_->value.row(last[b]).transpose();
    h = cell_.forward(x, h, nullptr);
    for (int b = 0; b < k; ++b) {
      if (!active[static_cast<std::size_t>(b)]) continue;
      const Eigen::VectorXd p = step_distribution(h.col(b));
      const int token = rng.categorical(p);
      out[static_cast<std::size_t>(b)].ids.push_back(token);
      last[b] = token;
      if (token == kEosId) {
        active[static_cast<std::size_t>(b)] = 0;
        --n_active;
      } else {
        ++content[static_cast<std::size_t>(b)];
      }
    }
  }
  for (auto& seq : out) seq.length = static_cast<int>(seq.ids.size());
  return out;
}

double Generator::reinforce_loss_and_grad(const GenerationBatch& batch,
                                          const std::vector<RewardVector>& rewards,
                                          double baseline) {
  if (batch.size() == 0) throw std::invalid_argument("reinforce: empty batch");
  if (rewards.size() != batch.size())
    throw std::invalid_argument("reinforce: rewards/batch size mismatch");
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (static_cast<int>(rewards[i].values.size()) != batch.sequences[i].length)
      throw std::invalid_argument("reinforce: reward vector length mismatch at sequence " +
                                  std::to_string(i));
  }

  ForwardPlan plan = make_plan(batch.sequences);
  double total_steps = 0;
  for (int c : plan.step_counts) total_steps += c;
  for (int b = 0; b < plan.batch_size; ++b) {
    for (int t = 0; t < plan.step_counts[static_cast<std::size_t>(b)]; ++t) {
      plan.weights(t, b) =
          (rewards[static_cast<std::size_t>(b)].values[static_cast<std::size_t>(t)] - baseline) /
          total_steps;
    }
  }
  params_.zero_grad();
  return weighted_nll(plan, true);
}

double Generator::reinforce_step(const GenerationBatch& batch,
                                 const std::vector<RewardVector>& rewards, double baseline) {
  const double loss = reinforce_loss_and_grad(batch, rewards, baseline);
  adam_.step(params_);
  return loss;
}

double Generator::sequence_log_prob(const TokenSequence& actions) const {
  ForwardPlan plan = make_plan({actions});
  const double nll = const_cast<Generator*>(this)->weighted_nll(plan, false);
  return -nll;  // weights are 1, so this is the summed log-prob
}

Eigen::VectorXd Generator::next_token_distribution(const std::vector<TokenId>& prefix) const {
  if (prefix.empty() || prefix[0] != kBosId)
    throw std::invalid_argument("next_token_distribution: prefix must start with BOS");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(cfg_.hidden_dim, 1);
  for (TokenId id : prefix) {
    Eigen::MatrixXd x = emb_->value.row(id).transpose();
    h = cell_.forward(x, h, nullptr);
  }
  return step_distribution(h.col(0));
}

int load_pretrained_embeddings(const std::string& path, const Vocabulary& vocab,
                               Generator& generator) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("embeddings: cannot open " + path);
  const int dim = generator.config().emb_dim;
  std::string line;
  int line_no = 0, loaded = 0;
  Eigen::VectorXd vec(dim);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    bool ok = true;
    for (int i = 0; i < dim; ++i) {
      if (!(ss >> vec[i])) {
        ok = false;
        break;
      }
    }
    double extra;
    if (!ok || (ss >> extra))
      throw std::runtime_error("embeddings: " + path + ":" + std::to_string(line_no) +
                               ": expected word followed by " + std::to_string(dim) + " values");
    if (vocab.contains(word)) {
      generator.set_embedding_row(vocab.id(word), vec);
      ++loaded;
    }
  }
  return loaded;
}

}  // namespace oodgen
