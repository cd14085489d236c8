#include "oodgen/trainer.hpp"

#include "oodgen/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace oodgen {

Trainer::Trainer(const TrainConfig& cfg, LoadedData data)
    : cfg_(cfg),
      data_(std::move(data)),
      train_rng_(0),
      disc_baseline_(cfg.adversarial.baseline_window),
      entropy_baseline_(cfg.adversarial.baseline_window) {
  Rng master(cfg_.seed);
  Rng init_gen = master.fork(1);
  Rng init_disc = master.fork(2);
  Rng init_cls = master.fork(3);
  train_rng_ = master.fork(4);

  GeneratorConfig gc;
  gc.vocab_size = data_.vocab.size();
  gc.emb_dim = cfg_.generator.emb_dim;
  gc.hidden_dim = cfg_.generator.hidden_dim;
  gc.lr = cfg_.generator.lr;
  gc.temperature = cfg_.generator.temperature;
  generator_ = std::make_unique<Generator>(gc, init_gen);
  if (!cfg_.generator.embeddings_path.empty()) {
    const int loaded =
        load_pretrained_embeddings(cfg_.generator.embeddings_path, data_.vocab, *generator_);
    std::fprintf(stderr, "generator: loaded %d pretrained embedding vectors\n", loaded);
  }

  DiscriminatorConfig dc;
  dc.vocab_size = data_.vocab.size();
  dc.emb_dim = cfg_.discriminator.emb_dim;
  dc.hidden_dim = cfg_.discriminator.hidden_dim;
  dc.lr = cfg_.discriminator.lr;
  discriminator_ = std::make_unique<Discriminator>(dc, init_disc);

  ClassifierConfig cc;
  cc.vocab_size = data_.vocab.size();
  cc.num_classes = data_.split.num_classes();
  cc.emb_dim = cfg_.classifier.emb_dim;
  cc.filters_per_width = cfg_.classifier.filters_per_width;
  cc.dense_dim = cfg_.classifier.dense_dim;
  cc.dropout = cfg_.classifier.dropout;
  cc.leaky_slope = cfg_.classifier.leaky_slope;
  cc.lr = cfg_.classifier.lr;
  classifier_ = std::make_unique<CnnClassifier>(cc, init_cls);
}

std::vector<TokenSequence> Trainer::train_sequences() const {
  std::vector<TokenSequence> seqs;
  seqs.reserve(data_.split.train.size());
  for (const auto& ex : data_.split.train) seqs.push_back(ex.sequence);
  return seqs;
}

FitResult Trainer::pretrain_classifier() {
  if (data_.split.num_classes() < 2)
    throw std::invalid_argument("pretrain_classifier: need at least 2 intent classes");
  DetectorTrainConfig dc;
  dc.lambda = 0.0;  // plain cross-entropy training
  dc.batch_size = cfg_.pretrain.batch_size;
  dc.max_epochs = cfg_.pretrain.classifier_max_epochs;
  dc.patience = cfg_.pretrain.patience;
  FitResult r =
      train_detector(*classifier_, data_.split.train, data_.split.valid, {}, dc, train_rng_);
  classifier_pretrained_ = true;
  return r;
}

FitResult Trainer::pretrain_generator() {
  const auto train = train_sequences();
  std::vector<TokenSequence> valid;
  valid.reserve(data_.split.valid.size());
  for (const auto& ex : data_.split.valid) valid.push_back(ex.sequence);
  if (train.empty() || valid.empty())
    throw std::invalid_argument("pretrain_generator: empty split");

  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);

  FitResult result;
  std::vector<double> best_params = generator_->params().flatten_values();
  double best_ppl = std::numeric_limits<double>::infinity();
  int bad = 0;
  for (int epoch = 1; epoch <= cfg_.pretrain.generator_max_epochs; ++epoch) {
    train_rng_.shuffle(idx);
    double loss_sum = 0.0;
    int steps = 0;
    for (std::size_t start = 0; start < idx.size();
         start += static_cast<std::size_t>(cfg_.pretrain.batch_size)) {
      const std::size_t stop =
          std::min(idx.size(), start + static_cast<std::size_t>(cfg_.pretrain.batch_size));
      std::vector<TokenSequence> batch;
      batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) batch.push_back(train[idx[i]]);
      loss_sum += generator_->nll_step(batch);
      ++steps;
    }
    result.final_train_loss = loss_sum / std::max(steps, 1);
    result.epochs_run = epoch;

    const double ppl = generator_->perplexity(valid);
    if (ppl < best_ppl) {
      best_ppl = ppl;
      best_params = generator_->params().flatten_values();
      result.best_epoch = epoch;
      bad = 0;
    } else if (++bad >= cfg_.pretrain.patience) {
      break;
    }
  }
  generator_->params().set_values(best_params);
  result.best_metric = best_ppl;
  generator_pretrained_ = true;
  return result;
}

double Trainer::pretrain_discriminator() {
  if (!generator_pretrained_)
    throw std::logic_error("pretrain_discriminator: generator must be pretrained first");
  const auto train = train_sequences();
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);

  double last_loss = 0.0;
  for (int epoch = 1; epoch <= cfg_.pretrain.discriminator_epochs; ++epoch) {
    train_rng_.shuffle(idx);
    for (std::size_t start = 0; start < idx.size();
         start += static_cast<std::size_t>(cfg_.pretrain.batch_size)) {
      const std::size_t stop =
          std::min(idx.size(), start + static_cast<std::size_t>(cfg_.pretrain.batch_size));
      std::vector<TokenSequence> real;
      real.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) real.push_back(train[idx[i]]);
      const GenerationBatch fake =
          generator_->sample(static_cast<int>(real.size()), cfg_.data.max_len, train_rng_);
      last_loss = discriminator_->train_step(real, fake.sequences);
    }
  }
  discriminator_pretrained_ = true;
  return last_loss;
}

std::vector<RewardVector> Trainer::compute_rewards(const GenerationBatch& batch,
                                                   RewardSource source, int k) {
  if (k < 1) throw std::invalid_argument("compute_rewards: k must be >= 1");
  const bool terminal_only = source == RewardSource::classifier &&
                             cfg_.adversarial.reward_attribution == "terminal_only";
  const auto terminal_score = [&](const TokenSequence& seq) {
    return source == RewardSource::discriminator ? discriminator_->score(seq)
                                                 : classifier_->entropy_reward(seq);
  };

  std::vector<RewardVector> rewards(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const TokenSequence& seq = batch.sequences[i];
    RewardVector& rv = rewards[i];
    rv.source = source;
    rv.values.resize(static_cast<std::size_t>(seq.length));

    const double direct = terminal_score(seq);
    rv.values.back() = direct;
    if (terminal_only) {
      std::fill(rv.values.begin(), rv.values.end(), direct);
      continue;
    }
    // Monte Carlo attribution for intermediate steps.
    TokenSequence prefix;
    prefix.ids.reserve(static_cast<std::size_t>(seq.length) + 1);
    prefix.ids.push_back(kBosId);
    for (int t = 0; t + 1 < seq.length; ++t) {
      prefix.ids.push_back(seq.ids[static_cast<std::size_t>(t)]);
      prefix.length = t + 2;
      const auto completions = generator_->rollout(prefix, k, cfg_.data.max_len, train_rng_);
      double sum = 0.0;
      for (const auto& comp : completions) sum += terminal_score(comp);
      rv.values[static_cast<std::size_t>(t)] = sum / static_cast<double>(k);
    }
  }
  return rewards;
}

double Trainer::duplicate_fraction(const GenerationBatch& batch) {
  std::set<std::vector<TokenId>> unique;
  for (const auto& seq : batch.sequences)
    unique.insert(std::vector<TokenId>(seq.ids.begin(), seq.ids.begin() + seq.length));
  return 1.0 - static_cast<double>(unique.size()) / static_cast<double>(batch.size());
}

void Trainer::check_collapse(const GenerationBatch& batch) const {
  const double frac = duplicate_fraction(batch);
  if (frac > cfg_.adversarial.collapse_duplicate_fraction) {
    std::ostringstream msg;
    msg << "generator collapse: duplicate fraction " << frac << " exceeds "
        << cfg_.adversarial.collapse_duplicate_fraction << "; sample: '"
        << data_.vocab.decode(batch.sequences.front()) << "'";
    throw CollapseError(msg.str());
  }
}

AdversarialEpochStats Trainer::adversarial_epoch() {
  if (!classifier_pretrained_ || !generator_pretrained_ || !discriminator_pretrained_)
    throw std::logic_error("adversarial_epoch: all three models must be pretrained");

  const auto train = train_sequences();
  std::vector<std::size_t> idx(train.size());
  std::iota(idx.begin(), idx.end(), 0);
  train_rng_.shuffle(idx);

  const int B = cfg_.adversarial.batch_size;
  const int k = cfg_.adversarial.rollout_k;
  AdversarialEpochStats stats;
  stats.epoch = ++adv_epochs_done_;
  int batches = 0;

  const auto mean_reward = [](const std::vector<RewardVector>& rs) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : rs) {
      for (double v : r.values) sum += v;
      n += r.values.size();
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
  };

  for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(B)) {
    const std::size_t stop = std::min(idx.size(), start + static_cast<std::size_t>(B));
    std::vector<TokenSequence> real;
    real.reserve(stop - start);
    for (std::size_t i = start; i < stop; ++i) real.push_back(train[idx[i]]);
    const int n = static_cast<int>(real.size());

    // (a) generator step on discriminator rewards
    GenerationBatch ga = generator_->sample(n, cfg_.data.max_len, train_rng_);
    check_collapse(ga);
    const auto ra = compute_rewards(ga, RewardSource::discriminator, k);
    stats.policy_loss_disc += generator_->reinforce_step(ga, ra, disc_baseline_.mean());
    ++stats.generator_updates;
    const double mra = mean_reward(ra);
    disc_baseline_.push(mra);
    stats.mean_disc_reward += mra;
    stats.max_duplicate_fraction = std::max(stats.max_duplicate_fraction, duplicate_fraction(ga));

    // (b) generator step on classifier entropy rewards, fresh sample
    GenerationBatch gb = generator_->sample(n, cfg_.data.max_len, train_rng_);
    check_collapse(gb);
    const auto rb = compute_rewards(gb, RewardSource::classifier, k);
    stats.policy_loss_entropy += generator_->reinforce_step(gb, rb, entropy_baseline_.mean());
    ++stats.generator_updates;
    const double mrb = mean_reward(rb);
    entropy_baseline_.push(mrb);
    stats.mean_entropy_reward += mrb;
    stats.max_duplicate_fraction = std::max(stats.max_duplicate_fraction, duplicate_fraction(gb));

    // (c) discriminator step on real vs fresh samples
    GenerationBatch gc = generator_->sample(n, cfg_.data.max_len, train_rng_);
    stats.disc_loss += discriminator_->train_step(real, gc.sequences);
    ++stats.discriminator_updates;
    ++batches;
  }

  stats.batches = batches;
  if (batches > 0) {
    stats.policy_loss_disc /= batches;
    stats.policy_loss_entropy /= batches;
    stats.disc_loss /= batches;
    stats.mean_disc_reward /= batches;
    stats.mean_entropy_reward /= batches;
  }
  return stats;
}

double Trainer::downstream_fpr95_probe() {
  // Small detector trained on generated OOD, scored against validation IND
  // plus a fresh generated OOD slice standing in for unseen OOD.
  const int quota = std::min<int>(static_cast<int>(data_.split.train.size()),
                                  std::max<int>(128, static_cast<int>(data_.split.valid.size())));
  FilterReport report;
  const auto fc = cfg_.filter_config();
  std::vector<std::vector<TokenId>> ind_content;
  ind_content.reserve(data_.split.train.size());
  for (const auto& ex : data_.split.train) ind_content.push_back(ex.sequence.content());
  auto ood = generate_filtered_ood(*generator_, ind_content, quota, fc,
                                   cfg_.filter.max_rounds, cfg_.data.max_len, train_rng_,
                                   &report);

  ClassifierConfig cc = classifier_->config();
  Rng probe_init = train_rng_.fork(91);
  Rng probe_train = train_rng_.fork(92);
  CnnClassifier probe(cc, probe_init);
  DetectorTrainConfig dc;
  dc.lambda = cfg_.detector.lambda;
  dc.batch_size = cfg_.detector.batch_size;
  dc.max_epochs = std::min(cfg_.detector.max_epochs, 15);
  dc.patience = 3;
  dc.val_ood_fraction = cfg_.detector.val_ood_fraction;
  train_detector(probe, data_.split.train, data_.split.valid, ood, dc, probe_train);

  const std::size_t n_eval = std::max<std::size_t>(ood.size() / 5, 1);
  std::vector<TokenSequence> ood_eval(ood.end() - static_cast<std::ptrdiff_t>(n_eval),
                                      ood.end());
  const auto scores = score_dataset(probe, data_.split.valid, ood_eval);
  return fpr_at_tpr(scores, 0.95);
}

void Trainer::run(const LogSink& sink) {
  const auto log = [&](const std::string& line) {
    if (sink) sink(line);
  };
  const auto jnum = [](double v) {
    std::ostringstream ss;
    ss.precision(8);
    ss << v;
    return ss.str();
  };

  const FitResult cls = pretrain_classifier();
  log("{\"phase\":\"pretrain_classifier\",\"epochs\":" + std::to_string(cls.epochs_run) +
      ",\"best_epoch\":" + std::to_string(cls.best_epoch) +
      ",\"val_accuracy\":" + jnum(cls.best_metric) + "}");

  const FitResult gen = pretrain_generator();
  log("{\"phase\":\"pretrain_generator\",\"epochs\":" + std::to_string(gen.epochs_run) +
      ",\"best_epoch\":" + std::to_string(gen.best_epoch) +
      ",\"val_perplexity\":" + jnum(gen.best_metric) + "}");

  const double dloss = pretrain_discriminator();
  log("{\"phase\":\"pretrain_discriminator\",\"epochs\":" +
      std::to_string(cfg_.pretrain.discriminator_epochs) + ",\"final_loss\":" + jnum(dloss) +
      "}");

  // Classifier freeze contract for phase 4.
  const std::vector<double> frozen = classifier_->params().flatten_values();

  std::vector<double> best_gen = generator_->params().flatten_values();
  std::vector<double> best_disc = discriminator_->params().flatten_values();
  double best_fpr95 = std::numeric_limits<double>::infinity();
  int probes_without_improvement = 0;
  bool stopped_early = false;

  for (int epoch = 1; epoch <= cfg_.adversarial.epochs; ++epoch) {
    const AdversarialEpochStats s = adversarial_epoch();
    log("{\"phase\":\"adversarial\",\"epoch\":" + std::to_string(s.epoch) +
        ",\"policy_loss_disc\":" + jnum(s.policy_loss_disc) +
        ",\"policy_loss_entropy\":" + jnum(s.policy_loss_entropy) +
        ",\"disc_loss\":" + jnum(s.disc_loss) +
        ",\"mean_disc_reward\":" + jnum(s.mean_disc_reward) +
        ",\"mean_entropy_reward\":" + jnum(s.mean_entropy_reward) +
        ",\"max_duplicate_fraction\":" + jnum(s.max_duplicate_fraction) + "}");

    if (cfg_.adversarial.eval_every > 0 && epoch % cfg_.adversarial.eval_every == 0) {
      const double fpr95 = downstream_fpr95_probe();
      log("{\"phase\":\"adversarial_probe\",\"epoch\":" + std::to_string(epoch) +
          ",\"val_fpr95\":" + jnum(fpr95) + "}");
      if (fpr95 < best_fpr95) {
        best_fpr95 = fpr95;
        best_gen = generator_->params().flatten_values();
        best_disc = discriminator_->params().flatten_values();
        probes_without_improvement = 0;
      } else if (++probes_without_improvement >= cfg_.adversarial.eval_patience) {
        stopped_early = true;
        break;
      }
    }
  }
  if (cfg_.adversarial.eval_every > 0 && best_fpr95 < std::numeric_limits<double>::infinity()) {
    generator_->params().set_values(best_gen);
    discriminator_->params().set_values(best_disc);
  }
  log(std::string("{\"phase\":\"adversarial_done\",\"early_stop\":") +
      (stopped_early ? "true" : "false") + "}");

  const std::vector<double> after = classifier_->params().flatten_values();
  if (after != frozen)
    throw std::logic_error("trainer: auxiliary classifier changed during adversarial training");
}

std::vector<TokenSequence> generate_filtered_ood(
    Generator& generator, const std::vector<std::vector<TokenId>>& ind_content, int quota,
    const FilterConfig& cfg, int max_rounds, int max_len, Rng& rng, FilterReport* report_out) {
  if (quota < 1) throw std::invalid_argument("generate: quota must be >= 1");
  if (ind_content.empty()) throw std::invalid_argument("generate: IND corpus is empty");

  FilterReport report;
  std::vector<TokenSequence> accepted;
  std::set<std::vector<TokenId>> seen;

  for (int round = 0; round < max_rounds && static_cast<int>(accepted.size()) < quota;
       ++round) {
    const int remaining = quota - static_cast<int>(accepted.size());
    const int n = std::clamp(remaining * 2, 32, 2048);
    const GenerationBatch batch = generator.sample(n, max_len, rng);
    for (const auto& seq : batch.sequences) {
      if (static_cast<int>(accepted.size()) >= quota) break;
      ++report.input_count;
      const auto content = seq.content();
      if (content.empty()) {
        ++report.rejected_empty;
        continue;
      }
      if (cfg.dedupe && !seen.insert(content).second) {
        ++report.rejected_duplicate;
        continue;
      }
      bool near = false;
      for (const auto& ind : ind_content) {
        if (similarity(content, ind, cfg.metric) >= cfg.threshold) {
          near = true;
          break;
        }
      }
      if (near) {
        ++report.rejected_near_ind;
        continue;
      }
      accepted.push_back(seq);
      ++report.accepted;
    }
  }
  if (report_out) *report_out = report;
  if (static_cast<int>(accepted.size()) < quota)
    throw std::runtime_error("generate: quota " + std::to_string(quota) + " not met after " +
                             std::to_string(max_rounds) + " rounds (" + report.summary() + ")");
  return accepted;
}

}  // namespace oodgen
