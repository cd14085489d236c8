#include "oodgen/detector.hpp"

#include "oodgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace oodgen {

namespace {

double eval_ce(const CnnClassifier& model, const std::vector<LabeledExample>& data) {
  double loss = 0.0;
  for (const auto& ex : data) {
    const Eigen::VectorXd p = model.predict(ex.sequence);
    loss -= std::log(std::max(p[ex.label], 1e-300));
  }
  return loss / static_cast<double>(data.size());
}

double eval_neg_entropy(const CnnClassifier& model, const std::vector<TokenSequence>& data) {
  double loss = 0.0;
  for (const auto& seq : data) loss -= shannon_entropy(model.predict(seq));
  return loss / static_cast<double>(data.size());
}

}  // namespace

FitResult train_detector(CnnClassifier& model, const std::vector<LabeledExample>& train_ind,
                         const std::vector<LabeledExample>& valid_ind,
                         const std::vector<TokenSequence>& ood, const DetectorTrainConfig& cfg,
                         Rng& rng) {
  if (train_ind.empty() || valid_ind.empty())
    throw std::invalid_argument("detector: IND train and valid sets must be non-empty");
  const bool use_ood = cfg.lambda > 0.0;
  if (use_ood && ood.empty())
    throw std::invalid_argument("detector: lambda > 0 requires OOD training data");

  std::vector<TokenSequence> ood_train, ood_val;
  if (use_ood) {
    std::size_t n_val = static_cast<std::size_t>(
        std::llround(cfg.val_ood_fraction * static_cast<double>(ood.size())));
    n_val = std::min(std::max<std::size_t>(n_val, 1), ood.size() - 1);
    ood_train.assign(ood.begin(), ood.end() - static_cast<std::ptrdiff_t>(n_val));
    ood_val.assign(ood.end() - static_cast<std::ptrdiff_t>(n_val), ood.end());
    if (ood_train.empty()) throw std::invalid_argument("detector: OOD corpus too small");
  }

  std::vector<std::size_t> idx(train_ind.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::size_t> ood_idx(ood_train.size());
  std::iota(ood_idx.begin(), ood_idx.end(), 0);

  FitResult result;
  std::vector<double> best_params = model.params().flatten_values();
  double best_metric = -std::numeric_limits<double>::infinity();
  int bad_epochs = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(idx);
    if (use_ood) rng.shuffle(ood_idx);

    double epoch_loss = 0.0;
    int steps = 0;
    std::size_t ood_cursor = 0;
    for (std::size_t start = 0; start < idx.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(idx.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<LabeledExample> ind_batch;
      ind_batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) ind_batch.push_back(train_ind[idx[i]]);

      std::vector<TokenSequence> ood_batch;
      if (use_ood) {
        for (std::size_t i = 0; i < stop - start; ++i) {
          ood_batch.push_back(ood_train[ood_idx[ood_cursor]]);
          ood_cursor = (ood_cursor + 1) % ood_idx.size();
        }
      }
      epoch_loss += model.detector_step(ind_batch, ood_batch, cfg.lambda, rng);
      ++steps;
    }
    result.final_train_loss = epoch_loss / std::max(steps, 1);
    result.epochs_run = epoch;

    const double metric =
        use_ood ? -(eval_ce(model, valid_ind) + cfg.lambda * eval_neg_entropy(model, ood_val))
                : model.accuracy(valid_ind);
    if (metric >= best_metric) {  // ties keep the most-converged epoch
      best_params = model.params().flatten_values();
      result.best_epoch = epoch;
    }
    if (metric > best_metric) {
      best_metric = metric;
      bad_epochs = 0;
    } else if (++bad_epochs >= cfg.patience) {
      break;
    }
  }
  model.params().set_values(best_params);
  result.best_metric = best_metric;
  return result;
}

DetectionScores score_dataset(const CnnClassifier& model,
                              const std::vector<LabeledExample>& ind,
                              const std::vector<TokenSequence>& ood) {
  DetectionScores scores;
  scores.reserve(ind.size() + ood.size());
  const auto score_one = [&](const TokenSequence& seq, bool is_ood, int true_label) {
    const Eigen::VectorXd p = model.predict(seq);
    DetectionRecord r;
    r.is_ood = is_ood;
    r.true_label = true_label;
    r.pred_label = 0;
    for (int i = 1; i < p.size(); ++i)
      if (p[i] > p[r.pred_label]) r.pred_label = i;
    r.score = p[r.pred_label];
    scores.push_back(r);
  };
  for (const auto& ex : ind) score_one(ex.sequence, false, ex.label);
  for (const auto& seq : ood) score_one(seq, true, -1);
  return scores;
}

ThresholdChoice select_threshold(const DetectionScores& validation) {
  bool has_ood = false, has_ind = false;
  for (const auto& r : validation) (r.is_ood ? has_ood : has_ind) = true;
  if (!has_ood || !has_ind)
    throw std::invalid_argument("select_threshold: validation needs both IND and OOD");

  std::vector<double> uniq;
  uniq.reserve(validation.size());
  for (const auto& r : validation) uniq.push_back(r.score);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());

  struct Candidate {
    double t;
    bool midpoint;
  };
  std::vector<Candidate> candidates;
  candidates.push_back({0.0, false});
  candidates.push_back({1.0, false});
  for (double u : uniq) candidates.push_back({u, false});
  for (std::size_t i = 0; i + 1 < uniq.size(); ++i)
    candidates.push_back({0.5 * (uniq[i] + uniq[i + 1]), true});
  const double top = uniq.back();
  candidates.push_back({top >= 1.0 ? std::nextafter(top, 2.0) : 0.5 * (top + 1.0), false});

  std::vector<double> grid;
  grid.reserve(candidates.size());
  for (const auto& c : candidates) grid.push_back(c.t);
  const auto curve = joint_accuracy_curve(validation, grid);

  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double ja = curve[i].second, best_ja = curve[best].second;
    if (ja > best_ja) {
      best = i;
    } else if (ja == best_ja) {
      if (candidates[i].midpoint != candidates[best].midpoint) {
        if (candidates[i].midpoint) best = i;
      } else if (curve[i].first > curve[best].first) {
        best = i;
      }
    }
  }
  return {curve[best].first, curve[best].second};
}

}  // namespace oodgen
