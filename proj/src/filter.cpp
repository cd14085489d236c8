#include "oodgen/filter.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace oodgen {

SimilarityMetric similarity_metric_from_string(const std::string& s) {
  if (s == "jaccard") return SimilarityMetric::jaccard;
  if (s == "edit") return SimilarityMetric::edit;
  throw std::invalid_argument("unknown similarity metric: " + s);
}

namespace {

template <typename T>
double multiset_jaccard(const std::vector<T>& a, const std::vector<T>& b) {
  std::map<T, int> ca, cb;
  for (const auto& x : a) ++ca[x];
  for (const auto& x : b) ++cb[x];
  std::size_t inter = 0, uni = 0;
  for (const auto& [k, n] : ca) {
    auto it = cb.find(k);
    const int m = it == cb.end() ? 0 : it->second;
    inter += static_cast<std::size_t>(std::min(n, m));
    uni += static_cast<std::size_t>(std::max(n, m));
  }
  for (const auto& [k, m] : cb) {
    if (!ca.count(k)) uni += static_cast<std::size_t>(m);
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

template <typename T>
double edit_similarity(const std::vector<T>& a, const std::vector<T>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  const double denom = static_cast<double>(std::max(n, m));
  return 1.0 - static_cast<double>(prev[m]) / denom;
}

template <typename T>
double similarity_impl(const std::vector<T>& a, const std::vector<T>& b,
                       SimilarityMetric metric) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("similarity: inputs must be non-empty");
  return metric == SimilarityMetric::jaccard ? multiset_jaccard(a, b) : edit_similarity(a, b);
}

}  // namespace

double similarity(const std::vector<TokenId>& a, const std::vector<TokenId>& b,
                  SimilarityMetric metric) {
  return similarity_impl(a, b, metric);
}

double similarity(const std::vector<std::string>& a, const std::vector<std::string>& b,
                  SimilarityMetric metric) {
  return similarity_impl(a, b, metric);
}

std::string FilterReport::summary() const {
  return "input=" + std::to_string(input_count) + " accepted=" + std::to_string(accepted) +
         " duplicates=" + std::to_string(rejected_duplicate) +
         " near_ind=" + std::to_string(rejected_near_ind) +
         " empty=" + std::to_string(rejected_empty);
}

FilterResult filter_generated(const std::vector<std::vector<TokenId>>& generated,
                              const std::vector<std::vector<TokenId>>& ind_corpus,
                              const FilterConfig& cfg) {
  if (ind_corpus.empty()) throw std::invalid_argument("filter: IND corpus is empty");
  if (cfg.threshold < 0.0 || cfg.threshold > 1.0)
    throw std::invalid_argument("filter: threshold must be in [0, 1]");

  FilterResult result;
  result.report.input_count = generated.size();
  std::set<std::vector<TokenId>> seen;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const auto& item = generated[i];
    if (item.empty()) {
      ++result.report.rejected_empty;
      continue;
    }
    if (cfg.dedupe && !seen.insert(item).second) {
      ++result.report.rejected_duplicate;
      continue;
    }
    double max_sim = 0.0;
    for (const auto& ind : ind_corpus) {
      max_sim = std::max(max_sim, similarity(item, ind, cfg.metric));
      if (max_sim >= cfg.threshold) break;
    }
    if (max_sim >= cfg.threshold) {
      ++result.report.rejected_near_ind;
      continue;
    }
    result.accepted_indices.push_back(i);
    ++result.report.accepted;
  }
  return result;
}

}  // namespace oodgen
