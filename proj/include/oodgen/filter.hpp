#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "oodgen/types.hpp"

namespace oodgen {

enum class SimilarityMetric { jaccard, edit };

SimilarityMetric similarity_metric_from_string(const std::string& s);

struct FilterConfig {
  SimilarityMetric metric = SimilarityMetric::jaccard;
  double threshold = 0.8;  // tau; items with max IND similarity >= tau are dropped
  bool dedupe = true;
};

// Token-multiset Jaccard overlap: |a n b| / |a u b| with multiset counts.
// The edit variant is 1 - levenshtein(a, b) / max(|a|, |b|) at token level.
// Both are in [0, 1]; identical inputs give 1, token-disjoint inputs 0.
double similarity(const std::vector<TokenId>& a, const std::vector<TokenId>& b,
                  SimilarityMetric metric = SimilarityMetric::jaccard);
double similarity(const std::vector<std::string>& a, const std::vector<std::string>& b,
                  SimilarityMetric metric = SimilarityMetric::jaccard);

struct FilterReport {
  std::size_t input_count = 0;
  std::size_t accepted = 0;
  std::size_t rejected_duplicate = 0;
  std::size_t rejected_near_ind = 0;
  std::size_t rejected_empty = 0;

  std::string summary() const;
};

struct FilterResult {
  std::vector<std::size_t> accepted_indices;  // into the generated list, order kept
  FilterReport report;
};

// Drops generated items that are (i) exact duplicates of an earlier generated
// item (when cfg.dedupe), (ii) at least cfg.threshold similar to any IND
// utterance, or (iii) empty. Inputs are content-token lists.
FilterResult filter_generated(const std::vector<std::vector<TokenId>>& generated,
                              const std::vector<std::vector<TokenId>>& ind_corpus,
                              const FilterConfig& cfg);

}  // namespace oodgen
