#pragma once

#include <vector>

namespace oodgen {

enum class RewardSource { discriminator, classifier };

// Per-timestep scalar rewards for one sampled sequence, aligned with the
// sequence's actions (values.size() == sequence length).
struct RewardVector {
  std::vector<double> values;
  RewardSource source = RewardSource::discriminator;
};

}  // namespace oodgen
