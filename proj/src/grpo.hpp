#pragma once

#include <span>
#include <string>
#include <vector>

namespace rlvr {

struct GrpoConfig {
  int group_size = 8;
  double clip_epsilon = 0.2;
  double kl_coeff = 0.001;
  double entropy_coeff = 0.001;
  double learning_rate = 5e-8;
  long max_generation_tokens = 31744;

  void validate() const;
};

// One prompt's sampled group. Per-token sequences are aligned with outputs;
// new_entropies may be left empty when the entropy term is unused (treated
// as zero per token).
struct TrajectoryGroup {
  std::string prompt;
  std::vector<std::vector<int>> outputs;
  std::vector<std::vector<double>> old_logprobs;
  std::vector<std::vector<double>> new_logprobs;
  std::vector<std::vector<double>> new_entropies;
  std::vector<double> rewards;
  std::vector<bool> clipped_flags;

  void validate(int group_size) const;
};

struct AdvantageSet {
  std::vector<double> values;
};

// (R_i - mean) / population std; all zeros when the group is degenerate.
AdvantageSet group_advantages(std::span<const double> rewards, int group_size);

double clipped_surrogate(double ratio, double advantage, double epsilon);

// Per-token k3 estimator: exp(old - new) - (old - new) - 1.
double kl_estimate(double new_logprob, double old_logprob);

// -sum p log p with 0 log 0 = 0.
double entropy_estimate(std::span<const double> token_distribution);

double grpo_objective(const TrajectoryGroup& group, const AdvantageSet& advantages,
                      const GrpoConfig& config);

}  // namespace rlvr
