#include "grpo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rlvr {

void GrpoConfig::validate() const {
  if (group_size < 2) throw std::invalid_argument("grpo.group_size must be >= 2");
  if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0)) {
    throw std::invalid_argument("grpo.clip_epsilon must be in (0, 1)");
  }
  if (kl_coeff < 0.0) throw std::invalid_argument("grpo.kl_coeff must be >= 0");
  if (entropy_coeff < 0.0) throw std::invalid_argument("grpo.entropy_coeff must be >= 0");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("grpo.learning_rate must be >= 0");
  if (max_generation_tokens < 1) {
    throw std::invalid_argument("grpo.max_generation_tokens must be >= 1");
  }
}

void TrajectoryGroup::validate(int group_size) const {
  const size_t g = static_cast<size_t>(group_size);
  if (outputs.size() != g || old_logprobs.size() != g || new_logprobs.size() != g ||
      rewards.size() != g || clipped_flags.size() != g) {
    throw std::invalid_argument("trajectory group must hold exactly G trajectories");
  }
  if (!new_entropies.empty() && new_entropies.size() != g) {
    throw std::invalid_argument("trajectory group entropies must be empty or per-trajectory");
  }
  for (size_t i = 0; i < g; ++i) {
    const size_t len = outputs[i].size();
    if (len == 0) throw std::invalid_argument("trajectory outputs must be non-empty");
    if (old_logprobs[i].size() != len || new_logprobs[i].size() != len) {
      throw std::invalid_argument("per-token logprobs must align with outputs");
    }
    if (!new_entropies.empty() && new_entropies[i].size() != len) {
      throw std::invalid_argument("per-token entropies must align with outputs");
    }
    if (!std::isfinite(rewards[i])) throw std::invalid_argument("rewards must be finite");
  }
}

AdvantageSet group_advantages(std::span<const double> rewards, int group_size) {
  if (static_cast<int>(rewards.size()) != group_size) {
    throw std::invalid_argument("group_advantages: expected exactly G rewards");
  }
  for (double r : rewards) {
    if (!std::isfinite(r)) throw std::invalid_argument("group_advantages: rewards must be finite");
  }
  AdvantageSet out;
  out.values.assign(rewards.size(), 0.0);

  const bool degenerate =
      std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; });
  if (degenerate) return out;

  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(rewards.size());
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(rewards.size());
  const double std_dev = std::sqrt(var);
  for (size_t i = 0; i < rewards.size(); ++i) {
    out.values[i] = (rewards[i] - mean) / std_dev;
  }
  return out;
}

double clipped_surrogate(double ratio, double advantage, double epsilon) {
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double kl_estimate(double new_logprob, double old_logprob) {
  const double diff = old_logprob - new_logprob;
  return std::exp(diff) - diff - 1.0;
}

double entropy_estimate(std::span<const double> token_distribution) {
  double sum = 0.0;
  double h = 0.0;
  for (double p : token_distribution) {
    if (p < 0.0) throw std::invalid_argument("entropy_estimate: negative probability");
    sum += p;
    if (p > 0.0) h -= p * std::log(p);
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("entropy_estimate: probabilities must sum to 1");
  }
  return h;
}

double grpo_objective(const TrajectoryGroup& group, const AdvantageSet& advantages,
                      const GrpoConfig& config) {
  config.validate();
  group.validate(config.group_size);
  if (advantages.values.size() != group.outputs.size()) {
    throw std::invalid_argument("grpo_objective: advantages must align with trajectories");
  }

  double total = 0.0;
  for (size_t i = 0; i < group.outputs.size(); ++i) {
    const size_t len = group.outputs[i].size();
    double per_token_sum = 0.0;
    for (size_t t = 0; t < len; ++t) {
      const double ratio = std::exp(group.new_logprobs[i][t] - group.old_logprobs[i][t]);
      const double surrogate = clipped_surrogate(ratio, advantages.values[i], config.clip_epsilon);
      const double kl = kl_estimate(group.new_logprobs[i][t], group.old_logprobs[i][t]);
      const double entropy = group.new_entropies.empty() ? 0.0 : group.new_entropies[i][t];
      per_token_sum += surrogate - config.kl_coeff * kl + config.entropy_coeff * entropy;
    }
    total += per_token_sum / static_cast<double>(len);
  }
  return total / static_cast<double>(group.outputs.size());
}

}  // namespace rlvr
