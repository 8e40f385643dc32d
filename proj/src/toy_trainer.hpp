#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "grpo.hpp"
#include "reward.hpp"
#include "toy_policy.hpp"
#include "toy_task.hpp"

namespace rlvr {

// Stable seed derivation so every rollout stream is independent of scheduling.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                       std::uint64_t c = 0);

class ToyPolicy;

// Adds `strength` to the context-table logits that trace out the canonical
// response shape (think block, boxed digit, eos). Digit choice after
// "\boxed{" is left untouched.
void apply_format_prior(ToyPolicy& policy, const ToyVocab& vocab, double strength);

struct ToyTrainConfig {
  GrpoConfig grpo;
  RewardConfig reward;
  ToyTaskConfig task;
  int steps = 160;
  int batch_size = 8;
  int max_tokens = 48;
  int context_window = 4;
  double temperature = 1.0;
  double init_scale = 0.05;
  // Logit boost baked into the initial context tables so the starting policy
  // already follows the <think>..</think> \boxed{..} <eos> shape, the way an
  // RL run starts from a format-following base model. Answer digits stay
  // uniform; 0 disables the prior entirely.
  double format_prior = 4.0;
  // Gradient steps per batch of rollouts; with more than one, the KL term
  // actively pulls the policy back toward the sampling policy.
  int inner_updates = 2;
  int warmup_steps = 10;
  double momentum = 0.0;
  int heldout_size = 64;
  std::uint64_t seed = 2024;

  // Desk-scale preset: short generations, reward length controls shrunk to
  // match, and learning rate plus momentum sized for the linear toy policy,
  // whose discriminative gradients are tiny but consistent.
  static ToyTrainConfig toy_default();
  void validate() const;
};

struct StepMetrics {
  int step = 0;
  double learning_rate = 0.0;
  double objective = 0.0;
  double grad_norm = 0.0;
  double mean_reward = 0.0;
  double accuracy = 0.0;  // fraction of batch rollouts verified correct
  double clip_ratio = 0.0;
  double mean_entropy = 0.0;
  double heldout_accuracy = 0.0;
  int n_correct = 0;
  int n_incorrect = 0;
  double mean_len_correct = 0.0;
  double p50_len_correct = 0.0;
  double p90_len_correct = 0.0;
  double mean_len_incorrect = 0.0;
  double p50_len_incorrect = 0.0;
  double p90_len_incorrect = 0.0;
};

std::string step_metrics_json(const StepMetrics& m);

struct TrainState {
  explicit TrainState(ToyPolicy p) : policy(std::move(p)) {}

  int step = 0;
  ToyPolicy policy;
  std::vector<double> velocity;
  std::vector<StepMetrics> metrics;
  std::vector<double> best_params;
  int best_step = -1;
  double best_heldout = -1.0;
  std::string last_error;
};

class ToyTrainer {
 public:
  explicit ToyTrainer(ToyTrainConfig config);

  const ToyTrainConfig& config() const { return config_; }
  const ToyVocab& vocab() const { return vocab_; }
  const std::vector<ToyPrompt>& heldout() const { return heldout_; }

  TrainState init_state() const;

  // Samples G trajectories for one prompt, scoring each with the reward
  // pipeline. new_* fields start equal to the sampling-policy values.
  TrajectoryGroup rollout_group(const ToyPolicy& policy, const ToyPrompt& prompt,
                                std::uint64_t rollout_seed) const;

  // One batch step: rollouts under the current policy, then inner_updates
  // ascent steps on the GRPO objective. Returns false and leaves the state
  // unchanged (except last_error) when a non-finite gradient appears.
  bool train_step(TrainState& state) const;

  TrainState train(const std::function<void(const StepMetrics&)>& on_step = {}) const;

  double heldout_accuracy(const ToyPolicy& policy) const;

  // Verdict for one generated sequence against the prompt's gold answer.
  bool response_correct(std::span<const int> tokens, const ToyPrompt& prompt) const;

 private:
  ToyTrainConfig config_;
  ToyVocab vocab_;
  std::vector<ToyPrompt> heldout_;
};

struct Checkpoint {
  std::vector<double> params;
  int step = 0;
  double heldout_accuracy = 0.0;
  std::string config_hash;
};

std::string config_fingerprint(const ToyTrainConfig& config);
void save_checkpoint(const std::string& path, const ToyTrainConfig& config,
                     const TrainState& state);
Checkpoint load_checkpoint(const std::string& path);

// Compares the analytic GRPO gradient against central finite differences on
// randomly built toy instances.
struct GradCheckReport {
  int instances = 0;
  int coords_checked = 0;
  double worst_rel_error = 0.0;
  double tolerance = 1e-5;
  bool pass = false;
};

GradCheckReport gradient_check(std::uint64_t seed, int instances = 5, double tolerance = 1e-5);

}  // namespace rlvr
