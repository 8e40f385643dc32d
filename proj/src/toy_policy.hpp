#pragma once

#include <random>
#include <span>
#include <vector>

namespace rlvr {

// Linear-softmax autoregressive policy over a small vocabulary.
//
// Next-token logits are a sum of three feature banks:
//   z[j] = bias[j]
//        + sum_{k<K} W_k[ctx_k][j]      (ctx_k = k-th previous generated token,
//                                        BOS id = vocab_size when out of range)
//        + sum_{p in prompt} U[p][j]    (bag of prompt tokens, with counts)
//
// Sampling uses softmax(z / temperature); greedy decoding uses argmax z.
// Per-token logprobs are exactly the sampling distribution's, so the logprob
// of a sampled sequence is the sum of its per-token logprobs.
class ToyPolicy {
 public:
  ToyPolicy(int vocab_size, int context_window, double temperature);

  void init_random(std::mt19937_64& rng, double scale);

  int vocab_size() const { return vocab_; }
  int context_window() const { return context_; }
  double temperature() const { return temperature_; }
  size_t param_count() const { return theta_.size(); }
  std::vector<double>& params() { return theta_; }
  const std::vector<double>& params() const { return theta_; }

  // Flat indices into params() for each feature bank.
  size_t bias_index(int j) const { return static_cast<size_t>(j); }
  size_t context_index(int k, int ctx, int j) const {
    const size_t v = static_cast<size_t>(vocab_);
    return ctx_offset_ + (static_cast<size_t>(k) * (v + 1) + static_cast<size_t>(ctx)) * v +
           static_cast<size_t>(j);
  }
  size_t prompt_index(int p, int j) const {
    return prompt_offset_ + static_cast<size_t>(p) * static_cast<size_t>(vocab_) +
           static_cast<size_t>(j);
  }

  // Distribution over the next token after `generated` tokens of response.
  void next_distribution(std::span<const int> prompt, std::span<const int> generated,
                         std::vector<double>& probs) const;

  struct Rollout {
    std::vector<int> tokens;
    std::vector<double> logprobs;
    std::vector<double> entropies;
    bool ended = false;  // emitted eos before hitting max_tokens
  };

  Rollout sample(std::span<const int> prompt, int eos_id, int max_tokens,
                 std::mt19937_64& rng) const;

  std::vector<int> greedy(std::span<const int> prompt, int eos_id, int max_tokens) const;

  // Per-token logprobs and entropies of a fixed output sequence.
  void score(std::span<const int> prompt, std::span<const int> output,
             std::vector<double>& logprobs, std::vector<double>& entropies) const;

  // Accumulates into `grad` the gradient of
  //   sum_t dlogprob[t] * logprob_t(theta) + dentropy[t] * entropy_t(theta)
  // for the fixed output sequence.
  void accumulate_gradient(std::span<const int> prompt, std::span<const int> output,
                           std::span<const double> dlogprob, std::span<const double> dentropy,
                           std::span<double> grad) const;

 private:
  int vocab_;
  int context_;
  double temperature_;
  std::vector<double> theta_;
  size_t ctx_offset_;     // K tables of (vocab_+1) x vocab_
  size_t prompt_offset_;  // vocab_ x vocab_

  void logits_at(std::span<const int> prompt_counts, std::span<const int> generated, size_t pos,
                 std::vector<double>& z) const;
  std::vector<int> prompt_counts(std::span<const int> prompt) const;
};

// Draws a uniform double in [0, 1) with the full 53-bit mantissa; avoids
// std::uniform_real_distribution, whose output is implementation-defined.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace rlvr
