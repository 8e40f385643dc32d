#include "toy_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rlvr {

ToyPolicy::ToyPolicy(int vocab_size, int context_window, double temperature)
    : vocab_(vocab_size), context_(context_window), temperature_(temperature) {
  if (vocab_ < 2) throw std::invalid_argument("policy vocabulary must have >= 2 tokens");
  if (context_ < 1 || context_ > 32) throw std::invalid_argument("context window must be in 1..32");
  if (!(temperature_ > 0.0)) throw std::invalid_argument("temperature must be > 0");
  const size_t v = static_cast<size_t>(vocab_);
  ctx_offset_ = v;
  prompt_offset_ = ctx_offset_ + static_cast<size_t>(context_) * (v + 1) * v;
  theta_.assign(prompt_offset_ + v * v, 0.0);
}

void ToyPolicy::init_random(std::mt19937_64& rng, double scale) {
  for (double& w : theta_) {
    // Uniform in [-scale, scale); fully determined by the engine's output.
    w = (2.0 * uniform01(rng) - 1.0) * scale;
  }
}

std::vector<int> ToyPolicy::prompt_counts(std::span<const int> prompt) const {
  std::vector<int> counts(static_cast<size_t>(vocab_), 0);
  for (int p : prompt) {
    if (p < 0 || p >= vocab_) throw std::out_of_range("prompt token outside vocabulary");
    ++counts[static_cast<size_t>(p)];
  }
  return counts;
}

void ToyPolicy::logits_at(std::span<const int> counts, std::span<const int> generated, size_t pos,
                          std::vector<double>& z) const {
  const size_t v = static_cast<size_t>(vocab_);
  z.assign(theta_.begin(), theta_.begin() + static_cast<long>(v));
  for (int k = 0; k < context_; ++k) {
    const long idx = static_cast<long>(pos) - 1 - k;
    const int ctx = idx >= 0 ? generated[static_cast<size_t>(idx)] : vocab_;
    const size_t row = ctx_offset_ + (static_cast<size_t>(k) * (v + 1) + static_cast<size_t>(ctx)) * v;
    for (size_t j = 0; j < v; ++j) z[j] += theta_[row + j];
  }
  for (size_t p = 0; p < v; ++p) {
    const int c = counts[p];
    if (c == 0) continue;
    const size_t row = prompt_offset_ + p * v;
    for (size_t j = 0; j < v; ++j) z[j] += c * theta_[row + j];
  }
}

namespace {

void softmax_in_place(std::vector<double>& z, double temperature) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& x : z) {
    x = std::exp((x - zmax) / temperature);
    sum += x;
  }
  for (double& x : z) x /= sum;
}

double entropy_of(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

}  // namespace

void ToyPolicy::next_distribution(std::span<const int> prompt, std::span<const int> generated,
                                  std::vector<double>& probs) const {
  const auto counts = prompt_counts(prompt);
  logits_at(counts, generated, generated.size(), probs);
  softmax_in_place(probs, temperature_);
}

ToyPolicy::Rollout ToyPolicy::sample(std::span<const int> prompt, int eos_id, int max_tokens,
                                     std::mt19937_64& rng) const {
  const auto counts = prompt_counts(prompt);
  Rollout out;
  std::vector<double> p;
  for (int t = 0; t < max_tokens; ++t) {
    logits_at(counts, out.tokens, out.tokens.size(), p);
    softmax_in_place(p, temperature_);
    const double u = uniform01(rng);
    double cdf = 0.0;
    int pick = vocab_ - 1;
    for (int j = 0; j < vocab_; ++j) {
      cdf += p[static_cast<size_t>(j)];
      if (u < cdf) {
        pick = j;
        break;
      }
    }
    out.tokens.push_back(pick);
    out.logprobs.push_back(std::log(p[static_cast<size_t>(pick)]));
    out.entropies.push_back(entropy_of(p));
    if (pick == eos_id) {
      out.ended = true;
      break;
    }
  }
  return out;
}

std::vector<int> ToyPolicy::greedy(std::span<const int> prompt, int eos_id,
                                   int max_tokens) const {
  const auto counts = prompt_counts(prompt);
  std::vector<int> tokens;
  std::vector<double> z;
  for (int t = 0; t < max_tokens; ++t) {
    logits_at(counts, tokens, tokens.size(), z);
    const int pick =
        static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    tokens.push_back(pick);
    if (pick == eos_id) break;
  }
  return tokens;
}

void ToyPolicy::score(std::span<const int> prompt, std::span<const int> output,
                      std::vector<double>& logprobs, std::vector<double>& entropies) const {
  const auto counts = prompt_counts(prompt);
  logprobs.resize(output.size());
  entropies.resize(output.size());
  std::vector<double> p;
  for (size_t t = 0; t < output.size(); ++t) {
    logits_at(counts, output, t, p);
    softmax_in_place(p, temperature_);
    const int o = output[t];
    if (o < 0 || o >= vocab_) throw std::out_of_range("output token outside vocabulary");
    logprobs[t] = std::log(p[static_cast<size_t>(o)]);
    entropies[t] = entropy_of(p);
  }
}

void ToyPolicy::accumulate_gradient(std::span<const int> prompt, std::span<const int> output,
                                    std::span<const double> dlogprob,
                                    std::span<const double> dentropy,
                                    std::span<double> grad) const {
  if (dlogprob.size() != output.size() || dentropy.size() != output.size()) {
    throw std::invalid_argument("gradient weights must align with output tokens");
  }
  if (grad.size() != theta_.size()) {
    throw std::invalid_argument("gradient buffer size mismatch");
  }
  const auto counts = prompt_counts(prompt);
  const size_t v = static_cast<size_t>(vocab_);
  std::vector<double> p;
  std::vector<double> gz(v);
  for (size_t t = 0; t < output.size(); ++t) {
    logits_at(counts, output, t, p);
    softmax_in_place(p, temperature_);
    const double h = entropy_of(p);
    const int o = output[t];

    // d logprob_o / dz_j = (delta_{jo} - p_j) / tau
    // d entropy   / dz_j = -(p_j / tau) (log p_j + entropy)
    for (size_t j = 0; j < v; ++j) {
      double g = -dlogprob[t] * p[j];
      if (static_cast<int>(j) == o) g += dlogprob[t];
      if (p[j] > 0.0) g -= dentropy[t] * p[j] * (std::log(p[j]) + h);
      gz[j] = g / temperature_;
    }

    for (size_t j = 0; j < v; ++j) grad[j] += gz[j];
    for (int k = 0; k < context_; ++k) {
      const long idx = static_cast<long>(t) - 1 - k;
      const int ctx = idx >= 0 ? output[static_cast<size_t>(idx)] : vocab_;
      const size_t row =
          ctx_offset_ + (static_cast<size_t>(k) * (v + 1) + static_cast<size_t>(ctx)) * v;
      for (size_t j = 0; j < v; ++j) grad[row + j] += gz[j];
    }
    for (size_t pt = 0; pt < v; ++pt) {
      const int c = counts[pt];
      if (c == 0) continue;
      const size_t row = prompt_offset_ + pt * v;
      for (size_t j = 0; j < v; ++j) grad[row + j] += c * gz[j];
    }
  }
}

}  // namespace rlvr
