#pragma once

#include <random>
#include <span>
#include <string>
#include <vector>

namespace rlvr {

// Small fixed vocabulary embedding the think/boxed format so that format
// checks and answer extraction run end-to-end on toy rollouts.
struct ToyVocab {
  std::vector<std::string> tokens;
  int digit0 = 0;  // ids digit0..digit0+9 are "0".."9"
  int plus = 0;
  int equals = 0;
  int think_open = 0;
  int think_close = 0;
  int boxed_open = 0;
  int brace_close = 0;
  int eos = 0;

  static ToyVocab standard();

  int size() const { return static_cast<int>(tokens.size()); }
  // Context id used for padding before the first generated token.
  int bos() const { return size(); }
  // Plain words with no structural meaning; everything after <eos>.
  std::vector<int> fillers() const;
  std::string detokenize(std::span<const int> ids) const;
};

struct ToyPrompt {
  std::vector<int> tokens;
  std::string text;
  std::string gold;
  int difficulty = 1;  // operand count
};

struct ToyTaskConfig {
  // Operand counts sampled uniformly per prompt. Answers are sum mod 10, so
  // every gold is a single digit the verifier can check without fallback.
  std::vector<int> difficulty_mix = {1, 2};

  void validate() const;
};

ToyPrompt make_prompt(const ToyVocab& vocab, std::span<const int> operands);
ToyPrompt sample_prompt(const ToyVocab& vocab, const ToyTaskConfig& config,
                        std::mt19937_64& rng);

}  // namespace rlvr
