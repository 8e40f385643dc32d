#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rlvr {

// Rule-based reward knobs. Length limits are completion-token counts, reward
// bounds are dimensionless scalars. Defaults reproduce the production values
// (32k context with 1k reserved for the prompt, weights 8/13 and 1/13).
struct RewardConfig {
  long l_max = 31744;
  long l_pos_control = 25600;
  long l_neg_control = 3702;
  double r_plus_min = 0.5;
  double r_plus_max = 1.0;
  double r_minus_min = -1.0;
  double r_minus_max = -0.5;
  double w_acc = 8.0 / 13.0;
  double w_rep = 1.0 / 13.0;
  int ngram_size = 5;
  int ngram_freq_threshold = 5;
  double incomplete_override = -0.5;
  double invalid_think_override = -1.0;

  // Throws std::invalid_argument when the invariants do not hold.
  void validate() const;
};

enum class FormatStatus {
  Ok,
  MissingEos,
  InvalidThinkBlock,
};

const char* to_string(FormatStatus status);

// Per-response reward decomposition.
struct RewardBreakdown {
  int acc_raw = 0;           // binary correctness
  double acc_scaled = 0.0;   // length-aware accuracy after any format override
  double rep_penalty = 0.0;  // in [-1, 0]
  FormatStatus format = FormatStatus::Ok;
  long length = 0;           // completion tokens
  double final = 0.0;        // w_acc * acc_scaled + w_rep * rep_penalty
};

// Length-aware accuracy reward. Correct answers decay from r_plus_max to
// r_plus_min as the length grows past l_pos_control; incorrect answers rise
// from r_minus_min to r_minus_max as the length approaches l_neg_control.
// Cosine interpolation in between, flat outside the controlled range.
double scaled_accuracy_reward(bool correct, long length, const RewardConfig& cfg);

// Structural checks: the response must contain exactly one <think> and one
// </think>, opening tag before the closing one, and must have ended with the
// end-of-sequence token. A broken think block dominates a missing EOS.
FormatStatus check_format(std::string_view response_text, bool eos_present);

double apply_format_override(FormatStatus status, double acc_scaled, const RewardConfig& cfg);

// Whitespace tokenization used for the repetition penalty; punctuation stays
// attached to its word.
std::vector<std::string> split_words(std::string_view text);

// -max(A, B) where A is the fraction of n-gram occurrences whose n-gram
// repeats more than ngram_freq_threshold times and B is the highest such
// frequency divided by (word count / n). 0 when nothing crosses the
// threshold or fewer than n words exist; clamped to [-1, 0].
double repetition_penalty(std::span<const std::string> words, const RewardConfig& cfg);

RewardBreakdown final_reward(bool correct, long length, FormatStatus format,
                             std::span<const std::string> words, const RewardConfig& cfg);

}  // namespace rlvr
