#include "reward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace rlvr {

void RewardConfig::validate() const {
  if (!(0 < l_pos_control && l_pos_control < l_max)) {
    throw std::invalid_argument("reward config: require 0 < l_pos_control < l_max");
  }
  if (!(0 < l_neg_control && l_neg_control < l_max)) {
    throw std::invalid_argument("reward config: require 0 < l_neg_control < l_max");
  }
  if (!(r_plus_min < r_plus_max)) {
    throw std::invalid_argument("reward config: require r_plus_min < r_plus_max");
  }
  if (!(r_minus_min < r_minus_max)) {
    throw std::invalid_argument("reward config: require r_minus_min < r_minus_max");
  }
  if (!(r_minus_max < r_plus_min)) {
    throw std::invalid_argument("reward config: require r_minus_max < r_plus_min");
  }
  if (!(w_acc > 0.0) || !(w_rep > 0.0)) {
    throw std::invalid_argument("reward config: weights must be positive");
  }
  if (ngram_size < 1) {
    throw std::invalid_argument("reward config: ngram_size must be positive");
  }
  if (ngram_freq_threshold < 1) {
    throw std::invalid_argument("reward config: ngram_freq_threshold must be positive");
  }
}

const char* to_string(FormatStatus status) {
  switch (status) {
    case FormatStatus::Ok:
      return "ok";
    case FormatStatus::MissingEos:
      return "missing_eos";
    case FormatStatus::InvalidThinkBlock:
      return "invalid_think_block";
  }
  return "unknown";
}

double scaled_accuracy_reward(bool correct, long length, const RewardConfig& cfg) {
  if (length < 0) {
    throw std::invalid_argument("scaled_accuracy_reward: length must be >= 0");
  }
  if (correct) {
    const double over = static_cast<double>(std::max(length - cfg.l_pos_control, 0L));
    const double rho = std::min(1.0, over / static_cast<double>(cfg.l_max - cfg.l_pos_control));
    return cfg.r_plus_min +
           0.5 * (cfg.r_plus_max - cfg.r_plus_min) * (1.0 + std::cos(std::numbers::pi * rho));
  }
  const double rho =
      std::min(1.0, static_cast<double>(length) / static_cast<double>(cfg.l_neg_control));
  return cfg.r_minus_max +
         0.5 * (cfg.r_minus_min - cfg.r_minus_max) * (1.0 + std::cos(std::numbers::pi * rho));
}

namespace {

size_t find_count(std::string_view text, std::string_view needle, size_t& first_pos) {
  size_t count = 0;
  first_pos = std::string_view::npos;
  size_t pos = text.find(needle);
  while (pos != std::string_view::npos) {
    if (count == 0) first_pos = pos;
    ++count;
    pos = text.find(needle, pos + needle.size());
  }
  return count;
}

}  // namespace

FormatStatus check_format(std::string_view response_text, bool eos_present) {
  size_t open_pos = 0;
  size_t close_pos = 0;
  const size_t opens = find_count(response_text, "<think>", open_pos);
  const size_t closes = find_count(response_text, "</think>", close_pos);
  if (opens != 1 || closes != 1 || close_pos < open_pos) {
    return FormatStatus::InvalidThinkBlock;
  }
  if (!eos_present) {
    return FormatStatus::MissingEos;
  }
  return FormatStatus::Ok;
}

double apply_format_override(FormatStatus status, double acc_scaled, const RewardConfig& cfg) {
  switch (status) {
    case FormatStatus::Ok:
      return acc_scaled;
    case FormatStatus::MissingEos:
      return cfg.incomplete_override;
    case FormatStatus::InvalidThinkBlock:
      return cfg.invalid_think_override;
  }
  return acc_scaled;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

double repetition_penalty(std::span<const std::string> words, const RewardConfig& cfg) {
  const long n = cfg.ngram_size;
  const long word_count = static_cast<long>(words.size());
  if (word_count < n) return 0.0;

  // Intern words so n-gram keys are compact id sequences.
  std::unordered_map<std::string_view, int> ids;
  std::vector<int> seq;
  seq.reserve(words.size());
  for (const auto& w : words) {
    auto [it, inserted] = ids.emplace(w, static_cast<int>(ids.size()));
    seq.push_back(it->second);
  }

  std::unordered_map<std::string, long> counts;
  const long total = word_count - n + 1;
  std::string key;
  for (long i = 0; i < total; ++i) {
    key.clear();
    for (long j = 0; j < n; ++j) {
      key.append(reinterpret_cast<const char*>(&seq[i + j]), sizeof(int));
    }
    ++counts[key];
  }

  long repeated_occurrences = 0;
  long max_freq = 0;
  for (const auto& [unused, c] : counts) {
    if (c > cfg.ngram_freq_threshold) {
      repeated_occurrences += c;
      max_freq = std::max(max_freq, c);
    }
  }
  if (max_freq == 0) return 0.0;

  const double a = static_cast<double>(repeated_occurrences) / static_cast<double>(total);
  const double b = static_cast<double>(max_freq) /
                   (static_cast<double>(word_count) / static_cast<double>(n));
  return -std::min(1.0, std::max(a, b));
}

RewardBreakdown final_reward(bool correct, long length, FormatStatus format,
                             std::span<const std::string> words, const RewardConfig& cfg) {
  RewardBreakdown out;
  out.acc_raw = correct ? 1 : 0;
  out.length = length;
  out.format = format;
  out.acc_scaled = apply_format_override(format, scaled_accuracy_reward(correct, length, cfg), cfg);
  out.rep_penalty = repetition_penalty(words, cfg);
  out.final = cfg.w_acc * out.acc_scaled + cfg.w_rep * out.rep_penalty;
  return out;
}

}  // namespace rlvr
