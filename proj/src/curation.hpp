#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace rlvr {

struct ContaminationFlag {
  std::string benchmark_id;
  double overlap = 0.0;        // fractional n-gram overlap with that benchmark
  std::string rule;            // "fractional_overlap" or "exact_13gram"
};

struct CurationRecord {
  std::string seed_id;
  std::string prompt;
  std::vector<std::string> strong_model_answers;
  std::vector<std::string> weak_model_answers;
  std::optional<std::string> proxy_gold;
  std::optional<double> agreement_rate;
  std::optional<ContaminationFlag> contamination;
};

// Most frequent answer after normalization; ties go to the answer seen first.
std::optional<std::string> plurality_answer(std::span<const std::string> answers);

// Fraction of weak answers equivalent to the proxy gold.
double agreement_rate(std::span<const std::string> weak_answers, const std::string& proxy_gold);

struct TeachabilityDecision {
  bool keep = false;
  std::string reason;  // "in_band", "too_easy", "too_hard"
};

TeachabilityDecision teachability_filter(double rate, double lo = 0.1, double hi = 0.7);

// Lowercased alphanumeric word runs; everything else separates words.
std::vector<std::string> tokenize_words(std::string_view text);

// Word n-gram sets per benchmark, kept both at the configured n and at 13
// (the exact-match rule always works on 13-grams).
class DecontaminationIndex {
 public:
  explicit DecontaminationIndex(int ngram = 13);

  int ngram() const { return n_; }
  void add_benchmark(const std::string& benchmark_id, std::span<const std::string> prompts);

  // Flags a prompt when its fractional n-gram overlap with one benchmark
  // reaches the threshold, or when any exact 13-gram matches. The reported
  // benchmark is the one with the highest overlap (ties: lexicographic).
  std::optional<ContaminationFlag> check(std::string_view prompt, double threshold) const;

 private:
  int n_;
  struct GramSets {
    std::unordered_set<std::string> at_n;
    std::unordered_set<std::string> at_13;
  };
  std::map<std::string, GramSets> benchmarks_;
};

// Contract for rubric-based difficulty scoring by an external judge; the
// toolkit ships no rubric, only the plug point.
class DifficultyScorer {
 public:
  virtual ~DifficultyScorer() = default;
  virtual double score(std::string_view prompt) = 0;
};

struct DifficultyOutcome {
  std::string seed_id;
  std::optional<std::string> proxy_gold;
  std::optional<double> agreement;
  bool keep = false;
  std::string reason;
};

// Proxy-gold election, agreement rate, and band filter for one seed record.
DifficultyOutcome assess_difficulty(const CurationRecord& record, double lo, double hi);

std::vector<CurationRecord> load_curation_records(const std::string& path);

struct BenchmarkFile {
  std::string benchmark_id;
  std::vector<std::string> prompts;
};

// JSONL with {"benchmark_id", "prompt"} per line, grouped by benchmark.
std::vector<BenchmarkFile> load_benchmark_prompts(const std::string& path);

}  // namespace rlvr
