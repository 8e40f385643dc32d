#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kde.hpp"

namespace rlvr {

struct GenerationRecord {
  std::string benchmark_id;
  std::string prompt_id;
  std::string run_id;
  std::string response_text;
  // extracted_present distinguishes a record that never carried the field
  // from an explicit null ("no answer could be extracted"); only the former
  // is a structural error for majority voting.
  bool extracted_present = false;
  std::optional<std::string> extracted_answer;
  int correct = 0;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  std::string difficulty_label;
  std::string topic_label;
};

// Complete prompt x run matrix for one benchmark. Construction rejects
// duplicate cells and reports every missing cell by name.
class RunSet {
 public:
  static RunSet build(std::vector<GenerationRecord> records,
                      const std::string& benchmark_id = "");

  const std::string& benchmark_id() const { return benchmark_id_; }
  int run_count() const { return static_cast<int>(run_ids_.size()); }
  int prompt_count() const { return static_cast<int>(prompt_ids_.size()); }
  const std::vector<std::string>& run_ids() const { return run_ids_; }
  const std::vector<std::string>& prompt_ids() const { return prompt_ids_; }
  const GenerationRecord& at(int prompt, int run) const;

  // a_r = mean over prompts of the correct flag in run r.
  std::vector<double> per_run_accuracy() const;

 private:
  std::string benchmark_id_;
  std::vector<std::string> run_ids_;
  std::vector<std::string> prompt_ids_;
  std::vector<GenerationRecord> cells_;  // row-major, prompt x run
};

struct PassAt1 {
  double mean = 0.0;
  double std_dev = 0.0;  // sample (N-1) std across runs
  bool single_run = false;
};

PassAt1 pass_at_1(const RunSet& runs);

enum class AggMode { Worst, Best, Majority };
const char* to_string(AggMode mode);

double aggregate_of_n(const RunSet& runs, AggMode mode);

struct TokenUsage {
  double mean_completion = 0.0;
  double mean_per_prompt_std = 0.0;  // std per prompt first, then averaged
};

TokenUsage token_usage(const RunSet& runs);

struct AggregateReport {
  int runs = 0;
  int prompts = 0;
  PassAt1 pass1;
  double worst_of_n = 0.0;
  double majority_vote = 0.0;
  double best_of_n = 0.0;
  TokenUsage tokens;
  std::optional<KdeCurve> kde;
};

AggregateReport aggregate_report(const RunSet& runs, bool with_kde = false,
                                 std::optional<double> bandwidth = std::nullopt);

enum class GroupKey { Difficulty, Topic };

// Slices ordered by label; prompts without a label fall into "unlabeled".
std::vector<std::pair<std::string, AggregateReport>> disaggregate(const RunSet& runs,
                                                                  GroupKey key);

std::vector<GenerationRecord> load_generation_records(const std::string& path);

struct EvalReportOptions {
  bool with_kde = true;
  std::optional<double> bandwidth;
  bool by_difficulty = true;
  bool by_topic = true;
};

std::string eval_report_json(const RunSet& runs, const EvalReportOptions& options);
std::string disaggregation_csv(const RunSet& runs, GroupKey key);

}  // namespace rlvr
