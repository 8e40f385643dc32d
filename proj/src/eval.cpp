#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "answer.hpp"
#include "jsonl.hpp"

namespace rlvr {

namespace {

// Sentinel vote for records whose extracted_answer is an explicit null.
const std::string kNoAnswerVote = "\x01no-answer";

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0));
}

}  // namespace

RunSet RunSet::build(std::vector<GenerationRecord> records, const std::string& benchmark_id) {
  RunSet rs;
  std::vector<GenerationRecord> kept;
  std::set<std::string> benchmarks_seen;
  for (auto& r : records) {
    benchmarks_seen.insert(r.benchmark_id);
    if (benchmark_id.empty() || r.benchmark_id == benchmark_id) {
      kept.push_back(std::move(r));
    }
  }
  if (benchmark_id.empty() && benchmarks_seen.size() > 1) {
    std::string msg = "records span multiple benchmarks (";
    for (const auto& b : benchmarks_seen) msg += b + " ";
    msg.back() = ')';
    throw std::runtime_error(msg + "; select one benchmark_id");
  }
  if (kept.empty()) {
    throw std::runtime_error(benchmark_id.empty()
                                 ? std::string("no records to aggregate")
                                 : "no records for benchmark '" + benchmark_id + "'");
  }
  rs.benchmark_id_ = kept.front().benchmark_id;

  std::set<std::string> runs;
  std::set<std::string> prompts;
  for (const auto& r : kept) {
    runs.insert(r.run_id);
    prompts.insert(r.prompt_id);
  }
  rs.run_ids_.assign(runs.begin(), runs.end());
  rs.prompt_ids_.assign(prompts.begin(), prompts.end());

  std::map<std::pair<std::string, std::string>, GenerationRecord> by_cell;
  for (auto& r : kept) {
    auto key = std::make_pair(r.prompt_id, r.run_id);
    if (!by_cell.emplace(key, std::move(r)).second) {
      throw std::runtime_error("duplicate record for prompt '" + key.first + "' run '" +
                               key.second + "'");
    }
  }

  std::vector<std::string> gaps;
  for (const auto& p : rs.prompt_ids_) {
    for (const auto& run : rs.run_ids_) {
      if (!by_cell.count({p, run})) {
        gaps.push_back("prompt '" + p + "' missing from run '" + run + "'");
      }
    }
  }
  if (!gaps.empty()) {
    std::string msg = "incomplete run matrix: ";
    for (size_t i = 0; i < gaps.size() && i < 8; ++i) {
      if (i > 0) msg += "; ";
      msg += gaps[i];
    }
    if (gaps.size() > 8) msg += "; +" + std::to_string(gaps.size() - 8) + " more";
    throw std::runtime_error(msg);
  }

  rs.cells_.reserve(rs.prompt_ids_.size() * rs.run_ids_.size());
  for (const auto& p : rs.prompt_ids_) {
    for (const auto& run : rs.run_ids_) {
      rs.cells_.push_back(std::move(by_cell.at({p, run})));
    }
  }
  return rs;
}

const GenerationRecord& RunSet::at(int prompt, int run) const {
  return cells_[static_cast<size_t>(prompt) * run_ids_.size() + static_cast<size_t>(run)];
}

std::vector<double> RunSet::per_run_accuracy() const {
  std::vector<double> acc(run_ids_.size(), 0.0);
  for (size_t r = 0; r < run_ids_.size(); ++r) {
    long correct = 0;
    for (int p = 0; p < prompt_count(); ++p) {
      correct += at(p, static_cast<int>(r)).correct;
    }
    acc[r] = static_cast<double>(correct) / static_cast<double>(prompt_count());
  }
  return acc;
}

PassAt1 pass_at_1(const RunSet& runs) {
  const auto acc = runs.per_run_accuracy();
  PassAt1 out;
  out.single_run = acc.size() == 1;
  double mean = 0.0;
  for (double a : acc) mean += a;
  out.mean = mean / static_cast<double>(acc.size());
  out.std_dev = sample_std(acc, out.mean);
  return out;
}

const char* to_string(AggMode mode) {
  switch (mode) {
    case AggMode::Worst:
      return "worst_of_n";
    case AggMode::Best:
      return "best_of_n";
    case AggMode::Majority:
      return "majority_vote";
  }
  return "unknown";
}

namespace {

int majority_correct(const RunSet& runs, int prompt) {
  struct Bucket {
    int count = 0;
    int first_run = 0;
  };
  std::map<std::string, Bucket> buckets;
  for (int r = 0; r < runs.run_count(); ++r) {
    const auto& rec = runs.at(prompt, r);
    if (!rec.extracted_present) {
      throw std::runtime_error("majority vote requires the extracted_answer field; absent for prompt '" +
                               rec.prompt_id + "' run '" + rec.run_id + "'");
    }
    const std::string key =
        rec.extracted_answer ? "a:" + normalize_answer(*rec.extracted_answer) : kNoAnswerVote;
    auto [it, fresh] = buckets.try_emplace(key, Bucket{0, r});
    ++it->second.count;
  }
  const Bucket* winner = nullptr;
  const std::string* winner_key = nullptr;
  for (const auto& [key, b] : buckets) {
    if (winner == nullptr || b.count > winner->count ||
        (b.count == winner->count && b.first_run < winner->first_run)) {
      winner = &b;
      winner_key = &key;
    }
  }
  if (*winner_key == kNoAnswerVote) return 0;
  return runs.at(prompt, winner->first_run).correct;
}

}  // namespace

double aggregate_of_n(const RunSet& runs, AggMode mode) {
  double sum = 0.0;
  for (int p = 0; p < runs.prompt_count(); ++p) {
    int value = 0;
    switch (mode) {
      case AggMode::Worst: {
        value = 1;
        for (int r = 0; r < runs.run_count(); ++r) value &= runs.at(p, r).correct;
        break;
      }
      case AggMode::Best: {
        value = 0;
        for (int r = 0; r < runs.run_count(); ++r) value |= runs.at(p, r).correct;
        break;
      }
      case AggMode::Majority:
        value = majority_correct(runs, p);
        break;
    }
    sum += value;
  }
  return sum / static_cast<double>(runs.prompt_count());
}

TokenUsage token_usage(const RunSet& runs) {
  TokenUsage out;
  double grand = 0.0;
  double std_sum = 0.0;
  for (int p = 0; p < runs.prompt_count(); ++p) {
    std::vector<double> lens;
    lens.reserve(static_cast<size_t>(runs.run_count()));
    for (int r = 0; r < runs.run_count(); ++r) {
      lens.push_back(static_cast<double>(runs.at(p, r).completion_tokens));
    }
    double mean = 0.0;
    for (double x : lens) mean += x;
    mean /= static_cast<double>(lens.size());
    grand += mean;
    std_sum += sample_std(lens, mean);
  }
  out.mean_completion = grand / static_cast<double>(runs.prompt_count());
  out.mean_per_prompt_std = std_sum / static_cast<double>(runs.prompt_count());
  return out;
}

AggregateReport aggregate_report(const RunSet& runs, bool with_kde,
                                 std::optional<double> bandwidth) {
  AggregateReport rep;
  rep.runs = runs.run_count();
  rep.prompts = runs.prompt_count();
  rep.pass1 = pass_at_1(runs);
  rep.worst_of_n = aggregate_of_n(runs, AggMode::Worst);
  rep.majority_vote = aggregate_of_n(runs, AggMode::Majority);
  rep.best_of_n = aggregate_of_n(runs, AggMode::Best);
  rep.tokens = token_usage(runs);
  if (with_kde && (runs.run_count() >= 2 || bandwidth)) {
    rep.kde = kde_accuracy(runs.per_run_accuracy(), bandwidth);
  }
  return rep;
}

std::vector<std::pair<std::string, AggregateReport>> disaggregate(const RunSet& runs,
                                                                  GroupKey key) {
  std::map<std::string, std::vector<GenerationRecord>> groups;
  for (int p = 0; p < runs.prompt_count(); ++p) {
    const auto& first = runs.at(p, 0);
    std::string label = key == GroupKey::Difficulty ? first.difficulty_label : first.topic_label;
    if (label.empty()) label = "unlabeled";
    for (int r = 0; r < runs.run_count(); ++r) {
      groups[label].push_back(runs.at(p, r));
    }
  }
  std::vector<std::pair<std::string, AggregateReport>> out;
  for (auto& [label, records] : groups) {
    out.emplace_back(label, aggregate_report(RunSet::build(std::move(records)), false));
  }
  return out;
}

std::vector<GenerationRecord> load_generation_records(const std::string& path) {
  std::vector<GenerationRecord> records;
  for_each_jsonl(path, [&](size_t, const nlohmann::json& j) {
    if (!j.is_object()) throw std::runtime_error("record must be a JSON object");
    GenerationRecord r;
    auto need_string = [&](const char* field) {
      if (!j.contains(field) || !j[field].is_string()) {
        throw std::runtime_error(std::string("missing string field '") + field + "'");
      }
      return j[field].get<std::string>();
    };
    auto need_count = [&](const char* field) {
      if (!j.contains(field) || !j[field].is_number_integer()) {
        throw std::runtime_error(std::string("missing integer field '") + field + "'");
      }
      const long v = j[field].get<long>();
      if (v < 0) throw std::runtime_error(std::string("field '") + field + "' must be >= 0");
      return v;
    };
    r.benchmark_id = need_string("benchmark_id");
    r.prompt_id = need_string("prompt_id");
    r.run_id = need_string("run_id");
    r.response_text = need_string("response_text");
    if (j.contains("extracted_answer")) {
      r.extracted_present = true;
      if (j["extracted_answer"].is_string()) {
        r.extracted_answer = j["extracted_answer"].get<std::string>();
      } else if (!j["extracted_answer"].is_null()) {
        throw std::runtime_error("field 'extracted_answer' must be a string or null");
      }
    }
    if (j.contains("correct") && j["correct"].is_boolean()) {
      r.correct = j["correct"].get<bool>() ? 1 : 0;
    } else if (j.contains("correct") && j["correct"].is_number_integer()) {
      const int c = j["correct"].get<int>();
      if (c != 0 && c != 1) throw std::runtime_error("field 'correct' must be 0 or 1");
      r.correct = c;
    } else {
      throw std::runtime_error("missing field 'correct' (0/1 or boolean)");
    }
    r.prompt_tokens = need_count("prompt_tokens");
    r.completion_tokens = need_count("completion_tokens");
    if (j.contains("difficulty_label") && j["difficulty_label"].is_string()) {
      r.difficulty_label = j["difficulty_label"].get<std::string>();
    }
    if (j.contains("topic_label") && j["topic_label"].is_string()) {
      r.topic_label = j["topic_label"].get<std::string>();
    }
    records.push_back(std::move(r));
  });
  return records;
}

namespace {

nlohmann::ordered_json report_json(const AggregateReport& rep) {
  nlohmann::ordered_json j{
      {"runs", rep.runs},
      {"prompts", rep.prompts},
      {"pass_at_1",
       {{"mean", rep.pass1.mean},
        {"std", rep.pass1.std_dev},
        {"single_run", rep.pass1.single_run}}},
      {"aggregates",
       {{"worst_of_n", rep.worst_of_n},
        {"majority_vote", rep.majority_vote},
        {"best_of_n", rep.best_of_n}}},
      {"token_usage",
       {{"mean_completion_tokens", rep.tokens.mean_completion},
        {"mean_per_prompt_std", rep.tokens.mean_per_prompt_std}}},
  };
  if (rep.kde) {
    j["kde"] = {{"bandwidth", rep.kde->bandwidth},
                {"degenerate", rep.kde->degenerate},
                {"grid", rep.kde->grid},
                {"density", rep.kde->density}};
  }
  return j;
}

}  // namespace

std::string eval_report_json(const RunSet& runs, const EvalReportOptions& options) {
  nlohmann::ordered_json j;
  j["benchmark_id"] = runs.benchmark_id();
  j.update(report_json(aggregate_report(runs, options.with_kde, options.bandwidth)));
  if (options.by_difficulty) {
    auto& arr = j["by_difficulty"] = nlohmann::ordered_json::array();
    for (const auto& [label, rep] : disaggregate(runs, GroupKey::Difficulty)) {
      nlohmann::ordered_json slice = report_json(rep);
      slice.erase("runs");
      arr.push_back(nlohmann::ordered_json{{"label", label}});
      arr.back().update(slice);
    }
  }
  if (options.by_topic) {
    auto& arr = j["by_topic"] = nlohmann::ordered_json::array();
    for (const auto& [label, rep] : disaggregate(runs, GroupKey::Topic)) {
      nlohmann::ordered_json slice = report_json(rep);
      slice.erase("runs");
      arr.push_back(nlohmann::ordered_json{{"label", label}});
      arr.back().update(slice);
    }
  }
  return j.dump(2);
}

std::string disaggregation_csv(const RunSet& runs, GroupKey key) {
  std::ostringstream out;
  out << "label,prompts,pass1_mean,pass1_std,worst_of_n,majority_vote,best_of_n,"
         "mean_completion_tokens,mean_per_prompt_token_std\n";
  out.precision(12);
  for (const auto& [label, rep] : disaggregate(runs, key)) {
    out << label << ',' << rep.prompts << ',' << rep.pass1.mean << ',' << rep.pass1.std_dev
        << ',' << rep.worst_of_n << ',' << rep.majority_vote << ',' << rep.best_of_n << ','
        << rep.tokens.mean_completion << ',' << rep.tokens.mean_per_prompt_std << '\n';
  }
  return out.str();
}

}  // namespace rlvr
