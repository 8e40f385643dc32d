#include "curation.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "answer.hpp"
#include "jsonl.hpp"

namespace rlvr {

std::optional<std::string> plurality_answer(std::span<const std::string> answers) {
  if (answers.empty()) return std::nullopt;
  std::vector<std::string> keys;
  keys.reserve(answers.size());
  for (const auto& a : answers) keys.push_back(normalize_answer(a));

  std::optional<std::string> best;
  int best_count = 0;
  for (size_t i = 0; i < keys.size(); ++i) {
    int count = 0;
    for (const auto& k : keys) {
      if (k == keys[i]) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best = keys[i];
    }
  }
  return best;
}

double agreement_rate(std::span<const std::string> weak_answers, const std::string& proxy_gold) {
  if (weak_answers.empty()) {
    throw std::invalid_argument("agreement_rate: weak answer list must be non-empty");
  }
  const ExtractedAnswer gold = make_answer(proxy_gold, AnswerSource::WholeResponse);
  int matches = 0;
  for (const auto& a : weak_answers) {
    if (answers_equivalent(make_answer(a, AnswerSource::WholeResponse), gold)) ++matches;
  }
  return static_cast<double>(matches) / static_cast<double>(weak_answers.size());
}

TeachabilityDecision teachability_filter(double rate, double lo, double hi) {
  if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) {
    throw std::invalid_argument("teachability_filter: band must satisfy 0 <= lo <= hi <= 1");
  }
  TeachabilityDecision d;
  if (rate > hi) {
    d.reason = "too_easy";
  } else if (rate < lo) {
    d.reason = "too_hard";
  } else {
    d.keep = true;
    d.reason = "in_band";
  }
  return d;
}

std::vector<std::string> tokenize_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

namespace {

constexpr int kExactMatchN = 13;

std::vector<std::string> ngram_keys(const std::vector<std::string>& words, int n) {
  std::vector<std::string> keys;
  if (n <= 0 || words.size() < static_cast<size_t>(n)) return keys;
  keys.reserve(words.size() - static_cast<size_t>(n) + 1);
  for (size_t i = 0; i + static_cast<size_t>(n) <= words.size(); ++i) {
    std::string key;
    for (size_t k = 0; k < static_cast<size_t>(n); ++k) {
      if (k > 0) key.push_back('\x1f');
      key += words[i + k];
    }
    keys.push_back(std::move(key));
  }
  return keys;
}

}  // namespace

DecontaminationIndex::DecontaminationIndex(int ngram) : n_(ngram) {
  if (n_ < 3) throw std::invalid_argument("decontamination n-gram size must be >= 3");
}

void DecontaminationIndex::add_benchmark(const std::string& benchmark_id,
                                         std::span<const std::string> prompts) {
  GramSets& sets = benchmarks_[benchmark_id];
  for (const auto& prompt : prompts) {
    const auto words = tokenize_words(prompt);
    for (auto& key : ngram_keys(words, n_)) sets.at_n.insert(std::move(key));
    for (auto& key : ngram_keys(words, kExactMatchN)) sets.at_13.insert(std::move(key));
  }
}

std::optional<ContaminationFlag> DecontaminationIndex::check(std::string_view prompt,
                                                             double threshold) const {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("decontamination threshold must be in (0, 1]");
  }
  const auto words = tokenize_words(std::string(prompt));
  const auto keys_n = ngram_keys(words, n_);
  const auto keys_13 = ngram_keys(words, kExactMatchN);

  std::optional<ContaminationFlag> best;
  for (const auto& [benchmark_id, sets] : benchmarks_) {
    size_t matched = 0;
    for (const auto& key : keys_n) matched += sets.at_n.count(key);
    const double overlap =
        keys_n.empty() ? 0.0 : static_cast<double>(matched) / static_cast<double>(keys_n.size());
    const bool exact13 = std::any_of(keys_13.begin(), keys_13.end(), [&](const std::string& k) {
      return sets.at_13.count(k) > 0;
    });
    if (overlap >= threshold || exact13) {
      if (!best || overlap > best->overlap) {
        best = ContaminationFlag{benchmark_id, overlap,
                                 overlap >= threshold ? "fractional_overlap" : "exact_13gram"};
      }
    }
  }
  return best;
}

DifficultyOutcome assess_difficulty(const CurationRecord& record, double lo, double hi) {
  DifficultyOutcome out;
  out.seed_id = record.seed_id;
  out.proxy_gold = record.proxy_gold ? record.proxy_gold
                                     : plurality_answer(record.strong_model_answers);
  if (!out.proxy_gold) {
    out.reason = "no_proxy_gold";
    return out;
  }
  if (record.weak_model_answers.empty()) {
    out.reason = "no_weak_answers";
    return out;
  }
  out.agreement = agreement_rate(record.weak_model_answers, *out.proxy_gold);
  const TeachabilityDecision d = teachability_filter(*out.agreement, lo, hi);
  out.keep = d.keep;
  out.reason = d.reason;
  return out;
}

std::vector<CurationRecord> load_curation_records(const std::string& path) {
  std::vector<CurationRecord> records;
  for_each_jsonl(path, [&](size_t, const nlohmann::json& j) {
    if (!j.is_object()) throw std::runtime_error("record must be a JSON object");
    CurationRecord r;
    if (!j.contains("seed_id") || !j["seed_id"].is_string()) {
      throw std::runtime_error("missing string field 'seed_id'");
    }
    r.seed_id = j["seed_id"].get<std::string>();
    if (!j.contains("prompt") || !j["prompt"].is_string()) {
      throw std::runtime_error("missing string field 'prompt'");
    }
    r.prompt = j["prompt"].get<std::string>();
    auto read_answers = [&](const char* field, std::vector<std::string>& out) {
      if (!j.contains(field)) return;
      if (!j[field].is_array()) {
        throw std::runtime_error(std::string("field '") + field + "' must be an array");
      }
      for (const auto& a : j[field]) {
        if (!a.is_string()) {
          throw std::runtime_error(std::string("field '") + field +
                                   "' must contain only strings");
        }
        out.push_back(a.get<std::string>());
      }
    };
    read_answers("strong_model_answers", r.strong_model_answers);
    read_answers("weak_model_answers", r.weak_model_answers);
    if (j.contains("proxy_gold") && j["proxy_gold"].is_string()) {
      r.proxy_gold = j["proxy_gold"].get<std::string>();
    }
    records.push_back(std::move(r));
  });
  return records;
}

std::vector<BenchmarkFile> load_benchmark_prompts(const std::string& path) {
  std::map<std::string, std::vector<std::string>> grouped;
  std::vector<std::string> order;
  for_each_jsonl(path, [&](size_t, const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("benchmark_id") || !j["benchmark_id"].is_string() ||
        !j.contains("prompt") || !j["prompt"].is_string()) {
      throw std::runtime_error("expected object with string fields 'benchmark_id' and 'prompt'");
    }
    const std::string id = j["benchmark_id"].get<std::string>();
    if (grouped.find(id) == grouped.end()) order.push_back(id);
    grouped[id].push_back(j["prompt"].get<std::string>());
  });
  std::vector<BenchmarkFile> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    out.push_back(BenchmarkFile{id, std::move(grouped[id])});
  }
  return out;
}

}  // namespace rlvr
