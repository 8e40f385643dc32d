#include "scorer.hpp"

#include <stdexcept>

#include "json.hpp"

namespace rlvr {

Scorer::Scorer(RewardConfig config, std::shared_ptr<ExternalVerifier> external)
    : config_(std::move(config)), external_(std::move(external)) {
  config_.validate();
}

ScoreResponse Scorer::score(const ScoreRequest& request) const {
  ScoreResponse out;
  const VerificationResult v =
      verify(request.response_text, request.gold_answer, external_.get());
  out.verdict = v.verdict;
  out.method = v.method;
  if (v.answer) out.extracted_answer = v.answer->normalized;
  out.external_latency_ms = v.external_latency_ms;
  if (v.verdict == Verdict::Indeterminate && v.method == VerifyMethod::ExternalVerifier &&
      !v.note.empty()) {
    out.warning = v.note;
  }

  const bool correct = v.verdict == Verdict::Correct;
  const FormatStatus format = check_format(request.response_text, request.eos_present);
  const auto words = split_words(request.response_text);
  out.breakdown =
      final_reward(correct, request.completion_tokens, format, words, config_);
  return out;
}

ScoreRequest parse_score_request(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("score request: invalid JSON");
  if (!j.is_object()) throw std::invalid_argument("score request must be a JSON object");

  ScoreRequest r;
  if (!j.contains("response_text") || !j["response_text"].is_string()) {
    throw std::invalid_argument("score request: missing string field 'response_text'");
  }
  r.response_text = j["response_text"].get<std::string>();
  if (!j.contains("gold_answer") || !j["gold_answer"].is_string() ||
      j["gold_answer"].get<std::string>().empty()) {
    throw std::invalid_argument("score request: missing non-empty string field 'gold_answer'");
  }
  r.gold_answer = j["gold_answer"].get<std::string>();
  if (!j.contains("completion_tokens") || !j["completion_tokens"].is_number_integer()) {
    throw std::invalid_argument("score request: missing integer field 'completion_tokens'");
  }
  r.completion_tokens = j["completion_tokens"].get<long>();
  if (r.completion_tokens < 0) {
    throw std::invalid_argument("score request: 'completion_tokens' must be >= 0");
  }
  if (j.contains("prompt_tokens")) {
    if (!j["prompt_tokens"].is_number_integer() || j["prompt_tokens"].get<long>() < 0) {
      throw std::invalid_argument("score request: 'prompt_tokens' must be an integer >= 0");
    }
    r.prompt_tokens = j["prompt_tokens"].get<long>();
  }
  if (!j.contains("eos_present") || !j["eos_present"].is_boolean()) {
    throw std::invalid_argument("score request: missing boolean field 'eos_present'");
  }
  r.eos_present = j["eos_present"].get<bool>();
  return r;
}

std::string score_response_json(const ScoreResponse& r) {
  nlohmann::ordered_json j{
      {"final", r.breakdown.final},
      {"acc_raw", r.breakdown.acc_raw},
      {"acc_scaled", r.breakdown.acc_scaled},
      {"rep_penalty", r.breakdown.rep_penalty},
      {"format", to_string(r.breakdown.format)},
      {"length", r.breakdown.length},
      {"verdict", to_string(r.verdict)},
      {"method", to_string(r.method)},
      {"extracted_answer", r.extracted_answer ? nlohmann::ordered_json(*r.extracted_answer)
                                              : nlohmann::ordered_json(nullptr)},
  };
  if (r.external_latency_ms) j["external_latency_ms"] = *r.external_latency_ms;
  if (!r.warning.empty()) j["warning"] = r.warning;
  return j.dump();
}

}  // namespace rlvr
