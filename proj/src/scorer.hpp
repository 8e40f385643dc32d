#pragma once

#include <memory>
#include <optional>
#include <string>

#include "answer.hpp"
#include "reward.hpp"
#include "verifier_client.hpp"

namespace rlvr {

struct ScoreRequest {
  std::string response_text;
  std::string gold_answer;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  bool eos_present = true;
};

struct ScoreResponse {
  RewardBreakdown breakdown;
  Verdict verdict = Verdict::Indeterminate;
  VerifyMethod method = VerifyMethod::NoAnswerFound;
  std::optional<std::string> extracted_answer;  // normalized form
  std::optional<double> external_latency_ms;
  std::string warning;  // non-empty when the external verifier failed
};

// Stateless scoring pipeline: verification then the reward breakdown.
// Shareable across threads; external calls are bounded by the verifier's own
// concurrency limit.
class Scorer {
 public:
  explicit Scorer(RewardConfig config, std::shared_ptr<ExternalVerifier> external = nullptr);

  const RewardConfig& config() const { return config_; }
  ScoreResponse score(const ScoreRequest& request) const;

 private:
  RewardConfig config_;
  std::shared_ptr<ExternalVerifier> external_;
};

// JSON text bindings used by the batch CLI and the HTTP service.
ScoreRequest parse_score_request(const std::string& json_text);
std::string score_response_json(const ScoreResponse& response);

}  // namespace rlvr
