#pragma once

#include <memory>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "answer.hpp"

namespace rlvr {

struct VerifierConfig {
  std::string url;  // full endpoint, e.g. "http://127.0.0.1:8800/v1/judge"
  std::string auth_header = "Authorization";
  // Name of the environment variable holding the header value. The value is
  // sent verbatim, so include any "Bearer " prefix in the variable itself.
  std::string auth_env = "RLVR_VERIFIER_TOKEN";
  double timeout_seconds = 30.0;
  // Judge instructions forwarded verbatim in the request body.
  std::string instructions = "Decide whether the response answers the gold answer.";
  std::string verdict_field = "verdict";
  std::vector<std::string> correct_values = {"correct", "yes", "true"};
  std::vector<std::string> incorrect_values = {"incorrect", "no", "false"};
  int max_concurrency = 4;

  void validate() const;
};

// Raised when the judge endpoint cannot be reached or answers with a
// non-200 status. Callers map this to an Indeterminate verdict.
class VerifierTransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExternalVerifier {
 public:
  struct Judgement {
    Verdict verdict = Verdict::Indeterminate;
    std::string note;
    double latency_ms = 0.0;
  };

  virtual ~ExternalVerifier() = default;
  virtual Judgement judge(std::string_view response, std::string_view gold) = 0;
};

// HTTP judge client. POSTs {"response", "gold", "instructions"} as JSON and
// reads the verdict from the configured reply field. Shareable across
// threads; in-flight requests are bounded by max_concurrency.
class HttpVerifier : public ExternalVerifier {
 public:
  explicit HttpVerifier(VerifierConfig config);
  Judgement judge(std::string_view response, std::string_view gold) override;

 private:
  VerifierConfig config_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
  std::string auth_value_;
  std::counting_semaphore<> slots_;
};

}  // namespace rlvr
