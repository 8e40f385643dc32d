#include <memory>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "scorer.hpp"

using namespace rlvr;

namespace {

const std::string kWellFormed =
    "<think> add the halves </think> The total is \\boxed{42}";

class StubVerifier : public ExternalVerifier {
 public:
  int calls = 0;
  Verdict verdict = Verdict::Correct;
  bool fail = false;

  Judgement judge(std::string_view, std::string_view) override {
    ++calls;
    if (fail) throw VerifierTransportError("connection refused");
    return Judgement{verdict, "stub", 2.5};
  }
};

}  // namespace

TEST_CASE("score request parsing") {
  const auto r = parse_score_request(
      R"({"response_text": "x", "gold_answer": "42", "completion_tokens": 7,
          "prompt_tokens": 3, "eos_present": false})");
  CHECK(r.response_text == "x");
  CHECK(r.gold_answer == "42");
  CHECK(r.completion_tokens == 7);
  CHECK(r.prompt_tokens == 3);
  CHECK_FALSE(r.eos_present);

  CHECK_THROWS_AS(parse_score_request("not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_score_request("[]"), std::invalid_argument);
  CHECK_THROWS_AS(parse_score_request(R"({"gold_answer": "42"})"), std::invalid_argument);
  CHECK_THROWS_AS(
      parse_score_request(R"({"response_text": "x", "gold_answer": "",
                              "completion_tokens": 1, "eos_present": true})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      parse_score_request(R"({"response_text": "x", "gold_answer": "1",
                              "completion_tokens": -2, "eos_present": true})"),
      std::invalid_argument);
  CHECK_THROWS_AS(
      parse_score_request(R"({"response_text": "x", "gold_answer": "1",
                              "completion_tokens": 1})"),
      std::invalid_argument);
}

TEST_CASE("scorer pipeline on a correct short response") {
  Scorer scorer{RewardConfig{}};
  ScoreRequest request;
  request.response_text = kWellFormed;
  request.gold_answer = "42";
  request.completion_tokens = 100;
  const auto out = scorer.score(request);
  CHECK(out.verdict == Verdict::Correct);
  CHECK(out.method == VerifyMethod::ExactMatch);
  REQUIRE(out.extracted_answer.has_value());
  CHECK(*out.extracted_answer == "42");
  CHECK(out.breakdown.acc_raw == 1.0);
  CHECK(out.breakdown.final == doctest::Approx(8.0 / 13.0).epsilon(1e-12));
  CHECK(out.warning.empty());
  CHECK_FALSE(out.external_latency_ms.has_value());
}

TEST_CASE("scorer applies format overrides") {
  Scorer scorer{RewardConfig{}};
  ScoreRequest request;
  request.response_text = kWellFormed;
  request.gold_answer = "42";
  request.completion_tokens = 10;
  request.eos_present = false;
  const auto truncated = scorer.score(request);
  CHECK(truncated.breakdown.format == FormatStatus::MissingEos);
  CHECK(truncated.breakdown.acc_scaled == -0.5);

  request.eos_present = true;
  request.response_text = "no tags at all \\boxed{42}";
  const auto invalid = scorer.score(request);
  CHECK(invalid.breakdown.format == FormatStatus::InvalidThinkBlock);
  CHECK(invalid.breakdown.acc_scaled == -1.0);
  // Verification still ran; the override only affects the reward.
  CHECK(invalid.verdict == Verdict::Correct);
}

TEST_CASE("scorer consults the external verifier only without a boxed answer") {
  auto stub = std::make_shared<StubVerifier>();
  Scorer scorer{RewardConfig{}, stub};

  ScoreRequest request;
  request.response_text = kWellFormed;
  request.gold_answer = "42";
  request.completion_tokens = 10;
  scorer.score(request);
  CHECK(stub->calls == 0);

  request.response_text = "<think> hmm </think> the answer is forty two";
  request.gold_answer = "forty two";
  const auto out = scorer.score(request);
  CHECK(stub->calls == 1);
  CHECK(out.verdict == Verdict::Correct);
  CHECK(out.method == VerifyMethod::ExternalVerifier);
  REQUIRE(out.external_latency_ms.has_value());
  CHECK(*out.external_latency_ms == 2.5);
  CHECK(out.breakdown.acc_raw == 1.0);
}

TEST_CASE("external transport failure degrades to a warning") {
  auto stub = std::make_shared<StubVerifier>();
  stub->fail = true;
  Scorer scorer{RewardConfig{}, stub};

  ScoreRequest request;
  request.response_text = "<think> hmm </think> the answer is forty two";
  request.gold_answer = "forty two";
  request.completion_tokens = 10;
  const auto out = scorer.score(request);
  CHECK(out.verdict == Verdict::Indeterminate);
  CHECK(out.warning.find("connection refused") != std::string::npos);
  // Indeterminate scores as incorrect: deep in the penalty region here.
  CHECK(out.breakdown.acc_raw == 0);
  CHECK(out.breakdown.acc_scaled < -0.99);
}

TEST_CASE("score response json is byte-stable and complete") {
  Scorer scorer{RewardConfig{}};
  ScoreRequest request;
  request.response_text = kWellFormed;
  request.gold_answer = "42";
  request.completion_tokens = 100;
  const auto out = scorer.score(request);
  const auto text = score_response_json(out);
  CHECK(score_response_json(scorer.score(request)) == text);

  const auto j = nlohmann::json::parse(text);
  CHECK(j["final"] == 8.0 / 13.0);
  CHECK(j["acc_raw"] == 1.0);
  CHECK(j["rep_penalty"] == 0.0);
  CHECK(j["format"] == "ok");
  CHECK(j["length"] == 100);
  CHECK(j["verdict"] == "correct");
  CHECK(j["method"] == "exact_match");
  CHECK(j["extracted_answer"] == "42");
  CHECK_FALSE(j.contains("external_latency_ms"));
  CHECK_FALSE(j.contains("warning"));

  ScoreResponse none;
  const auto nj = nlohmann::json::parse(score_response_json(none));
  CHECK(nj["extracted_answer"].is_null());
}
