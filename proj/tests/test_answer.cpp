#include <stdexcept>

#include "answer.hpp"
#include "doctest.h"
#include "verifier_client.hpp"

using namespace rlvr;

namespace {

class FakeVerifier : public ExternalVerifier {
 public:
  explicit FakeVerifier(Verdict verdict, bool fail = false) : verdict_(verdict), fail_(fail) {}

  Judgement judge(std::string_view, std::string_view) override {
    ++calls;
    if (fail_) throw VerifierTransportError("connection refused");
    Judgement j;
    j.verdict = verdict_;
    j.latency_ms = 1.5;
    return j;
  }

  int calls = 0;

 private:
  Verdict verdict_;
  bool fail_;
};

}  // namespace

TEST_CASE("normalize_answer cleanup rules") {
  CHECK(normalize_answer("  42 ") == "42");
  CHECK(normalize_answer("$x+1$") == "x+1");
  CHECK(normalize_answer("$a$ and $b$") == "$a$ and $b$");  // outer strip only
  CHECK(normalize_answer("\\left( 3, 4 \\right)") == "( 3, 4 )");
  CHECK(normalize_answer("1\\,000") == "1000");
  CHECK(normalize_answer("x  \t y") == "x y");
  CHECK(normalize_answer("The Answer.") == "the answer");
  CHECK(normalize_answer("3.14.") == "3.14");
  CHECK(normalize_answer("Ax2") == "Ax2");  // mixed alnum keeps case
  CHECK(normalize_answer("$\\dfrac{1}{2}$") == "\\dfrac{1}{2}");
  CHECK(normalize_answer("") == "");
}

TEST_CASE("normalize_answer is idempotent") {
  for (const char* raw : {"  $ \\left[1, 2\\right] $ .", "A  B c.", "$$x$$", "\\!\\; 7 "}) {
    const auto once = normalize_answer(raw);
    CHECK(normalize_answer(once) == once);
  }
}

TEST_CASE("extract_boxed takes the last well-formed tag") {
  auto a = extract_boxed("so \\boxed{1} then \\boxed{2}");
  REQUIRE(a.has_value());
  CHECK(a->raw == "2");
  CHECK(a->source == AnswerSource::BoxedTag);

  auto nested = extract_boxed("\\boxed{\\frac{1}{2}}");
  REQUIRE(nested.has_value());
  CHECK(nested->raw == "\\frac{1}{2}");

  // The unclosed final tag is skipped in favor of the earlier complete one.
  auto partial = extract_boxed("\\boxed{7} trailing \\boxed{8");
  REQUIRE(partial.has_value());
  CHECK(partial->raw == "7");

  CHECK_FALSE(extract_boxed("no tags").has_value());
  CHECK_FALSE(extract_boxed("\\boxed{never closed").has_value());
}

TEST_CASE("parse_numeric forms") {
  auto n = parse_numeric("42");
  REQUIRE(n.has_value());
  CHECK(n->exact);
  CHECK(n->num == 42);
  CHECK(n->den == 1);

  auto frac = parse_numeric("\\frac{3}{4}");
  REQUIRE(frac.has_value());
  CHECK(frac->exact);
  CHECK(frac->num == 3);
  CHECK(frac->den == 4);

  auto neg = parse_numeric("-\\frac{3}{4}");
  REQUIRE(neg.has_value());
  CHECK(neg->num == -3);

  auto slash = parse_numeric("6/8");
  REQUIRE(slash.has_value());
  CHECK(slash->num == 3);
  CHECK(slash->den == 4);

  auto dec = parse_numeric("0.125");
  REQUIRE(dec.has_value());
  CHECK(dec->exact);
  CHECK(dec->num == 1);
  CHECK(dec->den == 8);

  auto sci = parse_numeric("1e3");
  REQUIRE(sci.has_value());
  CHECK_FALSE(sci->exact);
  CHECK(sci->approx == doctest::Approx(1000.0));

  CHECK_FALSE(parse_numeric("x+1").has_value());
  CHECK_FALSE(parse_numeric("").has_value());
  CHECK_FALSE(parse_numeric("3/0").has_value());
}

TEST_CASE("answers_equivalent") {
  auto eq = [](const char* a, const char* b) {
    return answers_equivalent(make_answer(a, AnswerSource::BoxedTag),
                              make_answer(b, AnswerSource::BoxedTag));
  };
  CHECK(eq("42", "42"));
  CHECK(eq(" 42 ", "42."));
  CHECK(eq("1/2", "\\frac{2}{4}"));
  CHECK(eq("0.5", "1/2"));
  CHECK(eq("0.1", "\\frac{1}{10}"));  // exact rationals, no float round trip
  CHECK(eq("1e-9", "1.0000000005e-9"));
  CHECK_FALSE(eq("1e-9", "1.1e-9"));
  CHECK_FALSE(eq("1/3", "0.333333"));  // finite decimal is not 1/3 exactly
  CHECK(eq("YES", "yes"));
  CHECK_FALSE(eq("41", "42"));
  CHECK_FALSE(eq("x", "y"));
}

TEST_CASE("verify verdicts") {
  const auto ok = verify("<think> t </think> \\boxed{\\frac{1}{2}}", "0.5");
  CHECK(ok.verdict == Verdict::Correct);
  CHECK(ok.method == VerifyMethod::NumericEquivalence);
  REQUIRE(ok.answer.has_value());
  CHECK(ok.answer->normalized == "\\frac{1}{2}");

  const auto exact = verify("\\boxed{Paris}", "paris");
  CHECK(exact.verdict == Verdict::Correct);
  CHECK(exact.method == VerifyMethod::ExactMatch);

  const auto wrong = verify("\\boxed{41}", "42");
  CHECK(wrong.verdict == Verdict::Incorrect);

  const auto none = verify("no boxed answer here", "42");
  CHECK(none.verdict == Verdict::Indeterminate);
  CHECK(none.method == VerifyMethod::NoAnswerFound);

  CHECK_THROWS_AS(verify("\\boxed{1}", ""), std::invalid_argument);
}

TEST_CASE("verify falls back to the external verifier") {
  FakeVerifier yes(Verdict::Correct);
  const auto r = verify("the answer is forty-two", "42", &yes);
  CHECK(r.verdict == Verdict::Correct);
  CHECK(r.method == VerifyMethod::ExternalVerifier);
  CHECK(yes.calls == 1);
  REQUIRE(r.external_latency_ms.has_value());
  CHECK(*r.external_latency_ms == doctest::Approx(1.5));

  // Boxed answers never reach the external verifier.
  FakeVerifier unused(Verdict::Incorrect);
  const auto boxed = verify("\\boxed{42}", "42", &unused);
  CHECK(boxed.verdict == Verdict::Correct);
  CHECK(unused.calls == 0);

  FakeVerifier down(Verdict::Correct, /*fail=*/true);
  const auto failed = verify("forty-two", "42", &down);
  CHECK(failed.verdict == Verdict::Indeterminate);
  CHECK(failed.method == VerifyMethod::ExternalVerifier);
  CHECK(failed.note.find("connection refused") != std::string::npos);
}

TEST_CASE("verdict and method names") {
  CHECK(std::string(to_string(Verdict::Correct)) == "correct");
  CHECK(std::string(to_string(Verdict::Indeterminate)) == "indeterminate");
  CHECK(std::string(to_string(VerifyMethod::NumericEquivalence)) == "numeric_equivalence");
}
