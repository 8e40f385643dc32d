#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rlvr {

enum class AnswerSource { BoxedTag, WholeResponse };

// Numeric interpretation of a normalized answer. `exact` means the text
// parsed as an integer or an integer ratio (including \frac{a}{b} and finite
// decimals); such values compare by cross-multiplication instead of floats.
struct NumericValue {
  bool exact = false;
  std::int64_t num = 0;
  std::int64_t den = 1;
  double approx = 0.0;
};

struct ExtractedAnswer {
  std::string raw;
  std::string normalized;
  std::optional<NumericValue> numeric;
  AnswerSource source = AnswerSource::WholeResponse;
};

enum class Verdict { Correct, Incorrect, Indeterminate };
enum class VerifyMethod { ExactMatch, NumericEquivalence, ExternalVerifier, NoAnswerFound };

const char* to_string(Verdict v);
const char* to_string(VerifyMethod m);

struct VerificationResult {
  Verdict verdict = Verdict::Indeterminate;
  VerifyMethod method = VerifyMethod::NoAnswerFound;
  std::string note;  // error detail for external-verifier failures
  std::optional<ExtractedAnswer> answer;
  std::optional<double> external_latency_ms;
};

// Content of the last well-formed \boxed{...} in the text, braces balanced,
// nested braces preserved. Tags whose braces never close are skipped.
std::optional<ExtractedAnswer> extract_boxed(std::string_view text);

// Deterministic, idempotent cleanup: trim, strip outer $..$, drop LaTeX
// size/spacing commands, collapse whitespace, strip trailing periods, and
// lowercase answers made of plain words.
std::string normalize_answer(std::string_view raw);

ExtractedAnswer make_answer(std::string_view raw, AnswerSource source);

std::optional<NumericValue> parse_numeric(std::string_view normalized);

// Normalized-text equality, then exact rational comparison, then float
// comparison at 1e-9 relative tolerance. Symmetric and reflexive.
bool answers_equivalent(const ExtractedAnswer& a, const ExtractedAnswer& b);

class ExternalVerifier;

// Boxed extraction followed by equivalence against the gold answer. When no
// answer can be extracted the external verifier (if any) judges the full
// response; transport failures surface as Indeterminate, never as a throw.
VerificationResult verify(std::string_view response, std::string_view gold,
                          ExternalVerifier* external = nullptr);

}  // namespace rlvr
