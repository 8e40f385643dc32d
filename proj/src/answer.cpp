#include "answer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

#include "verifier_client.hpp"

namespace rlvr {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Correct:
      return "correct";
    case Verdict::Incorrect:
      return "incorrect";
    case Verdict::Indeterminate:
      return "indeterminate";
  }
  return "unknown";
}

const char* to_string(VerifyMethod m) {
  switch (m) {
    case VerifyMethod::ExactMatch:
      return "exact_match";
    case VerifyMethod::NumericEquivalence:
      return "numeric_equivalence";
    case VerifyMethod::ExternalVerifier:
      return "external_verifier";
    case VerifyMethod::NoAnswerFound:
      return "no_answer_found";
  }
  return "unknown";
}

namespace {

std::string trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// LaTeX commands that only affect layout; removed during normalization.
// Longest-match order, all require a non-letter follower.
constexpr std::array<std::string_view, 22> kLayoutCommands = {
    "displaystyle", "textstyle", "qquad", "quad",  "Biggl", "Biggr", "Biggm", "biggl",
    "biggr",        "biggm",     "Bigg",  "bigg",  "Bigl",  "Bigr",  "Bigm",  "bigl",
    "bigr",         "bigm",      "Big",   "big",   "left",  "right"};

std::string strip_layout_commands(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '\\') {
      out.push_back(s[i++]);
      continue;
    }
    const std::string_view rest(s.data() + i + 1, s.size() - i - 1);
    // \, \; \: \! and backslash-space are pure spacing.
    if (!rest.empty() && (rest[0] == ',' || rest[0] == ';' || rest[0] == ':' || rest[0] == '!' ||
                          rest[0] == ' ')) {
      i += 2;
      continue;
    }
    bool matched = false;
    for (const auto cmd : kLayoutCommands) {
      if (rest.substr(0, cmd.size()) == cmd) {
        const size_t after = cmd.size();
        if (after >= rest.size() || !std::isalpha(static_cast<unsigned char>(rest[after]))) {
          i += 1 + cmd.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(s[i++]);
  }
  return out;
}

std::string strip_outer_dollars(const std::string& s) {
  size_t lead = 0;
  size_t tail = 0;
  while (lead < s.size() && s[lead] == '$') ++lead;
  while (tail < s.size() && s[s.size() - 1 - tail] == '$') ++tail;
  const size_t k = std::min(lead, tail);
  if (k == 0 || 2 * k >= s.size() + 1) return k > 0 && 2 * k == s.size() ? std::string() : s;
  const std::string inner = s.substr(k, s.size() - 2 * k);
  if (inner.find('$') != std::string::npos) return s;
  return inner;
}

std::string collapse_whitespace(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(' ');
    in_space = false;
    out.push_back(c);
  }
  return out;
}

std::string normalize_once(const std::string& in) {
  std::string s = trim(in);
  s = strip_outer_dollars(s);
  s = strip_layout_commands(s);
  s = collapse_whitespace(s);
  while (!s.empty() && s.back() == '.') s.pop_back();
  s = trim(s);
  const bool pure_words =
      !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalpha(c) || c == ' ';
      });
  if (pure_words) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  return s;
}

bool parse_int64(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  size_t i = 0;
  bool neg = false;
  if (s[0] == '+' || s[0] == '-') {
    neg = s[0] == '-';
    i = 1;
  }
  if (i == s.size()) return false;
  std::int64_t value = 0;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    const int d = s[i] - '0';
    if (value > (INT64_MAX - d) / 10) return false;
    value = value * 10 + d;
  }
  out = neg ? -value : value;
  return true;
}

NumericValue make_rational(std::int64_t num, std::int64_t den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  NumericValue v;
  v.exact = true;
  v.num = num;
  v.den = den;
  v.approx = static_cast<double>(num) / static_cast<double>(den);
  return v;
}

// [+-]?digits(.digits)? as an exact ratio over a power of ten.
bool parse_decimal_exact(std::string_view s, NumericValue& out) {
  if (s.empty()) return false;
  size_t i = 0;
  bool neg = false;
  if (s[0] == '+' || s[0] == '-') {
    neg = s[0] == '-';
    i = 1;
  }
  std::int64_t num = 0;
  std::int64_t den = 1;
  size_t digits = 0;
  bool seen_dot = false;
  for (; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '.') {
      if (seen_dot) return false;
      seen_dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    if (++digits > 18) return false;
    num = num * 10 + (c - '0');
    if (seen_dot) den *= 10;
  }
  if (digits == 0) return false;
  out = make_rational(neg ? -num : num, den);
  return true;
}

// \frac{a}{b} with integer parts; also \dfrac and \tfrac.
bool parse_latex_fraction(std::string_view s, NumericValue& out) {
  bool neg = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    neg = s[0] == '-';
    s.remove_prefix(1);
  }
  for (const std::string_view prefix : {"\\frac", "\\dfrac", "\\tfrac"}) {
    if (s.substr(0, prefix.size()) == prefix) {
      s.remove_prefix(prefix.size());
      break;
    }
  }
  if (s.empty() || s[0] != '{') return false;
  const size_t close1 = s.find('}');
  if (close1 == std::string_view::npos) return false;
  const std::string_view a = s.substr(1, close1 - 1);
  s.remove_prefix(close1 + 1);
  if (s.size() < 2 || s[0] != '{' || s.back() != '}') return false;
  const std::string_view b = s.substr(1, s.size() - 2);
  std::int64_t num = 0;
  std::int64_t den = 0;
  if (!parse_int64(a, num) || !parse_int64(b, den) || den == 0) return false;
  out = make_rational(neg ? -num : num, den);
  return true;
}

bool looks_like_number_start(std::string_view s) {
  if (s.empty()) return false;
  const char c = s[0];
  return std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
}

}  // namespace

std::string normalize_answer(std::string_view raw) {
  std::string s(raw);
  for (int i = 0; i < 8; ++i) {
    std::string next = normalize_once(s);
    if (next == s) break;
    s = std::move(next);
  }
  return s;
}

std::optional<NumericValue> parse_numeric(std::string_view s) {
  if (s.empty()) return std::nullopt;

  if (s.find("\\frac") != std::string_view::npos ||
      s.find("\\dfrac") != std::string_view::npos ||
      s.find("\\tfrac") != std::string_view::npos) {
    NumericValue v;
    if (parse_latex_fraction(s, v)) return v;
    return std::nullopt;
  }

  const size_t slash = s.find('/');
  if (slash != std::string_view::npos) {
    if (s.find('/', slash + 1) != std::string_view::npos) return std::nullopt;
    std::int64_t num = 0;
    std::int64_t den = 0;
    if (parse_int64(s.substr(0, slash), num) && parse_int64(s.substr(slash + 1), den) &&
        den != 0) {
      return make_rational(num, den);
    }
    return std::nullopt;
  }

  NumericValue exact;
  if (parse_decimal_exact(s, exact)) return exact;

  if (!looks_like_number_start(s)) return std::nullopt;
  const std::string buf(s);
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE || !std::isfinite(d)) {
    return std::nullopt;
  }
  NumericValue v;
  v.exact = false;
  v.approx = d;
  return v;
}

ExtractedAnswer make_answer(std::string_view raw, AnswerSource source) {
  ExtractedAnswer a;
  a.raw = std::string(raw);
  a.normalized = normalize_answer(raw);
  a.numeric = parse_numeric(a.normalized);
  a.source = source;
  return a;
}

std::optional<ExtractedAnswer> extract_boxed(std::string_view text) {
  constexpr std::string_view kTag = "\\boxed{";
  std::optional<std::string_view> last;
  size_t pos = text.find(kTag);
  while (pos != std::string_view::npos) {
    const size_t begin = pos + kTag.size();
    int depth = 1;
    size_t i = begin;
    for (; i < text.size(); ++i) {
      if (text[i] == '{') {
        ++depth;
      } else if (text[i] == '}') {
        if (--depth == 0) break;
      }
    }
    if (i < text.size() && depth == 0) {
      last = text.substr(begin, i - begin);
    }
    pos = text.find(kTag, pos + kTag.size());
  }
  if (!last) return std::nullopt;
  return make_answer(*last, AnswerSource::BoxedTag);
}

bool answers_equivalent(const ExtractedAnswer& a, const ExtractedAnswer& b) {
  if (a.normalized == b.normalized) return true;
  if (a.numeric && b.numeric) {
    if (a.numeric->exact && b.numeric->exact) {
      const __int128 lhs = static_cast<__int128>(a.numeric->num) * b.numeric->den;
      const __int128 rhs = static_cast<__int128>(b.numeric->num) * a.numeric->den;
      return lhs == rhs;
    }
    const double x = a.numeric->approx;
    const double y = b.numeric->approx;
    return std::abs(x - y) <= 1e-9 * std::max(std::abs(x), std::abs(y));
  }
  return false;
}

VerificationResult verify(std::string_view response, std::string_view gold,
                          ExternalVerifier* external) {
  if (gold.empty()) {
    throw std::invalid_argument("verify: gold answer must be non-empty");
  }
  VerificationResult result;
  auto extracted = extract_boxed(response);
  if (extracted) {
    const ExtractedAnswer gold_answer = make_answer(gold, AnswerSource::WholeResponse);
    result.answer = std::move(extracted);
    const bool string_match = result.answer->normalized == gold_answer.normalized;
    const bool equivalent = answers_equivalent(*result.answer, gold_answer);
    result.verdict = equivalent ? Verdict::Correct : Verdict::Incorrect;
    if (equivalent) {
      result.method = string_match ? VerifyMethod::ExactMatch : VerifyMethod::NumericEquivalence;
    } else {
      result.method = (result.answer->numeric && gold_answer.numeric)
                          ? VerifyMethod::NumericEquivalence
                          : VerifyMethod::ExactMatch;
    }
    return result;
  }

  if (external != nullptr) {
    result.method = VerifyMethod::ExternalVerifier;
    try {
      auto judgement = external->judge(response, gold);
      result.verdict = judgement.verdict;
      result.note = std::move(judgement.note);
      result.external_latency_ms = judgement.latency_ms;
    } catch (const VerifierTransportError& err) {
      result.verdict = Verdict::Indeterminate;
      result.note = err.what();
    }
    return result;
  }

  result.verdict = Verdict::Indeterminate;
  result.method = VerifyMethod::NoAnswerFound;
  return result;
}

}  // namespace rlvr
