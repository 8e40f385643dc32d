#include "verifier_client.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>

#include "httplib.h"
#include "json.hpp"

namespace rlvr {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool contains_ci(const std::vector<std::string>& values, std::string_view needle) {
  const std::string n = lower(needle);
  return std::any_of(values.begin(), values.end(),
                     [&](const std::string& v) { return lower(v) == n; });
}

// Split "scheme://host[:port]/path" into the client base and request path.
void split_url(const std::string& url, std::string& base, std::string& path) {
  const size_t scheme_end = url.find("://");
  const size_t authority = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const size_t slash = url.find('/', authority);
  if (slash == std::string::npos) {
    base = url;
    path = "/";
  } else {
    base = url.substr(0, slash);
    path = url.substr(slash);
  }
}

}  // namespace

void VerifierConfig::validate() const {
  if (url.empty()) throw std::invalid_argument("verifier.url must be set");
  if (timeout_seconds <= 0) throw std::invalid_argument("verifier.timeout_seconds must be > 0");
  if (max_concurrency < 1) throw std::invalid_argument("verifier.max_concurrency must be >= 1");
  if (verdict_field.empty()) throw std::invalid_argument("verifier.verdict_field must be set");
}

HttpVerifier::HttpVerifier(VerifierConfig config)
    : config_(std::move(config)), slots_(std::max(config_.max_concurrency, 1)) {
  config_.validate();
  split_url(config_.url, base_, path_);
  if (const char* token = std::getenv(config_.auth_env.c_str())) {
    auth_value_ = token;
  }
}

ExternalVerifier::Judgement HttpVerifier::judge(std::string_view response,
                                                std::string_view gold) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<>* s;
    ~Release() { s->release(); }
  } release{&slots_};

  nlohmann::json body = {
      {"response", std::string(response)},
      {"gold", std::string(gold)},
      {"instructions", config_.instructions},
  };

  // One client per request: connections are cheap at this scale and it keeps
  // judge() safe to call from any number of threads.
  httplib::Client client(base_);
  const auto timeout =
      std::chrono::milliseconds(static_cast<long>(config_.timeout_seconds * 1000.0));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  if (!auth_value_.empty()) headers.emplace(config_.auth_header, auth_value_);

  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  const auto elapsed = std::chrono::steady_clock::now() - start;

  Judgement judgement;
  judgement.latency_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count();

  if (!res) {
    throw VerifierTransportError("verifier transport failure: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw VerifierTransportError("verifier returned HTTP " + std::to_string(res->status));
  }

  nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.is_object()) {
    judgement.note = "verifier reply is not a JSON object";
    return judgement;
  }
  if (!reply.contains(config_.verdict_field) || !reply[config_.verdict_field].is_string()) {
    judgement.note = "verifier reply missing string field '" + config_.verdict_field + "'";
    return judgement;
  }
  const std::string verdict = reply[config_.verdict_field].get<std::string>();
  if (contains_ci(config_.correct_values, verdict)) {
    judgement.verdict = Verdict::Correct;
  } else if (contains_ci(config_.incorrect_values, verdict)) {
    judgement.verdict = Verdict::Incorrect;
  } else {
    judgement.note = "unrecognized verdict '" + verdict + "'";
  }
  return judgement;
}

}  // namespace rlvr
