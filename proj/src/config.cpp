#include "config.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace rlvr {

namespace {

using nlohmann::json;

void ensure_object(const json& j, const std::string& scope) {
  if (!j.is_object()) throw std::invalid_argument(scope + " must be a JSON object");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& scope) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) throw std::invalid_argument(scope + ": unknown key '" + item.key() + "'");
  }
}

void read_double(const json& j, const char* key, double& out, const std::string& scope) {
  if (!j.contains(key)) return;
  if (!j[key].is_number()) throw std::invalid_argument(scope + "." + key + " must be a number");
  out = j[key].get<double>();
}

void read_long(const json& j, const char* key, long& out, const std::string& scope) {
  if (!j.contains(key)) return;
  if (!j[key].is_number_integer()) {
    throw std::invalid_argument(scope + "." + key + " must be an integer");
  }
  out = j[key].get<long>();
}

void read_int(const json& j, const char* key, int& out, const std::string& scope) {
  long v = out;
  read_long(j, key, v, scope);
  out = static_cast<int>(v);
}

void read_string(const json& j, const char* key, std::string& out, const std::string& scope) {
  if (!j.contains(key)) return;
  if (!j[key].is_string()) throw std::invalid_argument(scope + "." + key + " must be a string");
  out = j[key].get<std::string>();
}

void read_string_list(const json& j, const char* key, std::vector<std::string>& out,
                      const std::string& scope) {
  if (!j.contains(key)) return;
  if (!j[key].is_array()) {
    throw std::invalid_argument(scope + "." + key + " must be an array of strings");
  }
  out.clear();
  for (const auto& v : j[key]) {
    if (!v.is_string()) {
      throw std::invalid_argument(scope + "." + key + " must be an array of strings");
    }
    out.push_back(v.get<std::string>());
  }
}

void apply_reward(const json& j, RewardConfig& c) {
  const std::string scope = "reward";
  ensure_object(j, scope);
  check_keys(j,
             {"l_max", "l_pos_control", "l_neg_control", "r_plus_min", "r_plus_max",
              "r_minus_min", "r_minus_max", "w_acc", "w_rep", "ngram_size",
              "ngram_freq_threshold", "incomplete_override", "invalid_think_override"},
             scope);
  read_long(j, "l_max", c.l_max, scope);
  read_long(j, "l_pos_control", c.l_pos_control, scope);
  read_long(j, "l_neg_control", c.l_neg_control, scope);
  read_double(j, "r_plus_min", c.r_plus_min, scope);
  read_double(j, "r_plus_max", c.r_plus_max, scope);
  read_double(j, "r_minus_min", c.r_minus_min, scope);
  read_double(j, "r_minus_max", c.r_minus_max, scope);
  read_double(j, "w_acc", c.w_acc, scope);
  read_double(j, "w_rep", c.w_rep, scope);
  read_int(j, "ngram_size", c.ngram_size, scope);
  read_int(j, "ngram_freq_threshold", c.ngram_freq_threshold, scope);
  read_double(j, "incomplete_override", c.incomplete_override, scope);
  read_double(j, "invalid_think_override", c.invalid_think_override, scope);
}

void apply_grpo(const json& j, GrpoConfig& c) {
  const std::string scope = "grpo";
  ensure_object(j, scope);
  check_keys(j,
             {"group_size", "clip_epsilon", "kl_coeff", "entropy_coeff", "learning_rate",
              "max_generation_tokens"},
             scope);
  read_int(j, "group_size", c.group_size, scope);
  read_double(j, "clip_epsilon", c.clip_epsilon, scope);
  read_double(j, "kl_coeff", c.kl_coeff, scope);
  read_double(j, "entropy_coeff", c.entropy_coeff, scope);
  read_double(j, "learning_rate", c.learning_rate, scope);
  read_long(j, "max_generation_tokens", c.max_generation_tokens, scope);
}

void apply_curation(const json& j, CurationConfig& c) {
  const std::string scope = "curation";
  ensure_object(j, scope);
  check_keys(j, {"ngram", "threshold", "band_lo", "band_hi"}, scope);
  read_int(j, "ngram", c.ngram, scope);
  read_double(j, "threshold", c.threshold, scope);
  read_double(j, "band_lo", c.band_lo, scope);
  read_double(j, "band_hi", c.band_hi, scope);
}

void apply_verifier(const json& j, VerifierConfig& c) {
  const std::string scope = "verifier";
  ensure_object(j, scope);
  check_keys(j,
             {"url", "auth_header", "auth_env", "timeout_seconds", "instructions",
              "verdict_field", "correct_values", "incorrect_values", "max_concurrency"},
             scope);
  read_string(j, "url", c.url, scope);
  read_string(j, "auth_header", c.auth_header, scope);
  read_string(j, "auth_env", c.auth_env, scope);
  read_double(j, "timeout_seconds", c.timeout_seconds, scope);
  read_string(j, "instructions", c.instructions, scope);
  read_string(j, "verdict_field", c.verdict_field, scope);
  read_string_list(j, "correct_values", c.correct_values, scope);
  read_string_list(j, "incorrect_values", c.incorrect_values, scope);
  read_int(j, "max_concurrency", c.max_concurrency, scope);
}

void apply_service(const json& j, ServiceConfig& c) {
  const std::string scope = "service";
  ensure_object(j, scope);
  check_keys(j, {"host", "port"}, scope);
  read_string(j, "host", c.host, scope);
  read_int(j, "port", c.port, scope);
}

}  // namespace

void CurationConfig::validate() const {
  if (ngram < 3) throw std::invalid_argument("curation.ngram must be >= 3");
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("curation.threshold must be in (0, 1]");
  }
  if (!(band_lo >= 0.0 && band_lo <= band_hi && band_hi <= 1.0)) {
    throw std::invalid_argument("curation band must satisfy 0 <= lo <= hi <= 1");
  }
}

void ServiceConfig::validate() const {
  if (host.empty()) throw std::invalid_argument("service.host must be non-empty");
  if (port < 0 || port > 65535) throw std::invalid_argument("service.port must be in 0..65535");
}

ToolkitConfig ToolkitConfig::from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("config: invalid JSON");
  ensure_object(j, "config");
  check_keys(j, {"reward", "grpo", "curation", "service", "verifier"}, "config");
  ToolkitConfig c;
  if (j.contains("reward")) apply_reward(j["reward"], c.reward);
  if (j.contains("grpo")) apply_grpo(j["grpo"], c.grpo);
  if (j.contains("curation")) apply_curation(j["curation"], c.curation);
  if (j.contains("service")) apply_service(j["service"], c.service);
  if (j.contains("verifier")) {
    VerifierConfig v;
    apply_verifier(j["verifier"], v);
    c.verifier = std::move(v);
  }
  c.validate();
  return c;
}

ToolkitConfig ToolkitConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return from_json_text(text);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

void ToolkitConfig::validate() const {
  reward.validate();
  grpo.validate();
  curation.validate();
  service.validate();
  if (verifier) verifier->validate();
}

std::string ToolkitConfig::to_json_text() const {
  nlohmann::ordered_json j{
      {"reward",
       {{"l_max", reward.l_max},
        {"l_pos_control", reward.l_pos_control},
        {"l_neg_control", reward.l_neg_control},
        {"r_plus_min", reward.r_plus_min},
        {"r_plus_max", reward.r_plus_max},
        {"r_minus_min", reward.r_minus_min},
        {"r_minus_max", reward.r_minus_max},
        {"w_acc", reward.w_acc},
        {"w_rep", reward.w_rep},
        {"ngram_size", reward.ngram_size},
        {"ngram_freq_threshold", reward.ngram_freq_threshold},
        {"incomplete_override", reward.incomplete_override},
        {"invalid_think_override", reward.invalid_think_override}}},
      {"grpo",
       {{"group_size", grpo.group_size},
        {"clip_epsilon", grpo.clip_epsilon},
        {"kl_coeff", grpo.kl_coeff},
        {"entropy_coeff", grpo.entropy_coeff},
        {"learning_rate", grpo.learning_rate},
        {"max_generation_tokens", grpo.max_generation_tokens}}},
      {"curation",
       {{"ngram", curation.ngram},
        {"threshold", curation.threshold},
        {"band_lo", curation.band_lo},
        {"band_hi", curation.band_hi}}},
      {"service", {{"host", service.host}, {"port", service.port}}},
  };
  if (verifier) {
    j["verifier"] = {{"url", verifier->url},
                     {"auth_header", verifier->auth_header},
                     {"auth_env", verifier->auth_env},
                     {"timeout_seconds", verifier->timeout_seconds},
                     {"instructions", verifier->instructions},
                     {"verdict_field", verifier->verdict_field},
                     {"correct_values", verifier->correct_values},
                     {"incorrect_values", verifier->incorrect_values},
                     {"max_concurrency", verifier->max_concurrency}};
  }
  return j.dump(2);
}

ToyTrainConfig toy_train_config_from_json_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("toy options: invalid JSON");
  ensure_object(j, "toy options");
  const std::string scope = "toy";
  check_keys(j,
             {"steps", "batch_size", "max_tokens", "context_window", "temperature",
              "init_scale", "format_prior", "inner_updates", "warmup_steps", "momentum",
              "heldout_size", "seed", "difficulty_mix", "reward", "grpo"},
             scope);
  ToyTrainConfig c = ToyTrainConfig::toy_default();
  read_int(j, "steps", c.steps, scope);
  read_int(j, "batch_size", c.batch_size, scope);
  read_int(j, "max_tokens", c.max_tokens, scope);
  read_int(j, "context_window", c.context_window, scope);
  read_double(j, "temperature", c.temperature, scope);
  read_double(j, "init_scale", c.init_scale, scope);
  read_double(j, "format_prior", c.format_prior, scope);
  read_int(j, "inner_updates", c.inner_updates, scope);
  read_int(j, "warmup_steps", c.warmup_steps, scope);
  read_double(j, "momentum", c.momentum, scope);
  read_int(j, "heldout_size", c.heldout_size, scope);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() && !j["seed"].is_number_unsigned()) {
      throw std::invalid_argument("toy.seed must be a non-negative integer");
    }
    if (j["seed"].is_number_integer() && j["seed"].get<long long>() < 0) {
      throw std::invalid_argument("toy.seed must be a non-negative integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("difficulty_mix")) {
    if (!j["difficulty_mix"].is_array()) {
      throw std::invalid_argument("toy.difficulty_mix must be an array of integers");
    }
    c.task.difficulty_mix.clear();
    for (const auto& v : j["difficulty_mix"]) {
      if (!v.is_number_integer()) {
        throw std::invalid_argument("toy.difficulty_mix must be an array of integers");
      }
      c.task.difficulty_mix.push_back(v.get<int>());
    }
  }
  if (j.contains("reward")) apply_reward(j["reward"], c.reward);
  if (j.contains("grpo")) apply_grpo(j["grpo"], c.grpo);
  c.validate();
  return c;
}

std::string toy_train_config_json(const ToyTrainConfig& c) {
  nlohmann::ordered_json j{
      {"steps", c.steps},
      {"batch_size", c.batch_size},
      {"max_tokens", c.max_tokens},
      {"context_window", c.context_window},
      {"temperature", c.temperature},
      {"init_scale", c.init_scale},
      {"format_prior", c.format_prior},
      {"inner_updates", c.inner_updates},
      {"warmup_steps", c.warmup_steps},
      {"momentum", c.momentum},
      {"heldout_size", c.heldout_size},
      {"seed", c.seed},
      {"difficulty_mix", c.task.difficulty_mix},
      {"grpo",
       {{"group_size", c.grpo.group_size},
        {"clip_epsilon", c.grpo.clip_epsilon},
        {"kl_coeff", c.grpo.kl_coeff},
        {"entropy_coeff", c.grpo.entropy_coeff},
        {"learning_rate", c.grpo.learning_rate},
        {"max_generation_tokens", c.grpo.max_generation_tokens}}},
      {"reward",
       {{"l_max", c.reward.l_max},
        {"l_pos_control", c.reward.l_pos_control},
        {"l_neg_control", c.reward.l_neg_control}}},
  };
  return j.dump(2);
}

}  // namespace rlvr
