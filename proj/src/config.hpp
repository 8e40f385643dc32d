#pragma once

#include <optional>
#include <string>

#include "grpo.hpp"
#include "reward.hpp"
#include "toy_trainer.hpp"
#include "verifier_client.hpp"

namespace rlvr {

struct CurationConfig {
  int ngram = 13;
  double threshold = 0.25;
  double band_lo = 0.1;
  double band_hi = 0.7;

  void validate() const;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 binds an ephemeral port

  void validate() const;
};

// One config file governs every module. Parsing is strict: unknown keys are
// an error so typos cannot silently fall back to defaults.
struct ToolkitConfig {
  RewardConfig reward;
  GrpoConfig grpo;
  CurationConfig curation;
  ServiceConfig service;
  std::optional<VerifierConfig> verifier;

  static ToolkitConfig from_json_text(const std::string& text);
  static ToolkitConfig from_file(const std::string& path);
  std::string to_json_text() const;
  void validate() const;
};

// Toy training options: top-level trainer knobs plus optional "reward" and
// "grpo" sections in the same shape as the toolkit config. Starts from
// ToyTrainConfig::toy_default().
ToyTrainConfig toy_train_config_from_json_text(const std::string& text);
std::string toy_train_config_json(const ToyTrainConfig& config);

}  // namespace rlvr
