#include <cstdio>
#include <fstream>
#include <string>

#include "config.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace rlvr;

TEST_CASE("toolkit config defaults roundtrip") {
  ToolkitConfig defaults;
  const auto text = defaults.to_json_text();
  const auto parsed = ToolkitConfig::from_json_text(text);
  CHECK(parsed.to_json_text() == text);
  CHECK(parsed.reward.l_max == 31744);
  CHECK(parsed.grpo.group_size == 8);
  CHECK(parsed.curation.ngram == 13);
  CHECK(parsed.service.port == 8080);
  CHECK_FALSE(parsed.verifier.has_value());
}

TEST_CASE("empty object gives pure defaults") {
  const auto parsed = ToolkitConfig::from_json_text("{}");
  CHECK(parsed.to_json_text() == ToolkitConfig{}.to_json_text());
}

TEST_CASE("partial overrides merge with defaults") {
  const auto parsed = ToolkitConfig::from_json_text(
      R"({"reward": {"l_max": 1000, "l_pos_control": 500, "l_neg_control": 200},
          "grpo": {"clip_epsilon": 0.3},
          "service": {"port": 0}})");
  CHECK(parsed.reward.l_max == 1000);
  CHECK(parsed.reward.r_plus_max == 1.0);  // untouched default
  CHECK(parsed.grpo.clip_epsilon == 0.3);
  CHECK(parsed.grpo.group_size == 8);
  CHECK(parsed.service.port == 0);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_WITH_AS(ToolkitConfig::from_json_text(R"({"rewardd": {}})"),
                       doctest::Contains("rewardd"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(ToolkitConfig::from_json_text(R"({"reward": {"l_maxx": 5}})"),
                       doctest::Contains("l_maxx"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(ToolkitConfig::from_json_text(R"({"grpo": {"lr": 1}})"),
                       doctest::Contains("lr"), std::invalid_argument);
  CHECK_THROWS_AS(ToolkitConfig::from_json_text(R"({"service": {"portt": 1}})"),
                  std::invalid_argument);
}

TEST_CASE("type and range errors carry the key path") {
  CHECK_THROWS_WITH_AS(ToolkitConfig::from_json_text(R"({"reward": {"l_max": "big"}})"),
                       doctest::Contains("l_max"), std::invalid_argument);
  CHECK_THROWS_AS(ToolkitConfig::from_json_text(R"({"service": {"port": 70000}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ToolkitConfig::from_json_text(R"({"curation": {"threshold": 2.0}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(ToolkitConfig::from_json_text("not json"), std::invalid_argument);
  CHECK_THROWS_AS(ToolkitConfig::from_json_text("[1, 2]"), std::invalid_argument);
}

TEST_CASE("verifier section is optional but validated") {
  const auto parsed = ToolkitConfig::from_json_text(
      R"({"verifier": {"url": "http://127.0.0.1:9999/judge", "timeout_seconds": 2.5}})");
  REQUIRE(parsed.verifier.has_value());
  CHECK(parsed.verifier->url == "http://127.0.0.1:9999/judge");
  CHECK(parsed.verifier->timeout_seconds == 2.5);
  // Section present but url missing: validation rejects it.
  CHECK_THROWS_AS(ToolkitConfig::from_json_text(R"({"verifier": {"timeout_seconds": 2.5}})"),
                  std::invalid_argument);
}

TEST_CASE("from_file prefixes errors with the path") {
  CHECK_THROWS_WITH_AS(ToolkitConfig::from_file("/nonexistent/config.json"),
                       doctest::Contains("/nonexistent/config.json"), std::invalid_argument);

  const std::string path = "test_config_tmp.json";
  {
    std::ofstream out(path);
    out << R"({"reward": {"l_max": "oops"}})";
  }
  CHECK_THROWS_WITH_AS(ToolkitConfig::from_file(path), doctest::Contains(path.c_str()),
                       std::invalid_argument);
  std::remove(path.c_str());
}

TEST_CASE("toy train options") {
  const auto defaults = toy_train_config_from_json_text("{}");
  CHECK(defaults.steps == 200);
  CHECK(defaults.batch_size == 32);
  CHECK(defaults.momentum == 0.9);
  CHECK(defaults.format_prior == 4.0);
  CHECK(defaults.grpo.learning_rate == 2.0);
  CHECK(defaults.reward.l_max == 48);

  const auto tuned = toy_train_config_from_json_text(
      R"({"steps": 10, "seed": 99, "momentum": 0.5, "format_prior": 0,
          "grpo": {"learning_rate": 0.25}, "reward": {"l_neg_control": 8}})");
  CHECK(tuned.steps == 10);
  CHECK(tuned.seed == 99);
  CHECK(tuned.momentum == 0.5);
  CHECK(tuned.format_prior == 0.0);
  CHECK(tuned.grpo.learning_rate == 0.25);
  CHECK(tuned.reward.l_neg_control == 8);
  CHECK(tuned.batch_size == 32);  // untouched

  CHECK_THROWS_WITH_AS(toy_train_config_from_json_text(R"({"stepss": 10})"),
                       doctest::Contains("stepss"), std::invalid_argument);
  CHECK_THROWS_AS(toy_train_config_from_json_text(R"({"difficulty_mix": [9]})"),
                  std::invalid_argument);

  // Serialization roundtrips through the parser.
  const auto text = toy_train_config_json(tuned);
  const auto reparsed = toy_train_config_from_json_text(text);
  CHECK(toy_train_config_json(reparsed) == text);
}

TEST_CASE("config validation ranges") {
  CurationConfig curation;
  curation.band_lo = 0.8;
  curation.band_hi = 0.2;
  CHECK_THROWS_AS(curation.validate(), std::invalid_argument);

  ServiceConfig service;
  service.port = -1;
  CHECK_THROWS_AS(service.validate(), std::invalid_argument);
  service.port = 0;
  CHECK_NOTHROW(service.validate());
}
