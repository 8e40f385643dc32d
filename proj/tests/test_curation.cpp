#include <stdexcept>
#include <string>
#include <vector>

#include "curation.hpp"
#include "doctest.h"

using namespace rlvr;

TEST_CASE("plurality answer election") {
  std::vector<std::string> answers = {"42", "41", "$42$", "43"};
  auto winner = plurality_answer(answers);
  REQUIRE(winner.has_value());
  CHECK(*winner == "42");  // "$42$" normalizes onto "42"

  // Tie: the answer seen first wins.
  std::vector<std::string> tie = {"7", "9", "9", "7"};
  CHECK(*plurality_answer(tie) == "7");

  CHECK_FALSE(plurality_answer(std::vector<std::string>{}).has_value());
}

TEST_CASE("agreement rate against proxy gold") {
  std::vector<std::string> weak = {"1/2", "0.5", "3", "\\frac{1}{2}"};
  CHECK(agreement_rate(weak, "0.5") == doctest::Approx(0.75));
  CHECK_THROWS_AS(agreement_rate(std::vector<std::string>{}, "0.5"), std::invalid_argument);
}

TEST_CASE("teachability band") {
  CHECK(teachability_filter(0.05).reason == "too_hard");
  CHECK_FALSE(teachability_filter(0.05).keep);
  CHECK(teachability_filter(0.1).reason == "in_band");
  CHECK(teachability_filter(0.1).keep);
  CHECK(teachability_filter(0.7).keep);
  CHECK(teachability_filter(0.71).reason == "too_easy");
  CHECK_THROWS_AS(teachability_filter(0.5, 0.8, 0.2), std::invalid_argument);
}

TEST_CASE("assess_difficulty wires election, agreement, and band") {
  CurationRecord record;
  record.seed_id = "s1";
  record.strong_model_answers = {"10", "10", "12"};
  record.weak_model_answers = {"10", "9", "8", "7"};
  const auto outcome = assess_difficulty(record, 0.1, 0.7);
  CHECK(outcome.seed_id == "s1");
  REQUIRE(outcome.proxy_gold.has_value());
  CHECK(*outcome.proxy_gold == "10");
  REQUIRE(outcome.agreement.has_value());
  CHECK(*outcome.agreement == doctest::Approx(0.25));
  CHECK(outcome.keep);
  CHECK(outcome.reason == "in_band");

  CurationRecord empty;
  empty.seed_id = "s2";
  const auto dropped = assess_difficulty(empty, 0.1, 0.7);
  CHECK_FALSE(dropped.keep);
  CHECK_FALSE(dropped.proxy_gold.has_value());
}

TEST_CASE("tokenize_words") {
  const auto words = tokenize_words("What is 2+2? The ANSWER, obviously.");
  const std::vector<std::string> expected = {"what", "is", "2", "2", "the", "answer",
                                             "obviously"};
  CHECK(words == expected);
  CHECK(tokenize_words("...!!!").empty());
}

TEST_CASE("decontamination index") {
  DecontaminationIndex index(8);
  const std::vector<std::string> bench_a = {
      "compute the sum of the first twelve positive odd integers exactly"};
  const std::vector<std::string> bench_b = {
      "a train leaves the station at nine and travels forty miles per hour north"};
  index.add_benchmark("bench-a", bench_a);
  index.add_benchmark("bench-b", bench_b);

  // Verbatim copy of a benchmark item trips the fractional rule at any
  // reasonable threshold.
  auto flag = index.check(bench_a[0], 0.6);
  REQUIRE(flag.has_value());
  CHECK(flag->benchmark_id == "bench-a");
  CHECK(flag->rule == "fractional_overlap");
  CHECK(flag->overlap == doctest::Approx(1.0));

  // 13 consecutive benchmark words buried in fresh text trip the exact rule
  // even when the fractional overlap stays below threshold.
  const std::string embedded =
      "many unrelated sentences come before this point and now "
      "a train leaves the station at nine and travels forty miles per hour "
      "and then several further clauses keep the fractional overlap low "
      "with extra independent words stretching the prompt out much longer "
      "so only the exact window can catch it";
  auto exact = index.check(embedded, 0.9);
  REQUIRE(exact.has_value());
  CHECK(exact->benchmark_id == "bench-b");
  CHECK(exact->rule == "exact_13gram");

  CHECK_FALSE(index.check("entirely original puzzle about knights and knaves on an island", 0.3)
                  .has_value());

  // Prompts shorter than n words can never match.
  CHECK_FALSE(index.check("too short", 0.5).has_value());

  CHECK_THROWS_AS(DecontaminationIndex(0), std::invalid_argument);
  CHECK_THROWS_AS(index.check("anything at all", 1.5), std::invalid_argument);
  CHECK_THROWS_AS(index.check("anything at all", 0.0), std::invalid_argument);
}

TEST_CASE("decontamination reports the strongest benchmark") {
  DecontaminationIndex index(3);
  const std::vector<std::string> zz = {"alpha beta gamma delta"};
  const std::vector<std::string> aa = {"alpha beta gamma epsilon"};
  index.add_benchmark("zz-partial", zz);
  index.add_benchmark("aa-partial", aa);
  // "alpha beta gamma" appears in both; ties go lexicographic.
  auto flag = index.check("alpha beta gamma", 0.5);
  REQUIRE(flag.has_value());
  CHECK(flag->benchmark_id == "aa-partial");
}

TEST_CASE("loaders reject missing files") {
  CHECK_THROWS_AS(load_curation_records("/nonexistent.jsonl"), std::runtime_error);
  CHECK_THROWS_AS(load_benchmark_prompts("/nonexistent.jsonl"), std::runtime_error);
}
