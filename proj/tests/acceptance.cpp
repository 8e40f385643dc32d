// Acceptance checks for the toolkit, one printed line per criterion. Each
// check states its tolerance inline and fails loudly rather than silently
// relaxing it. Exits with the number of failed criteria.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "eval.hpp"
#include "httplib.h"
#include "json.hpp"
#include "kde.hpp"
#include "reward.hpp"
#include "rlvr/rlvr.h"
#include "toy_trainer.hpp"

namespace {

int g_failures = 0;

class Criterion {
 public:
  Criterion(int index, std::string name)
      : index_(index), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}

  void fail(const std::string& why) {
    if (!why_.empty()) why_ += "; ";
    why_ += why;
  }

  void require(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }

  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  ~Criterion() {
    const double secs = seconds();
    if (why_.empty()) {
      std::printf("PASS  criterion %2d: %s (%.2fs)\n", index_, name_.c_str(), secs);
    } else {
      std::printf("FAIL  criterion %2d: %s (%.2fs): %s\n", index_, name_.c_str(), secs,
                  why_.c_str());
      ++g_failures;
    }
    std::fflush(stdout);
  }

 private:
  int index_;
  std::string name_;
  std::string why_;
  std::chrono::steady_clock::time_point start_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return "";
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Brute-force repetition penalty: plain dictionary of word-vector n-grams.
// Mirrors the specified formula, shares no code with the library version.
double oracle_repetition(const std::vector<std::string>& words, int n, int threshold) {
  const long word_count = static_cast<long>(words.size());
  if (word_count < n) return 0.0;
  std::map<std::vector<std::string>, long> counts;
  const long total = word_count - n + 1;
  for (long i = 0; i < total; ++i) {
    counts[std::vector<std::string>(words.begin() + i, words.begin() + i + n)] += 1;
  }
  long repeated = 0;
  long peak = 0;
  for (const auto& [gram, c] : counts) {
    if (c > threshold) {
      repeated += c;
      if (c > peak) peak = c;
    }
  }
  if (peak == 0) return 0.0;
  const double a = static_cast<double>(repeated) / static_cast<double>(total);
  const double b =
      static_cast<double>(peak) / (static_cast<double>(word_count) / static_cast<double>(n));
  return -std::min(1.0, std::max(a, b));
}

void criterion_1_reward_curve() {
  Criterion c(1, "reward curve anchors within 1e-12 and monotone between them");
  rlvr_config* cfg = nullptr;
  if (rlvr_config_default(&cfg) != RLVR_OK) {
    c.fail("rlvr_config_default failed");
    return;
  }
  char* csv = nullptr;
  if (rlvr_reward_curve(cfg, 1, &csv) != RLVR_OK) {
    c.fail(std::string("rlvr_reward_curve failed: ") + rlvr_last_error());
    rlvr_config_free(cfg);
    return;
  }

  std::vector<double> correct;
  std::vector<double> incorrect;
  correct.reserve(31745);
  incorrect.reserve(31745);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  c.require(line == "length,correct_reward,incorrect_reward", "unexpected CSV header");
  long expected_len = 0;
  while (std::getline(in, line)) {
    long len = 0;
    double cr = 0.0;
    double ir = 0.0;
    if (std::sscanf(line.c_str(), "%ld,%lf,%lf", &len, &cr, &ir) != 3 || len != expected_len) {
      c.fail("row " + std::to_string(expected_len) + " malformed: " + line);
      break;
    }
    correct.push_back(cr);
    incorrect.push_back(ir);
    ++expected_len;
  }
  rlvr_string_free(csv);
  rlvr_config_free(cfg);
  if (correct.size() != 31745) {
    c.fail("expected 31745 rows, got " + std::to_string(correct.size()));
    return;
  }

  const double tol = 1e-12;
  auto anchor = [&](const char* what, double got, double want) {
    if (std::abs(got - want) > tol) {
      std::ostringstream why;
      why.precision(17);
      why << what << " = " << got << ", want " << want << " +/- 1e-12";
      c.fail(why.str());
    }
  };
  anchor("correct@0", correct[0], 1.0);
  anchor("correct@12800", correct[12800], 1.0);
  anchor("correct@25600", correct[25600], 1.0);
  anchor("correct@28672", correct[28672], 0.75);
  anchor("correct@31744", correct[31744], 0.5);
  anchor("incorrect@0", incorrect[0], -1.0);
  anchor("incorrect@3702", incorrect[3702], -0.5);
  anchor("incorrect@31744", incorrect[31744], -0.5);

  for (size_t i = 0; i + 1 < correct.size(); ++i) {
    if (correct[i + 1] > correct[i] + 1e-15) {
      c.fail("correct branch increases at length " + std::to_string(i + 1));
      break;
    }
    if (incorrect[i + 1] < incorrect[i] - 1e-15) {
      c.fail("incorrect branch decreases at length " + std::to_string(i + 1));
      break;
    }
  }
  c.require(c.seconds() < 1.0, "runtime exceeded 1s");
}

void criterion_2_reward_ceiling() {
  Criterion c(2, "maximum attainable final reward equals 8/13 within 1e-12");
  const rlvr::RewardConfig cfg;
  const rlvr::FormatStatus formats[] = {rlvr::FormatStatus::Ok, rlvr::FormatStatus::MissingEos,
                                        rlvr::FormatStatus::InvalidThinkBlock};
  const double rep_extremes[] = {-1.0, 0.0};
  double best = -1e300;
  for (int correct = 0; correct <= 1; ++correct) {
    for (const auto format : formats) {
      for (long len = 0; len <= cfg.l_max; ++len) {
        const double acc = rlvr::apply_format_override(
            format, rlvr::scaled_accuracy_reward(correct != 0, len, cfg), cfg);
        for (const double rep : rep_extremes) {
          best = std::max(best, cfg.w_acc * acc + cfg.w_rep * rep);
        }
      }
    }
  }
  std::ostringstream why;
  why.precision(17);
  why << "sweep maximum " << best << ", want " << 8.0 / 13.0 << " +/- 1e-12";
  c.require(std::abs(best - 8.0 / 13.0) <= 1e-12, why.str());
  c.require(c.seconds() < 1.0, "runtime exceeded 1s");
}

void criterion_3_repetition_oracle() {
  Criterion c(3, "repetition penalty matches a brute-force oracle on 1000 random sequences");
  const rlvr::RewardConfig cfg;
  const std::vector<std::string> alphabet = {"a", "b", "c", "d", "loop", "sum", "mod", "x"};
  std::mt19937_64 rng(424242);
  int mismatches = 0;
  for (int iter = 0; iter < 1000; ++iter) {
    const size_t len = rng() % 201;
    std::vector<std::string> words;
    words.reserve(len);
    // Mix fully random stretches with deliberate repeats so high-frequency
    // n-grams actually occur.
    while (words.size() < len) {
      if (rng() % 4 == 0) {
        const size_t reps = 2 + rng() % 10;
        const std::string& w = alphabet[rng() % 2];
        for (size_t r = 0; r < reps && words.size() < len; ++r) words.push_back(w);
      } else {
        words.push_back(alphabet[rng() % alphabet.size()]);
      }
    }
    const double got = rlvr::repetition_penalty(words, cfg);
    const double want = oracle_repetition(words, cfg.ngram_size, cfg.ngram_freq_threshold);
    if (got != want) {
      ++mismatches;
      if (mismatches == 1) {
        std::ostringstream why;
        why.precision(17);
        why << "first mismatch at iteration " << iter << ": got " << got << ", oracle " << want;
        c.fail(why.str());
      }
    }
  }
  c.require(mismatches == 0, std::to_string(mismatches) + " of 1000 sequences mismatched");
  c.require(c.seconds() < 10.0, "runtime exceeded 10s");
}

void criterion_4_gradient_check() {
  Criterion c(4, "analytic GRPO gradient matches finite differences on 50 instances (1e-5)");
  const rlvr::GradCheckReport report = rlvr::gradient_check(9001, 50, 1e-5);
  std::ostringstream why;
  why.precision(6);
  why << "worst relative error " << report.worst_rel_error << " over "
      << report.coords_checked << " coordinates, tolerance 1e-5";
  c.require(report.pass && report.worst_rel_error <= 1e-5, why.str());
  c.require(report.instances == 50, "expected 50 instances");
  c.require(c.seconds() < 30.0, "runtime exceeded 30s");
}

void criterion_5_toy_training() {
  Criterion c(5, "default toy run gains >= 10pp held-out accuracy with non-negative length-gap slope");
  char* summary = nullptr;
  const rlvr_status st = rlvr_train_toy("{}", nullptr, nullptr, &summary);
  if (st != RLVR_OK) {
    c.fail(std::string("rlvr_train_toy failed: ") + rlvr_last_error());
    return;
  }
  const auto j = nlohmann::json::parse(summary);
  rlvr_string_free(summary);
  const int steps = j["steps_run"].get<int>();
  const double baseline = j["baseline_heldout_accuracy"].get<double>();
  const double best = j["best_heldout_accuracy"].get<double>();
  const double slope = j["length_gap_slope"].get<double>();
  c.require(steps <= 200, "ran " + std::to_string(steps) + " steps, budget is 200");
  c.require(j["aborted"].get<bool>() == false, "training aborted");
  {
    std::ostringstream why;
    why.precision(6);
    why << "held-out gain " << (best - baseline) << " (baseline " << baseline << ", best "
        << best << "), need >= 0.10";
    c.require(best - baseline >= 0.10, why.str());
  }
  {
    std::ostringstream why;
    why.precision(6);
    why << "length-gap slope " << slope << ", need >= 0";
    c.require(slope >= 0.0, why.str());
  }
  c.require(c.seconds() < 300.0, "runtime exceeded 5 minutes");
}

void criterion_6_aggregation_ordering() {
  Criterion c(6, "Worst <= pass@1 <= Best and Worst <= Majority <= Best on 10000 random matrices");
  std::mt19937_64 rng(77);
  int violations = 0;
  for (int iter = 0; iter < 10000; ++iter) {
    const int prompts = 1 + static_cast<int>(rng() % 6);
    const int runs = 1 + static_cast<int>(rng() % 6);
    std::vector<rlvr::GenerationRecord> records;
    records.reserve(static_cast<size_t>(prompts * runs));
    for (int p = 0; p < prompts; ++p) {
      for (int r = 0; r < runs; ++r) {
        rlvr::GenerationRecord g;
        g.benchmark_id = "m";
        g.prompt_id = "p" + std::to_string(p);
        g.run_id = "r" + std::to_string(r);
        g.response_text = "t";
        g.extracted_present = true;
        g.correct = rng() % 2 == 0 ? 1 : 0;
        if (g.correct == 1) {
          g.extracted_answer = "gold";
        } else if (rng() % 4 == 0) {
          g.extracted_answer.reset();  // explicit no-answer vote
        } else {
          g.extracted_answer = rng() % 2 == 0 ? "w1" : "w2";
        }
        g.prompt_tokens = 1;
        g.completion_tokens = 1;
        records.push_back(std::move(g));
      }
    }
    const auto rs = rlvr::RunSet::build(std::move(records));
    const double worst = rlvr::aggregate_of_n(rs, rlvr::AggMode::Worst);
    const double best = rlvr::aggregate_of_n(rs, rlvr::AggMode::Best);
    const double majority = rlvr::aggregate_of_n(rs, rlvr::AggMode::Majority);
    const double p1 = rlvr::pass_at_1(rs).mean;
    const double slack = 1e-12;
    if (!(worst <= p1 + slack && p1 <= best + slack && worst <= majority + slack &&
          majority <= best + slack)) {
      ++violations;
      if (violations == 1) {
        std::ostringstream why;
        why.precision(17);
        why << "iteration " << iter << ": worst " << worst << ", pass@1 " << p1 << ", majority "
            << majority << ", best " << best;
        c.fail(why.str());
      }
    }
  }
  c.require(violations == 0, std::to_string(violations) + " ordering violations");
  c.require(c.seconds() < 10.0, "runtime exceeded 10s");
}

void criterion_7_kde() {
  Criterion c(7, "KDE integrates to 1 +/- 1e-3; fixture shows disjoint vs overlapping supports");
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    const int n = 5 + static_cast<int>(rng() % 46);
    std::vector<double> accs(static_cast<size_t>(n));
    for (double& a : accs) a = unit(rng);
    const double h = rlvr::silverman_bandwidth(accs);
    double lo = accs[0];
    double hi = accs[0];
    for (double a : accs) {
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
    const auto curve = rlvr::kde_curve(accs, h, lo - 8.0 * h, hi + 8.0 * h, 4096);
    const double integral = rlvr::trapezoid_integral(curve.grid, curve.density);
    worst = std::max(worst, std::abs(integral - 1.0));
  }
  {
    std::ostringstream why;
    why.precision(6);
    why << "worst |integral - 1| = " << worst << ", tolerance 1e-3";
    c.require(worst <= 1e-3, why.str());
  }

  // Two-model fixture: separated benchmark shows disjoint supports, mixed
  // benchmark shows heavy overlap. Overlap coefficient = integral of
  // min(density_a, density_b) over [0, 1].
  auto accuracies = [&](const char* file, const char* bench) {
    const auto records = rlvr::load_generation_records(std::string("fixtures/") + file);
    const auto rs = rlvr::RunSet::build(records, bench);
    return rs.per_run_accuracy();
  };
  auto overlap_coefficient = [&](const std::vector<double>& a, const std::vector<double>& b) {
    const auto ka = rlvr::kde_curve(a, rlvr::silverman_bandwidth(a), 0.0, 1.0, 1001);
    const auto kb = rlvr::kde_curve(b, rlvr::silverman_bandwidth(b), 0.0, 1.0, 1001);
    std::vector<double> low(ka.density.size());
    for (size_t i = 0; i < low.size(); ++i) low[i] = std::min(ka.density[i], kb.density[i]);
    return rlvr::trapezoid_integral(ka.grid, low);
  };
  try {
    const auto a_sep = accuracies("kde_model_a.jsonl", "bench-separated");
    const auto b_sep = accuracies("kde_model_b.jsonl", "bench-separated");
    const auto a_mix = accuracies("kde_model_a.jsonl", "bench-mixed");
    const auto b_mix = accuracies("kde_model_b.jsonl", "bench-mixed");
    c.require(a_sep.size() == 50 && b_sep.size() == 50, "fixture must hold 50 runs per model");
    const double sep = overlap_coefficient(a_sep, b_sep);
    const double mix = overlap_coefficient(a_mix, b_mix);
    std::ostringstream why;
    why.precision(6);
    why << "overlap coefficients: separated " << sep << " (want < 0.01), mixed " << mix
        << " (want > 0.3)";
    c.require(sep < 0.01 && mix > 0.3, why.str());
  } catch (const std::exception& e) {
    c.fail(std::string("fixture load failed: ") + e.what());
  }
  c.require(c.seconds() < 10.0, "runtime exceeded 10s");
}

void criterion_8_token_usage() {
  Criterion c(8, "per-prompt-std-then-average token statistic matches hand arithmetic exactly");
  try {
    const auto records = rlvr::load_generation_records("fixtures/tokens_fixture.jsonl");
    const auto rs = rlvr::RunSet::build(records);
    const auto usage = rlvr::token_usage(rs);
    // Prompt p1 has completions {10, 14, 18}, p2 has {4, 8, 12}; both sample
    // standard deviations are exactly 4, and the grand completion mean is 11.
    std::ostringstream why;
    why.precision(17);
    why << "mean_per_prompt_std " << usage.mean_per_prompt_std << " (want exactly 4), "
        << "mean_completion " << usage.mean_completion << " (want exactly 11)";
    c.require(usage.mean_per_prompt_std == 4.0 && usage.mean_completion == 11.0, why.str());
  } catch (const std::exception& e) {
    c.fail(std::string("fixture load failed: ") + e.what());
  }
}

void criterion_9_decontamination() {
  Criterion c(9, "decontamination flags exactly the verbatim and embedded-13-gram plants");
  char* flagged = nullptr;
  const rlvr_status st = rlvr_decontaminate("fixtures/decon_corpus.jsonl",
                                            "fixtures/decon_benchmarks.jsonl", 13, 0.25, &flagged);
  if (st != RLVR_OK) {
    c.fail(std::string("rlvr_decontaminate failed: ") + rlvr_last_error());
    return;
  }
  std::vector<std::string> seeds;
  std::vector<std::string> rules;
  std::istringstream in(flagged);
  rlvr_string_free(flagged);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    seeds.push_back(j["seed_id"].get<std::string>());
    rules.push_back(j["rule"].get<std::string>());
  }
  std::string got;
  for (size_t i = 0; i < seeds.size(); ++i) {
    if (i > 0) got += ", ";
    got += seeds[i] + "(" + rules[i] + ")";
  }
  c.require(seeds.size() == 2, "flagged " + std::to_string(seeds.size()) + " prompts: " + got);
  if (seeds.size() == 2) {
    c.require(seeds[0] == "seed-001" && rules[0] == "fractional_overlap",
              "first flag wrong: " + got);
    c.require(seeds[1] == "seed-002" && rules[1] == "exact_13gram", "second flag wrong: " + got);
  }
  c.require(c.seconds() < 1.0, "runtime exceeded 1s");
}

void criterion_10_service() {
  Criterion c(10, "POST /v1/score returns 8/13 within 1e-12 and 100 concurrent bodies match");
  const std::string request = read_file("fixtures/score_request.json");
  if (request.empty()) {
    c.fail("cannot read fixtures/score_request.json");
    return;
  }
  rlvr_config* cfg = nullptr;
  if (rlvr_config_from_json(R"({"service": {"port": 0}})", &cfg) != RLVR_OK) {
    c.fail("config failed");
    return;
  }
  rlvr_server* server = nullptr;
  if (rlvr_server_start(cfg, &server) != RLVR_OK) {
    c.fail(std::string("server start failed: ") + rlvr_last_error());
    rlvr_config_free(cfg);
    return;
  }
  const int port = rlvr_server_port(server);

  constexpr int kClients = 100;
  std::vector<std::string> bodies(kClients);
  std::atomic<int> ok_count{0};
  std::vector<std::thread> threads;
  threads.reserve(kClients);
  for (int i = 0; i < kClients; ++i) {
    threads.emplace_back([&, i] {
      httplib::Client client("127.0.0.1", port);
      auto res = client.Post("/v1/score", request, "application/json");
      if (res && res->status == 200) {
        bodies[static_cast<size_t>(i)] = res->body;
        ok_count.fetch_add(1);
      }
    });
  }
  for (auto& t : threads) t.join();
  rlvr_server_stop(server);
  rlvr_server_free(server);
  rlvr_config_free(cfg);

  c.require(ok_count.load() == kClients,
            std::to_string(ok_count.load()) + " of 100 requests returned 200");
  int mismatched = 0;
  for (const auto& body : bodies) {
    if (body != bodies[0]) ++mismatched;
  }
  c.require(mismatched == 0, std::to_string(mismatched) + " response bodies differed");
  if (!bodies[0].empty()) {
    const auto j = nlohmann::json::parse(bodies[0]);
    const double final_reward = j["final"].get<double>();
    std::ostringstream why;
    why.precision(17);
    why << "final " << final_reward << ", want " << 8.0 / 13.0 << " +/- 1e-12";
    c.require(std::abs(final_reward - 8.0 / 13.0) <= 1e-12, why.str());
  }
}

}  // namespace

int main() {
  std::printf("acceptance checks (library %s)\n", rlvr_version());
  criterion_1_reward_curve();
  criterion_2_reward_ceiling();
  criterion_3_repetition_oracle();
  criterion_4_gradient_check();
  criterion_5_toy_training();
  criterion_6_aggregation_ordering();
  criterion_7_kde();
  criterion_8_token_usage();
  criterion_9_decontamination();
  criterion_10_service();
  if (g_failures == 0) {
    std::printf("all 10 criteria passed\n");
  } else {
    std::printf("%d criteria FAILED\n", g_failures);
  }
  return g_failures;
}
