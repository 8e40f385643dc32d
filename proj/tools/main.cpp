#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rlvr/rlvr.h"
#include "svg.hpp"

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop = true; }

int status_to_exit(rlvr_status s) {
  if (s == RLVR_OK) return 0;
  return s == RLVR_EINTERNAL ? 2 : 1;
}

int fail(rlvr_status s) {
  std::cerr << "error: " << rlvr_last_error() << "\n";
  return status_to_exit(s);
}

struct ConfigHandle {
  rlvr_config* ptr = nullptr;
  ~ConfigHandle() { rlvr_config_free(ptr); }
};

struct ScorerHandle {
  rlvr_scorer* ptr = nullptr;
  ~ScorerHandle() { rlvr_scorer_free(ptr); }
};

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { rlvr_string_free(s); }
};

rlvr_status load_config(const std::string& path, ConfigHandle& out) {
  return path.empty() ? rlvr_config_default(&out.ptr)
                      : rlvr_config_from_file(path.c_str(), &out.ptr);
}

bool write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write output file: " << path << "\n";
    return false;
  }
  out << content;
  return true;
}

int emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return 0;
  }
  return write_file(path, content) ? 0 : 1;
}

// One score response line per input line; errors carry file:line context.
int score_stream(rlvr_scorer* scorer, std::istream& in, const std::string& name,
                 std::ostream& out) {
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    OwnedString response;
    const rlvr_status s = rlvr_score_json(scorer, line.c_str(), &response.s);
    if (s != RLVR_OK) {
      std::cerr << name << ":" << line_no << ": " << rlvr_last_error() << "\n";
      return status_to_exit(s);
    }
    out << response.s << "\n";
  }
  return 0;
}

int cmd_reward_score(const std::string& config_path, const std::string& input,
                     const std::string& output) {
  ConfigHandle config;
  if (rlvr_status s = load_config(config_path, config); s != RLVR_OK) return fail(s);
  ScorerHandle scorer;
  if (rlvr_status s = rlvr_scorer_new(config.ptr, &scorer.ptr); s != RLVR_OK) return fail(s);

  std::ostringstream buffer;
  int rc = 0;
  if (input.empty()) {
    rc = score_stream(scorer.ptr, std::cin, "stdin", buffer);
  } else {
    std::ifstream in(input);
    if (!in) {
      std::cerr << "error: cannot open input file: " << input << "\n";
      return 1;
    }
    rc = score_stream(scorer.ptr, in, input, buffer);
  }
  if (rc != 0) return rc;
  return emit(output, buffer.str());
}

int cmd_reward_curve(const std::string& config_path, long step, const std::string& output,
                     const std::string& svg_path) {
  ConfigHandle config;
  if (rlvr_status s = load_config(config_path, config); s != RLVR_OK) return fail(s);
  OwnedString csv;
  if (rlvr_status s = rlvr_reward_curve(config.ptr, step, &csv.s); s != RLVR_OK) return fail(s);
  if (int rc = emit(output, csv.s); rc != 0) return rc;

  if (!svg_path.empty()) {
    svg::Series correct{"correct", "#2c7fb8", {}, {}};
    svg::Series incorrect{"incorrect", "#d95f0e", {}, {}};
    std::istringstream in(csv.s);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      double len = 0, rc_val = 0, ri_val = 0;
      if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &len, &rc_val, &ri_val) == 3) {
        correct.xs.push_back(len);
        correct.ys.push_back(rc_val);
        incorrect.xs.push_back(len);
        incorrect.ys.push_back(ri_val);
      }
    }
    if (!write_file(svg_path, svg::line_chart("accuracy reward vs length",
                                              {correct, incorrect}))) {
      return 1;
    }
  }
  return 0;
}

int cmd_grpo_check(unsigned long long seed, int instances, double tolerance,
                   const std::string& output) {
  OwnedString report;
  if (rlvr_status s = rlvr_grpo_gradient_check(seed, instances, tolerance, &report.s);
      s != RLVR_OK) {
    return fail(s);
  }
  if (int rc = emit(output, std::string(report.s) + "\n"); rc != 0) return rc;
  const auto j = nlohmann::json::parse(report.s);
  if (!j.at("pass").get<bool>()) {
    std::cerr << "error: gradient check failed (worst_rel_error="
              << j.at("worst_rel_error").get<double>() << ")\n";
    return 2;
  }
  return 0;
}

int cmd_train_toy(const std::string& options_path, bool steps_set, int steps, bool seed_set,
                  unsigned long long seed, const std::string& metrics_path,
                  const std::string& checkpoint_path, const std::string& summary_path) {
  nlohmann::json options = nlohmann::json::object();
  if (!options_path.empty()) {
    std::ifstream in(options_path);
    if (!in) {
      std::cerr << "error: cannot open config file: " << options_path << "\n";
      return 1;
    }
    options = nlohmann::json::parse(in, nullptr, false);
    if (options.is_discarded()) {
      std::cerr << "error: " << options_path << ": invalid JSON\n";
      return 1;
    }
  }
  if (steps_set) options["steps"] = steps;
  if (seed_set) options["seed"] = seed;

  OwnedString summary;
  const rlvr_status s = rlvr_train_toy(options.dump().c_str(),
                                       metrics_path.empty() ? nullptr : metrics_path.c_str(),
                                       checkpoint_path.empty() ? nullptr : checkpoint_path.c_str(),
                                       &summary.s);
  if (s != RLVR_OK) return fail(s);
  if (!summary_path.empty() && !write_file(summary_path, std::string(summary.s) + "\n")) {
    return 1;
  }
  std::cout << summary.s << "\n";
  return 0;
}

int cmd_eval_report(const std::string& input, const std::string& benchmark, int runs,
                    double bandwidth, const std::string& output,
                    const std::string& difficulty_csv, const std::string& topic_csv,
                    const std::string& svg_path) {
  OwnedString report;
  OwnedString diff_csv;
  OwnedString top_csv;
  const rlvr_status s = rlvr_eval_report(
      input.c_str(), benchmark.empty() ? nullptr : benchmark.c_str(), runs, bandwidth,
      &report.s, difficulty_csv.empty() ? nullptr : &diff_csv.s,
      topic_csv.empty() ? nullptr : &top_csv.s);
  if (s != RLVR_OK) return fail(s);

  if (int rc = emit(output, std::string(report.s) + "\n"); rc != 0) return rc;
  if (!difficulty_csv.empty() && !write_file(difficulty_csv, diff_csv.s)) return 1;
  if (!topic_csv.empty() && !write_file(topic_csv, top_csv.s)) return 1;

  if (!svg_path.empty()) {
    const auto j = nlohmann::json::parse(report.s);
    if (!j.contains("kde")) {
      std::cerr << "error: report has no KDE curve (need >= 2 runs or --bandwidth)\n";
      return 1;
    }
    svg::Series density{"density", "#2c7fb8", j["kde"]["grid"].get<std::vector<double>>(),
                        j["kde"]["density"].get<std::vector<double>>()};
    if (!write_file(svg_path, svg::line_chart("pass@1 accuracy KDE", {density}))) return 1;
  }
  return 0;
}

int cmd_curate_decontaminate(const std::string& config_path, const std::string& input,
                             const std::string& benchmarks, bool ngram_set, int ngram,
                             bool threshold_set, double threshold, const std::string& output) {
  ConfigHandle config;
  if (rlvr_status s = load_config(config_path, config); s != RLVR_OK) return fail(s);
  OwnedString cfg_json;
  if (rlvr_status s = rlvr_config_to_json(config.ptr, &cfg_json.s); s != RLVR_OK) return fail(s);
  const auto cfg = nlohmann::json::parse(cfg_json.s);
  if (!ngram_set) ngram = cfg["curation"]["ngram"].get<int>();
  if (!threshold_set) threshold = cfg["curation"]["threshold"].get<double>();

  OwnedString flagged;
  const rlvr_status s =
      rlvr_decontaminate(input.c_str(), benchmarks.c_str(), ngram, threshold, &flagged.s);
  if (s != RLVR_OK) return fail(s);
  const std::string body(flagged.s);
  const size_t count = static_cast<size_t>(std::count(body.begin(), body.end(), '\n'));
  std::cerr << "flagged " << count << " prompt(s)\n";
  return emit(output, body);
}

int cmd_curate_difficulty(const std::string& config_path, const std::string& input,
                          const std::string& band, const std::string& output) {
  ConfigHandle config;
  if (rlvr_status s = load_config(config_path, config); s != RLVR_OK) return fail(s);
  OwnedString cfg_json;
  if (rlvr_status s = rlvr_config_to_json(config.ptr, &cfg_json.s); s != RLVR_OK) return fail(s);
  const auto cfg = nlohmann::json::parse(cfg_json.s);
  double lo = cfg["curation"]["band_lo"].get<double>();
  double hi = cfg["curation"]["band_hi"].get<double>();
  if (!band.empty()) {
    char sep = 0;
    std::istringstream in(band);
    if (!(in >> lo >> sep >> hi) || (sep != ':' && sep != ',')) {
      std::cerr << "error: --band expects LO:HI (e.g. 0.1:0.7)\n";
      return 1;
    }
  }
  OwnedString out_jsonl;
  const rlvr_status s = rlvr_curate_difficulty(input.c_str(), lo, hi, &out_jsonl.s);
  if (s != RLVR_OK) return fail(s);
  return emit(output, out_jsonl.s);
}

int cmd_serve(const std::string& config_path, const std::string& host, int port) {
  ConfigHandle config;
  rlvr_status s;
  if (!host.empty() || port >= 0) {
    // Rebuild the config with the overridden service section.
    ConfigHandle base;
    if (s = load_config(config_path, base); s != RLVR_OK) return fail(s);
    OwnedString text;
    if (s = rlvr_config_to_json(base.ptr, &text.s); s != RLVR_OK) return fail(s);
    auto j = nlohmann::json::parse(text.s);
    if (!host.empty()) j["service"]["host"] = host;
    if (port >= 0) j["service"]["port"] = port;
    if (s = rlvr_config_from_json(j.dump().c_str(), &config.ptr); s != RLVR_OK) return fail(s);
  } else {
    if (s = load_config(config_path, config); s != RLVR_OK) return fail(s);
  }

  rlvr_server* server = nullptr;
  if (s = rlvr_server_start(config.ptr, &server); s != RLVR_OK) return fail(s);
  std::cout << "listening on port " << rlvr_server_port(server) << std::endl;

  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_stop) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  rlvr_server_stop(server);
  rlvr_server_free(server);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RLVR toolkit: rule-based rewards, GRPO, eval statistics, data curation"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "toolkit config JSON (defaults used when absent)");

  // reward
  auto* reward = app.add_subcommand("reward", "reward scoring and curves");
  reward->require_subcommand(1);
  std::string in_path, out_path, svg_path;
  auto* score = reward->add_subcommand("score", "score JSONL requests (file or stdin)");
  score->add_option("--input", in_path, "request JSONL (stdin when absent)");
  score->add_option("--output", out_path, "response JSONL (stdout when absent)");
  long curve_step = 1;
  auto* curve = reward->add_subcommand("curve", "reward-vs-length curve CSV");
  curve->add_option("--output", out_path, "CSV path (stdout when absent)");
  curve->add_option("--step", curve_step, "length stride")->check(CLI::PositiveNumber);
  curve->add_option("--svg", svg_path, "also draw an SVG chart");

  // grpo
  auto* grpo = app.add_subcommand("grpo", "GRPO objective utilities");
  grpo->require_subcommand(1);
  unsigned long long seed = 7;
  int instances = 50;
  double tolerance = 1e-5;
  auto* check = grpo->add_subcommand("check", "gradient self-test vs finite differences");
  check->add_option("--seed", seed, "instance seed");
  check->add_option("--instances", instances, "number of random instances")
      ->check(CLI::PositiveNumber);
  check->add_option("--tolerance", tolerance, "relative error bound")
      ->check(CLI::PositiveNumber);
  check->add_option("--output", out_path, "report JSON path (stdout when absent)");

  // train
  auto* train = app.add_subcommand("train", "toy GRPO training");
  train->require_subcommand(1);
  int steps = 0;
  std::string toy_options_path, ckpt_path, summary_path;
  auto* toy = train->add_subcommand("toy", "run the desk-scale trainer");
  toy->add_option("--options", toy_options_path, "trainer options JSON (defaults when absent)");
  auto* steps_opt = toy->add_option("--steps", steps, "training steps");
  auto* seed_opt = toy->add_option("--seed", seed, "run seed");
  toy->add_option("--output", out_path, "metrics JSONL path");
  toy->add_option("--checkpoint", ckpt_path, "best checkpoint JSON path");
  toy->add_option("--summary", summary_path, "also write the summary JSON here");

  // eval
  auto* eval = app.add_subcommand("eval", "multi-run evaluation statistics");
  eval->require_subcommand(1);
  std::string benchmark, difficulty_csv, topic_csv;
  int runs = 0;
  double bandwidth = 0.0;
  auto* report = eval->add_subcommand("report", "aggregate a GenerationRecord JSONL");
  report->add_option("--input", in_path, "records JSONL")->required();
  report->add_option("--benchmark", benchmark, "benchmark_id to select");
  report->add_option("--runs", runs, "keep only the first N runs (sorted by run_id)");
  report->add_option("--bandwidth", bandwidth, "KDE bandwidth (Silverman when absent)");
  report->add_option("--output", out_path, "report JSON path (stdout when absent)");
  report->add_option("--difficulty-csv", difficulty_csv, "per-difficulty CSV path");
  report->add_option("--topic-csv", topic_csv, "per-topic CSV path");
  report->add_option("--svg", svg_path, "KDE chart path");

  // curate
  auto* curate = app.add_subcommand("curate", "seed curation filters");
  curate->require_subcommand(1);
  std::string benchmarks_path, band;
  int ngram = 13;
  double threshold = 0.25;
  auto* decon = curate->add_subcommand("decontaminate", "flag benchmark-overlapping prompts");
  decon->add_option("--input", in_path, "corpus JSONL (seed_id, prompt)")->required();
  decon->add_option("--benchmarks", benchmarks_path, "benchmark JSONL (benchmark_id, prompt)")
      ->required();
  auto* ngram_opt = decon->add_option("--ngram", ngram, "n-gram size (config when absent)");
  auto* thresh_opt =
      decon->add_option("--threshold", threshold, "overlap threshold (config when absent)");
  decon->add_option("--output", out_path, "flagged JSONL path (stdout when absent)");
  auto* difficulty = curate->add_subcommand("difficulty", "proxy gold + teachability filter");
  difficulty->add_option("--input", in_path, "curation records JSONL")->required();
  difficulty->add_option("--band", band, "teachability band LO:HI (config when absent)");
  difficulty->add_option("--output", out_path, "outcomes JSONL path (stdout when absent)");

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP scoring service");
  std::string host;
  int port = -1;
  serve->add_option("--host", host, "bind host (config when absent)");
  serve->add_option("--port", port, "bind port, 0 for ephemeral (config when absent)");

  CLI11_PARSE(app, argc, argv);

  if (score->parsed()) return cmd_reward_score(config_path, in_path, out_path);
  if (curve->parsed()) return cmd_reward_curve(config_path, curve_step, out_path, svg_path);
  if (check->parsed()) return cmd_grpo_check(seed, instances, tolerance, out_path);
  if (toy->parsed()) {
    return cmd_train_toy(toy_options_path, !steps_opt->empty(), steps, !seed_opt->empty(), seed,
                         out_path, ckpt_path, summary_path);
  }
  if (report->parsed()) {
    return cmd_eval_report(in_path, benchmark, runs, bandwidth, out_path, difficulty_csv,
                           topic_csv, svg_path);
  }
  if (decon->parsed()) {
    return cmd_curate_decontaminate(config_path, in_path, benchmarks_path,
                                    !ngram_opt->empty(), ngram, !thresh_opt->empty(), threshold,
                                    out_path);
  }
  if (difficulty->parsed()) {
    return cmd_curate_difficulty(config_path, in_path, band, out_path);
  }
  if (serve->parsed()) return cmd_serve(config_path, host, port);
  return 1;
}
