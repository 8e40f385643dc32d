#include "rlvr/rlvr.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>

#include "config.hpp"
#include "curation.hpp"
#include "eval.hpp"
#include "json.hpp"
#include "scorer.hpp"
#include "service.hpp"
#include "toy_trainer.hpp"

struct rlvr_config {
  rlvr::ToolkitConfig cfg;
};

struct rlvr_scorer {
  rlvr::Scorer scorer;
};

struct rlvr_server {
  std::unique_ptr<rlvr::ScoreService> service;
};

namespace {

thread_local std::string g_last_error;

char* alloc_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

bool looks_like_io_error(const std::string& msg) {
  return msg.rfind("cannot open", 0) == 0 || msg.rfind("cannot read", 0) == 0 ||
         msg.rfind("cannot write", 0) == 0;
}

template <typename Fn>
rlvr_status wrap(Fn&& fn) noexcept {
  try {
    fn();
    g_last_error.clear();
    return RLVR_OK;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return RLVR_EINVAL;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RLVR_EINTERNAL;
  } catch (const std::runtime_error& e) {
    g_last_error = e.what();
    return looks_like_io_error(g_last_error) ? RLVR_EIO : RLVR_EPARSE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RLVR_EINTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return RLVR_EINTERNAL;
  }
}

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

std::shared_ptr<rlvr::ExternalVerifier> make_external(const rlvr::ToolkitConfig& cfg) {
  if (!cfg.verifier) return nullptr;
  return std::make_shared<rlvr::HttpVerifier>(*cfg.verifier);
}

// Least-squares slope of (mean incorrect length - mean correct length) over
// steps where both populations are non-empty.
double length_gap_slope(const std::vector<rlvr::StepMetrics>& metrics) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& m : metrics) {
    if (m.n_correct > 0 && m.n_incorrect > 0) {
      xs.push_back(static_cast<double>(m.step));
      ys.push_back(m.mean_len_incorrect - m.mean_len_correct);
    }
  }
  if (xs.size() < 2) return 0.0;
  const double n = static_cast<double>(xs.size());
  double sx = 0.0;
  double sy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

extern "C" {

const char* rlvr_version(void) { return "0.1.0"; }

const char* rlvr_last_error(void) { return g_last_error.c_str(); }

void rlvr_string_free(char* s) { std::free(s); }

rlvr_status rlvr_config_default(rlvr_config** out) {
  return wrap([&] {
    require(out != nullptr, "out must not be NULL");
    *out = new rlvr_config{};
  });
}

rlvr_status rlvr_config_from_json(const char* json_text, rlvr_config** out) {
  return wrap([&] {
    require(json_text != nullptr && out != nullptr, "json_text and out must not be NULL");
    *out = new rlvr_config{rlvr::ToolkitConfig::from_json_text(json_text)};
  });
}

rlvr_status rlvr_config_from_file(const char* path, rlvr_config** out) {
  return wrap([&] {
    require(path != nullptr && out != nullptr, "path and out must not be NULL");
    *out = new rlvr_config{rlvr::ToolkitConfig::from_file(path)};
  });
}

rlvr_status rlvr_config_to_json(const rlvr_config* config, char** out_json) {
  return wrap([&] {
    require(config != nullptr && out_json != nullptr, "config and out_json must not be NULL");
    *out_json = alloc_string(config->cfg.to_json_text());
  });
}

void rlvr_config_free(rlvr_config* config) { delete config; }

rlvr_status rlvr_scaled_accuracy_reward(const rlvr_config* config, int correct, long length,
                                        double* out) {
  return wrap([&] {
    require(config != nullptr && out != nullptr, "config and out must not be NULL");
    *out = rlvr::scaled_accuracy_reward(correct != 0, length, config->cfg.reward);
  });
}

rlvr_status rlvr_repetition_penalty(const rlvr_config* config, const char* text, double* out) {
  return wrap([&] {
    require(config != nullptr && text != nullptr && out != nullptr,
            "config, text and out must not be NULL");
    const auto words = rlvr::split_words(text);
    *out = rlvr::repetition_penalty(words, config->cfg.reward);
  });
}

rlvr_status rlvr_check_format(const char* text, int eos_present, rlvr_format_status* out) {
  return wrap([&] {
    require(text != nullptr && out != nullptr, "text and out must not be NULL");
    switch (rlvr::check_format(text, eos_present != 0)) {
      case rlvr::FormatStatus::Ok:
        *out = RLVR_FORMAT_OK;
        break;
      case rlvr::FormatStatus::MissingEos:
        *out = RLVR_FORMAT_MISSING_EOS;
        break;
      case rlvr::FormatStatus::InvalidThinkBlock:
        *out = RLVR_FORMAT_INVALID_THINK_BLOCK;
        break;
    }
  });
}

rlvr_status rlvr_normalize_answer(const char* raw, char** out) {
  return wrap([&] {
    require(raw != nullptr && out != nullptr, "raw and out must not be NULL");
    *out = alloc_string(rlvr::normalize_answer(raw));
  });
}

rlvr_status rlvr_reward_curve(const rlvr_config* config, long step, char** out_csv) {
  return wrap([&] {
    require(config != nullptr && out_csv != nullptr, "config and out_csv must not be NULL");
    require(step >= 1, "step must be >= 1");
    const rlvr::RewardConfig& rc = config->cfg.reward;
    rc.validate();
    std::ostringstream csv;
    csv.precision(17);
    csv << "length,correct_reward,incorrect_reward\n";
    for (long len = 0; len <= rc.l_max; len += step) {
      csv << len << ',' << rlvr::scaled_accuracy_reward(true, len, rc) << ','
          << rlvr::scaled_accuracy_reward(false, len, rc) << '\n';
    }
    *out_csv = alloc_string(csv.str());
  });
}

rlvr_status rlvr_scorer_new(const rlvr_config* config, rlvr_scorer** out) {
  return wrap([&] {
    require(config != nullptr && out != nullptr, "config and out must not be NULL");
    *out = new rlvr_scorer{rlvr::Scorer(config->cfg.reward, make_external(config->cfg))};
  });
}

rlvr_status rlvr_score_json(const rlvr_scorer* scorer, const char* request_json,
                            char** out_response_json) {
  return wrap([&] {
    require(scorer != nullptr && request_json != nullptr && out_response_json != nullptr,
            "scorer, request_json and out_response_json must not be NULL");
    const rlvr::ScoreRequest req = rlvr::parse_score_request(request_json);
    *out_response_json = alloc_string(rlvr::score_response_json(scorer->scorer.score(req)));
  });
}

void rlvr_scorer_free(rlvr_scorer* scorer) { delete scorer; }

rlvr_status rlvr_group_advantages(const double* rewards, int n, double* out) {
  return wrap([&] {
    require(rewards != nullptr && out != nullptr, "rewards and out must not be NULL");
    require(n >= 2, "n must be >= 2");
    const auto adv = rlvr::group_advantages(std::span<const double>(rewards, static_cast<size_t>(n)), n);
    std::memcpy(out, adv.values.data(), sizeof(double) * adv.values.size());
  });
}

rlvr_status rlvr_grpo_gradient_check(unsigned long long seed, int instances, double tolerance,
                                     char** out_report_json) {
  return wrap([&] {
    require(out_report_json != nullptr, "out_report_json must not be NULL");
    const rlvr::GradCheckReport rep = rlvr::gradient_check(seed, instances, tolerance);
    nlohmann::ordered_json j{{"instances", rep.instances},
                             {"coords_checked", rep.coords_checked},
                             {"worst_rel_error", rep.worst_rel_error},
                             {"tolerance", rep.tolerance},
                             {"pass", rep.pass}};
    *out_report_json = alloc_string(j.dump());
  });
}

rlvr_status rlvr_train_toy(const char* options_json, const char* metrics_jsonl_path,
                           const char* checkpoint_path, char** out_summary_json) {
  return wrap([&] {
    require(out_summary_json != nullptr, "out_summary_json must not be NULL");
    const rlvr::ToyTrainConfig cfg =
        rlvr::toy_train_config_from_json_text(options_json != nullptr ? options_json : "{}");
    const rlvr::ToyTrainer trainer(cfg);

    const double baseline = trainer.heldout_accuracy(trainer.init_state().policy);

    std::ofstream metrics_out;
    if (metrics_jsonl_path != nullptr) {
      metrics_out.open(metrics_jsonl_path);
      if (!metrics_out) {
        throw std::runtime_error(std::string("cannot write metrics file: ") +
                                 metrics_jsonl_path);
      }
    }
    const rlvr::TrainState state = trainer.train([&](const rlvr::StepMetrics& m) {
      if (metrics_out.is_open()) metrics_out << rlvr::step_metrics_json(m) << '\n';
    });

    if (checkpoint_path != nullptr) {
      rlvr::save_checkpoint(checkpoint_path, cfg, state);
    }

    nlohmann::ordered_json j{
        {"steps_run", state.step},
        {"baseline_heldout_accuracy", baseline},
        {"best_step", state.best_step},
        {"best_heldout_accuracy", state.best_heldout},
        {"final_heldout_accuracy",
         state.metrics.empty() ? baseline : state.metrics.back().heldout_accuracy},
        {"final_mean_reward", state.metrics.empty() ? 0.0 : state.metrics.back().mean_reward},
        {"length_gap_slope", length_gap_slope(state.metrics)},
        {"aborted", !state.last_error.empty()},
        {"config_hash", rlvr::config_fingerprint(cfg)},
    };
    if (!state.last_error.empty()) j["error"] = state.last_error;
    *out_summary_json = alloc_string(j.dump());
  });
}

rlvr_status rlvr_eval_report(const char* records_jsonl_path, const char* benchmark_id,
                             int runs_limit, double bandwidth, char** out_report_json,
                             char** out_difficulty_csv, char** out_topic_csv) {
  return wrap([&] {
    require(records_jsonl_path != nullptr, "records_jsonl_path must not be NULL");
    require(runs_limit >= 0, "runs_limit must be >= 0");
    auto records = rlvr::load_generation_records(records_jsonl_path);
    if (runs_limit > 0) {
      std::set<std::string> run_ids;
      for (const auto& r : records) run_ids.insert(r.run_id);
      std::set<std::string> kept;
      for (const auto& id : run_ids) {
        if (static_cast<int>(kept.size()) >= runs_limit) break;
        kept.insert(id);
      }
      std::vector<rlvr::GenerationRecord> filtered;
      for (auto& r : records) {
        if (kept.count(r.run_id)) filtered.push_back(std::move(r));
      }
      records = std::move(filtered);
    }
    const rlvr::RunSet runs = rlvr::RunSet::build(
        std::move(records), benchmark_id != nullptr ? benchmark_id : "");
    rlvr::EvalReportOptions options;
    if (bandwidth > 0.0) options.bandwidth = bandwidth;
    if (out_report_json != nullptr) {
      *out_report_json = alloc_string(rlvr::eval_report_json(runs, options));
    }
    if (out_difficulty_csv != nullptr) {
      *out_difficulty_csv =
          alloc_string(rlvr::disaggregation_csv(runs, rlvr::GroupKey::Difficulty));
    }
    if (out_topic_csv != nullptr) {
      *out_topic_csv = alloc_string(rlvr::disaggregation_csv(runs, rlvr::GroupKey::Topic));
    }
  });
}

rlvr_status rlvr_decontaminate(const char* corpus_jsonl_path, const char* benchmarks_jsonl_path,
                               int ngram, double threshold, char** out_flagged_jsonl) {
  return wrap([&] {
    require(corpus_jsonl_path != nullptr && benchmarks_jsonl_path != nullptr &&
                out_flagged_jsonl != nullptr,
            "corpus, benchmarks and out must not be NULL");
    rlvr::DecontaminationIndex index(ngram);
    for (const auto& bench : rlvr::load_benchmark_prompts(benchmarks_jsonl_path)) {
      index.add_benchmark(bench.benchmark_id, bench.prompts);
    }
    const auto corpus = rlvr::load_curation_records(corpus_jsonl_path);
    std::ostringstream out;
    for (const auto& rec : corpus) {
      const auto flag = index.check(rec.prompt, threshold);
      if (!flag) continue;
      nlohmann::ordered_json j{{"seed_id", rec.seed_id},
                               {"benchmark_id", flag->benchmark_id},
                               {"overlap", flag->overlap},
                               {"rule", flag->rule}};
      out << j.dump() << '\n';
    }
    *out_flagged_jsonl = alloc_string(out.str());
  });
}

rlvr_status rlvr_curate_difficulty(const char* records_jsonl_path, double band_lo,
                                   double band_hi, char** out_jsonl) {
  return wrap([&] {
    require(records_jsonl_path != nullptr && out_jsonl != nullptr,
            "records path and out must not be NULL");
    const auto records = rlvr::load_curation_records(records_jsonl_path);
    std::ostringstream out;
    for (const auto& rec : records) {
      const rlvr::DifficultyOutcome o = rlvr::assess_difficulty(rec, band_lo, band_hi);
      nlohmann::ordered_json j{
          {"seed_id", o.seed_id},
          {"proxy_gold",
           o.proxy_gold ? nlohmann::ordered_json(*o.proxy_gold) : nlohmann::ordered_json(nullptr)},
          {"agreement_rate",
           o.agreement ? nlohmann::ordered_json(*o.agreement) : nlohmann::ordered_json(nullptr)},
          {"keep", o.keep},
          {"reason", o.reason}};
      out << j.dump() << '\n';
    }
    *out_jsonl = alloc_string(out.str());
  });
}

rlvr_status rlvr_server_start(const rlvr_config* config, rlvr_server** out) {
  return wrap([&] {
    require(config != nullptr && out != nullptr, "config and out must not be NULL");
    auto server = std::make_unique<rlvr_server>();
    server->service = std::make_unique<rlvr::ScoreService>(
        rlvr::Scorer(config->cfg.reward, make_external(config->cfg)), config->cfg.service);
    if (!server->service->start()) {
      throw std::runtime_error("cannot open listening socket (host/port unavailable)");
    }
    *out = server.release();
  });
}

int rlvr_server_port(const rlvr_server* server) {
  return server != nullptr && server->service ? server->service->port() : -1;
}

rlvr_status rlvr_server_stop(rlvr_server* server) {
  return wrap([&] {
    require(server != nullptr, "server must not be NULL");
    server->service->stop();
  });
}

void rlvr_server_free(rlvr_server* server) { delete server; }

}  // extern "C"
