#include "toy_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "answer.hpp"
#include "json.hpp"

namespace rlvr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double warmup_ramp(int step_one_based, int warmup_steps) {
  if (warmup_steps <= 0 || step_one_based >= warmup_steps) return 1.0;
  const double s = static_cast<double>(step_one_based) / warmup_steps;
  return 0.5 * (1.0 - std::cos(s * 3.14159265358979323846));
}

double nearest_rank_percentile(std::vector<double> values, double pct) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t rank = static_cast<size_t>(
      std::ceil(pct / 100.0 * static_cast<double>(values.size())));
  return values[std::max<size_t>(rank, 1) - 1];
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

struct PreparedGroup {
  std::vector<int> prompt_tokens;
  TrajectoryGroup traj;
  AdvantageSet adv;
};

void rescore_group(const ToyPolicy& policy, PreparedGroup& g) {
  for (size_t i = 0; i < g.traj.outputs.size(); ++i) {
    policy.score(g.prompt_tokens, g.traj.outputs[i], g.traj.new_logprobs[i],
                 g.traj.new_entropies[i]);
  }
}

// Mean GRPO objective over the batch; optionally accumulates its gradient
// with respect to the policy parameters (through new_logprobs/new_entropies
// of the fixed sampled outputs).
double objective_and_gradient(const ToyPolicy& policy, std::vector<PreparedGroup>& groups,
                              const GrpoConfig& grpo, std::vector<double>* grad) {
  const double batch = static_cast<double>(groups.size());
  double total = 0.0;
  std::vector<double> dlogprob;
  std::vector<double> dentropy;
  for (auto& g : groups) {
    double group_sum = 0.0;
    const double denom_g = static_cast<double>(g.traj.outputs.size());
    for (size_t i = 0; i < g.traj.outputs.size(); ++i) {
      const size_t len = g.traj.outputs[i].size();
      const double w = 1.0 / (batch * denom_g * static_cast<double>(len));
      const double adv = g.adv.values[i];
      dlogprob.assign(len, 0.0);
      dentropy.assign(len, 0.0);
      double token_sum = 0.0;
      for (size_t t = 0; t < len; ++t) {
        const double old_lp = g.traj.old_logprobs[i][t];
        const double new_lp = g.traj.new_logprobs[i][t];
        const double ratio = std::exp(new_lp - old_lp);
        const double unclipped = ratio * adv;
        const double clipped =
            std::clamp(ratio, 1.0 - grpo.clip_epsilon, 1.0 + grpo.clip_epsilon) * adv;
        const double surrogate = std::min(unclipped, clipped);
        const double kl = kl_estimate(new_lp, old_lp);
        const double entropy = g.traj.new_entropies[i][t];
        token_sum += surrogate - grpo.kl_coeff * kl + grpo.entropy_coeff * entropy;
        if (grad != nullptr) {
          const double dsurr = unclipped <= clipped ? unclipped : 0.0;
          const double dkl = 1.0 - std::exp(old_lp - new_lp);
          dlogprob[t] = w * (dsurr - grpo.kl_coeff * dkl);
          dentropy[t] = w * grpo.entropy_coeff;
        }
      }
      group_sum += token_sum / static_cast<double>(len);
      if (grad != nullptr) {
        policy.accumulate_gradient(g.prompt_tokens, g.traj.outputs[i], dlogprob, dentropy,
                                   *grad);
      }
    }
    total += group_sum / denom_g;
  }
  return total / batch;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

nlohmann::ordered_json config_json(const ToyTrainConfig& c) {
  return nlohmann::ordered_json{
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
      {"difficulty_mix", c.task.difficulty_mix},
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
  };
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return h;
}

void apply_format_prior(ToyPolicy& policy, const ToyVocab& vocab, double strength) {
  if (strength <= 0.0) return;
  auto& theta = policy.params();
  const int bos = vocab.bos();
  const double s = strength;

  theta[policy.context_index(0, bos, vocab.think_open)] += 2.0 * s;
  for (int f : vocab.fillers()) {
    theta[policy.context_index(0, vocab.think_open, f)] += s;
    // Filler-to-filler continuation sits below the close weight, so think
    // blocks stay short unless the reward teaches otherwise.
    for (int g : vocab.fillers()) theta[policy.context_index(0, f, g)] += 0.75 * s;
    theta[policy.context_index(0, f, vocab.think_close)] += s;
  }
  theta[policy.context_index(0, vocab.think_close, vocab.boxed_open)] += 2.0 * s;
  for (int d = 0; d < 10; ++d) {
    theta[policy.context_index(0, vocab.boxed_open, vocab.digit0 + d)] += s;
  }
  if (policy.context_window() >= 2) {
    theta[policy.context_index(1, vocab.boxed_open, vocab.brace_close)] += 2.0 * s;
  } else {
    for (int d = 0; d < 10; ++d) {
      theta[policy.context_index(0, vocab.digit0 + d, vocab.brace_close)] += 2.0 * s;
    }
  }
  theta[policy.context_index(0, vocab.brace_close, vocab.eos)] += 2.0 * s;
}

ToyTrainConfig ToyTrainConfig::toy_default() {
  ToyTrainConfig c;
  c.grpo.learning_rate = 2.0;
  c.grpo.max_generation_tokens = 48;
  c.reward.l_max = 48;
  c.reward.l_pos_control = 24;
  // Wide incorrect-length band: gives wrong answers room to grow longer than
  // correct ones inside the 48-token budget, the dynamic the run should show.
  c.reward.l_neg_control = 40;
  c.steps = 200;
  c.batch_size = 32;
  c.momentum = 0.9;
  return c;
}

void ToyTrainConfig::validate() const {
  grpo.validate();
  reward.validate();
  task.validate();
  if (steps < 1) throw std::invalid_argument("toy.steps must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("toy.batch_size must be >= 1");
  if (max_tokens < 1) throw std::invalid_argument("toy.max_tokens must be >= 1");
  if (context_window < 1 || context_window > 32) {
    throw std::invalid_argument("toy.context_window must be in 1..32");
  }
  if (!(temperature > 0.0)) throw std::invalid_argument("toy.temperature must be > 0");
  if (init_scale < 0.0) throw std::invalid_argument("toy.init_scale must be >= 0");
  if (!std::isfinite(format_prior) || format_prior < 0.0) {
    throw std::invalid_argument("toy.format_prior must be finite and >= 0");
  }
  if (inner_updates < 1) throw std::invalid_argument("toy.inner_updates must be >= 1");
  if (warmup_steps < 0) throw std::invalid_argument("toy.warmup_steps must be >= 0");
  if (momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("toy.momentum must be in [0, 1)");
  }
  if (heldout_size < 1) throw std::invalid_argument("toy.heldout_size must be >= 1");
}

std::string step_metrics_json(const StepMetrics& m) {
  nlohmann::ordered_json j{
      {"step", m.step},
      {"learning_rate", m.learning_rate},
      {"objective", m.objective},
      {"grad_norm", m.grad_norm},
      {"mean_reward", m.mean_reward},
      {"accuracy", m.accuracy},
      {"clip_ratio", m.clip_ratio},
      {"mean_entropy", m.mean_entropy},
      {"heldout_accuracy", m.heldout_accuracy},
      {"n_correct", m.n_correct},
      {"n_incorrect", m.n_incorrect},
      {"mean_len_correct", m.mean_len_correct},
      {"p50_len_correct", m.p50_len_correct},
      {"p90_len_correct", m.p90_len_correct},
      {"mean_len_incorrect", m.mean_len_incorrect},
      {"p50_len_incorrect", m.p50_len_incorrect},
      {"p90_len_incorrect", m.p90_len_incorrect},
  };
  return j.dump();
}

ToyTrainer::ToyTrainer(ToyTrainConfig config) : config_(std::move(config)) {
  config_.validate();
  vocab_ = ToyVocab::standard();
  std::mt19937_64 rng(mix_seed(config_.seed, 1));
  heldout_.reserve(static_cast<size_t>(config_.heldout_size));
  for (int i = 0; i < config_.heldout_size; ++i) {
    heldout_.push_back(sample_prompt(vocab_, config_.task, rng));
  }
}

TrainState ToyTrainer::init_state() const {
  ToyPolicy policy(vocab_.size(), config_.context_window, config_.temperature);
  std::mt19937_64 rng(mix_seed(config_.seed, 0));
  policy.init_random(rng, config_.init_scale);
  apply_format_prior(policy, vocab_, config_.format_prior);
  return TrainState(std::move(policy));
}

bool ToyTrainer::response_correct(std::span<const int> tokens, const ToyPrompt& prompt) const {
  auto content = tokens;
  if (!content.empty() && content.back() == vocab_.eos) {
    content = content.first(content.size() - 1);
  }
  const std::string text = vocab_.detokenize(content);
  return verify(text, prompt.gold).verdict == Verdict::Correct;
}

TrajectoryGroup ToyTrainer::rollout_group(const ToyPolicy& policy, const ToyPrompt& prompt,
                                          std::uint64_t rollout_seed) const {
  TrajectoryGroup traj;
  traj.prompt = prompt.text;
  const int max_tokens =
      static_cast<int>(std::min<long>(config_.max_tokens, config_.grpo.max_generation_tokens));
  for (int i = 0; i < config_.grpo.group_size; ++i) {
    std::mt19937_64 rng(mix_seed(rollout_seed, 101, static_cast<std::uint64_t>(i)));
    auto rollout = policy.sample(prompt.tokens, vocab_.eos, max_tokens, rng);

    auto content = std::span<const int>(rollout.tokens);
    if (rollout.ended) content = content.first(content.size() - 1);
    const std::string text = vocab_.detokenize(content);
    const long length = static_cast<long>(rollout.tokens.size());
    const FormatStatus format = check_format(text, rollout.ended);
    const bool correct = response_correct(rollout.tokens, prompt);
    const auto words = split_words(text);
    const RewardBreakdown breakdown =
        final_reward(correct, length, format, words, config_.reward);

    traj.outputs.push_back(std::move(rollout.tokens));
    traj.old_logprobs.push_back(rollout.logprobs);
    traj.new_logprobs.push_back(std::move(rollout.logprobs));
    traj.new_entropies.push_back(std::move(rollout.entropies));
    traj.rewards.push_back(breakdown.final);
    traj.clipped_flags.push_back(!rollout.ended);
  }
  return traj;
}

double ToyTrainer::heldout_accuracy(const ToyPolicy& policy) const {
  int correct = 0;
  const int max_tokens =
      static_cast<int>(std::min<long>(config_.max_tokens, config_.grpo.max_generation_tokens));
  for (const auto& prompt : heldout_) {
    const auto tokens = policy.greedy(prompt.tokens, vocab_.eos, max_tokens);
    if (response_correct(tokens, prompt)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(heldout_.size());
}

bool ToyTrainer::train_step(TrainState& state) const {
  const int s = state.step;
  const GrpoConfig& grpo = config_.grpo;
  const double lr = grpo.learning_rate * warmup_ramp(s + 1, config_.warmup_steps);

  std::mt19937_64 prompt_rng(mix_seed(config_.seed, 2, static_cast<std::uint64_t>(s)));
  std::vector<ToyPrompt> prompts;
  prompts.reserve(static_cast<size_t>(config_.batch_size));
  for (int b = 0; b < config_.batch_size; ++b) {
    prompts.push_back(sample_prompt(vocab_, config_.task, prompt_rng));
  }

  std::vector<PreparedGroup> groups;
  groups.reserve(prompts.size());
  double reward_sum = 0.0;
  double entropy_sum = 0.0;
  size_t token_count = 0;
  int clipped_count = 0;
  int correct_count = 0;
  int rollout_count = 0;
  std::vector<double> correct_lens;
  std::vector<double> incorrect_lens;

  for (size_t b = 0; b < prompts.size(); ++b) {
    PreparedGroup g;
    g.prompt_tokens = prompts[b].tokens;
    g.traj = rollout_group(state.policy, prompts[b],
                           mix_seed(config_.seed, 3, static_cast<std::uint64_t>(s), b));
    g.adv = group_advantages(g.traj.rewards, grpo.group_size);
    for (size_t i = 0; i < g.traj.outputs.size(); ++i) {
      reward_sum += g.traj.rewards[i];
      clipped_count += g.traj.clipped_flags[i] ? 1 : 0;
      for (double h : g.traj.new_entropies[i]) entropy_sum += h;
      token_count += g.traj.outputs[i].size();
      const bool correct = response_correct(g.traj.outputs[i], prompts[b]);
      correct_count += correct ? 1 : 0;
      ++rollout_count;
      const double len = static_cast<double>(g.traj.outputs[i].size());
      (correct ? correct_lens : incorrect_lens).push_back(len);
    }
    groups.push_back(std::move(g));
  }

  const std::vector<double> snapshot = state.policy.params();
  if (state.velocity.size() != state.policy.param_count()) {
    state.velocity.assign(state.policy.param_count(), 0.0);
  }
  const std::vector<double> velocity_snapshot = state.velocity;

  std::vector<double> grad(state.policy.param_count(), 0.0);
  double objective = 0.0;
  for (int u = 0; u < config_.inner_updates; ++u) {
    if (u > 0) {
      for (auto& g : groups) rescore_group(state.policy, g);
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    objective = objective_and_gradient(state.policy, groups, grpo, &grad);

    bool finite = std::isfinite(objective);
    if (finite) {
      finite = std::all_of(grad.begin(), grad.end(),
                           [](double x) { return std::isfinite(x); });
    }
    if (!finite) {
      state.policy.params() = snapshot;
      state.velocity = velocity_snapshot;
      state.last_error =
          "non-finite gradient at step " + std::to_string(s) + "; step aborted";
      return false;
    }

    auto& theta = state.policy.params();
    if (config_.momentum > 0.0) {
      for (size_t i = 0; i < theta.size(); ++i) {
        state.velocity[i] = config_.momentum * state.velocity[i] + grad[i];
        theta[i] += lr * state.velocity[i];
      }
    } else {
      for (size_t i = 0; i < theta.size(); ++i) theta[i] += lr * grad[i];
    }
  }

  StepMetrics m;
  m.step = s;
  m.learning_rate = lr;
  m.objective = objective;
  m.grad_norm = std::sqrt(std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0));
  m.mean_reward = rollout_count > 0 ? reward_sum / rollout_count : 0.0;
  m.accuracy = rollout_count > 0 ? static_cast<double>(correct_count) / rollout_count : 0.0;
  m.clip_ratio = rollout_count > 0 ? static_cast<double>(clipped_count) / rollout_count : 0.0;
  m.mean_entropy = token_count > 0 ? entropy_sum / static_cast<double>(token_count) : 0.0;
  m.heldout_accuracy = heldout_accuracy(state.policy);
  m.n_correct = static_cast<int>(correct_lens.size());
  m.n_incorrect = static_cast<int>(incorrect_lens.size());
  m.mean_len_correct = mean_of(correct_lens);
  m.p50_len_correct = nearest_rank_percentile(correct_lens, 50.0);
  m.p90_len_correct = nearest_rank_percentile(correct_lens, 90.0);
  m.mean_len_incorrect = mean_of(incorrect_lens);
  m.p50_len_incorrect = nearest_rank_percentile(incorrect_lens, 50.0);
  m.p90_len_incorrect = nearest_rank_percentile(incorrect_lens, 90.0);

  state.metrics.push_back(m);
  state.step = s + 1;
  if (m.heldout_accuracy > state.best_heldout) {
    state.best_heldout = m.heldout_accuracy;
    state.best_step = s;
    state.best_params = state.policy.params();
  }
  return true;
}

TrainState ToyTrainer::train(const std::function<void(const StepMetrics&)>& on_step) const {
  TrainState state = init_state();
  for (int s = 0; s < config_.steps; ++s) {
    if (!train_step(state)) break;
    if (on_step) on_step(state.metrics.back());
  }
  return state;
}

std::string config_fingerprint(const ToyTrainConfig& config) {
  const std::uint64_t h = fnv1a64(config_json(config).dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

void save_checkpoint(const std::string& path, const ToyTrainConfig& config,
                     const TrainState& state) {
  nlohmann::ordered_json j;
  j["config_hash"] = config_fingerprint(config);
  if (!state.best_params.empty()) {
    j["step"] = state.best_step;
    j["heldout_accuracy"] = state.best_heldout;
    j["params"] = state.best_params;
  } else {
    j["step"] = state.step;
    j["heldout_accuracy"] = 0.0;
    j["params"] = state.policy.params();
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint file: " + path);
  out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint file: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  Checkpoint c;
  c.params = j.at("params").get<std::vector<double>>();
  c.step = j.at("step").get<int>();
  c.heldout_accuracy = j.at("heldout_accuracy").get<double>();
  c.config_hash = j.at("config_hash").get<std::string>();
  return c;
}

GradCheckReport gradient_check(std::uint64_t seed, int instances, double tolerance) {
  if (instances < 1) throw std::invalid_argument("gradient_check: instances must be >= 1");
  GradCheckReport report;
  report.instances = instances;
  report.tolerance = tolerance;

  GrpoConfig grpo;
  grpo.group_size = 4;
  grpo.kl_coeff = 0.01;
  grpo.entropy_coeff = 0.01;
  const ToyVocab vocab = ToyVocab::standard();
  const ToyTaskConfig task;
  const double h = 1e-5;

  double worst = 0.0;
  for (int inst = 0; inst < instances; ++inst) {
    std::mt19937_64 rng(mix_seed(seed, 17, static_cast<std::uint64_t>(inst)));
    ToyPolicy policy(vocab.size(), 2, 1.0);
    policy.init_random(rng, 0.3);
    const ToyPrompt prompt = sample_prompt(vocab, task, rng);

    PreparedGroup g;
    g.prompt_tokens = prompt.tokens;
    g.traj.prompt = prompt.text;
    for (int i = 0; i < grpo.group_size; ++i) {
      auto r = policy.sample(prompt.tokens, vocab.eos, 8, rng);
      g.traj.outputs.push_back(std::move(r.tokens));
      g.traj.old_logprobs.push_back(r.logprobs);
      g.traj.new_logprobs.push_back(std::move(r.logprobs));
      g.traj.new_entropies.push_back(std::move(r.entropies));
      g.traj.rewards.push_back(2.0 * uniform01(rng) - 1.0);
      g.traj.clipped_flags.push_back(false);
    }
    g.adv = group_advantages(g.traj.rewards, grpo.group_size);

    // Small jitter keeps every ratio well inside the clip band, so the
    // objective is smooth around theta_new.
    for (double& w : policy.params()) w += (uniform01(rng) - 0.5) * 0.02;
    rescore_group(policy, g);

    std::vector<double> grad(policy.param_count(), 0.0);
    std::vector<PreparedGroup> groups;
    groups.push_back(g);
    objective_and_gradient(policy, groups, grpo, &grad);

    std::vector<size_t> coords;
    for (size_t i = 0; i < grad.size() && coords.size() < 24; ++i) {
      if (std::abs(grad[i]) > 1e-9) coords.push_back(i);
    }
    for (int extra = 0; extra < 8; ++extra) {
      coords.push_back(static_cast<size_t>(rng() % policy.param_count()));
    }

    double num = 0.0;
    double den_a = 0.0;
    double den_f = 0.0;
    for (size_t idx : coords) {
      auto eval_at = [&](double delta) {
        ToyPolicy p2 = policy;
        p2.params()[idx] += delta;
        std::vector<PreparedGroup> gs;
        gs.push_back(g);
        rescore_group(p2, gs[0]);
        return objective_and_gradient(p2, gs, grpo, nullptr);
      };
      const double fd = (eval_at(h) - eval_at(-h)) / (2.0 * h);
      const double a = grad[idx];
      num += (a - fd) * (a - fd);
      den_a += a * a;
      den_f += fd * fd;
    }
    const double denom = std::max({std::sqrt(den_a), std::sqrt(den_f), 1e-300});
    worst = std::max(worst, std::sqrt(num) / denom);
    report.coords_checked += static_cast<int>(coords.size());
  }
  report.worst_rel_error = worst;
  report.pass = worst <= tolerance;
  return report;
}

}  // namespace rlvr
