#include "toy_task.hpp"

#include <stdexcept>

namespace rlvr {

ToyVocab ToyVocab::standard() {
  ToyVocab v;
  v.digit0 = 0;
  for (int d = 0; d < 10; ++d) v.tokens.push_back(std::string(1, static_cast<char>('0' + d)));
  v.plus = v.size();
  v.tokens.push_back("+");
  v.equals = v.size();
  v.tokens.push_back("=");
  v.think_open = v.size();
  v.tokens.push_back("<think>");
  v.think_close = v.size();
  v.tokens.push_back("</think>");
  v.boxed_open = v.size();
  v.tokens.push_back("\\boxed{");
  v.brace_close = v.size();
  v.tokens.push_back("}");
  v.eos = v.size();
  v.tokens.push_back("<eos>");
  for (const char* w : {"so", "we", "add", "get", "the", "sum", "of", "and", "then", "mod",
                        "ten", "is", "thus", "now"}) {
    v.tokens.push_back(w);
  }
  return v;
}

std::vector<int> ToyVocab::fillers() const {
  std::vector<int> out;
  for (int id = eos + 1; id < size(); ++id) out.push_back(id);
  return out;
}

std::string ToyVocab::detokenize(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || id >= size()) throw std::out_of_range("detokenize: id outside vocabulary");
    if (!out.empty()) out.push_back(' ');
    out += tokens[static_cast<size_t>(id)];
  }
  return out;
}

void ToyTaskConfig::validate() const {
  if (difficulty_mix.empty()) throw std::invalid_argument("task.difficulty_mix must be non-empty");
  for (int k : difficulty_mix) {
    if (k < 1 || k > 8) throw std::invalid_argument("task.difficulty_mix entries must be in 1..8");
  }
}

ToyPrompt make_prompt(const ToyVocab& vocab, std::span<const int> operands) {
  if (operands.empty()) throw std::invalid_argument("make_prompt: need at least one operand");
  ToyPrompt p;
  int sum = 0;
  for (size_t i = 0; i < operands.size(); ++i) {
    const int d = operands[i];
    if (d < 0 || d > 9) throw std::invalid_argument("make_prompt: operands must be digits");
    if (i > 0) p.tokens.push_back(vocab.plus);
    p.tokens.push_back(vocab.digit0 + d);
    sum += d;
  }
  p.tokens.push_back(vocab.equals);
  p.text = vocab.detokenize(p.tokens);
  p.gold = std::string(1, static_cast<char>('0' + sum % 10));
  p.difficulty = static_cast<int>(operands.size());
  return p;
}

ToyPrompt sample_prompt(const ToyVocab& vocab, const ToyTaskConfig& config,
                        std::mt19937_64& rng) {
  config.validate();
  const int k = config.difficulty_mix[rng() % config.difficulty_mix.size()];
  std::vector<int> operands(static_cast<size_t>(k));
  for (int& d : operands) d = static_cast<int>(rng() % 10);
  return make_prompt(vocab, operands);
}

}  // namespace rlvr
