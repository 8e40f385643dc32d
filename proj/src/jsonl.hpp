#pragma once

#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace rlvr {

// Streams a JSONL file, calling fn(line_number, parsed) for every non-blank
// line. Parse and handler failures are rethrown with "path:line:" context so
// CLI diagnostics can point at the offending record.
inline void for_each_jsonl(const std::string& path,
                           const std::function<void(size_t, const nlohmann::json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": invalid JSON");
    }
    try {
      fn(line_no, j);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace rlvr
