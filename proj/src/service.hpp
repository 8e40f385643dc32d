#pragma once

#include <memory>
#include <string>

#include "config.hpp"
#include "scorer.hpp"

namespace rlvr {

// HTTP scoring service: POST /v1/score, GET /healthz. start() binds and
// serves on a background thread; port 0 picks an ephemeral port.
class ScoreService {
 public:
  ScoreService(Scorer scorer, ServiceConfig config);
  ~ScoreService();

  ScoreService(const ScoreService&) = delete;
  ScoreService& operator=(const ScoreService&) = delete;

  bool start();
  int port() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rlvr
