#include "service.hpp"

#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace rlvr {

struct ScoreService::Impl {
  Scorer scorer;
  ServiceConfig config;
  httplib::Server server;
  std::thread worker;
  int bound_port = -1;

  Impl(Scorer s, ServiceConfig c) : scorer(std::move(s)), config(std::move(c)) {
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"status\":\"ok\"}", "application/json");
    });
    server.Post("/v1/score", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const ScoreRequest parsed = parse_score_request(req.body);
        res.set_content(score_response_json(scorer.score(parsed)), "application/json");
      } catch (const std::invalid_argument& e) {
        res.status = 400;
        res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      }
    });
  }
};

ScoreService::ScoreService(Scorer scorer, ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(scorer), std::move(config))) {
  impl_->config.validate();
}

ScoreService::~ScoreService() { stop(); }

bool ScoreService::start() {
  if (impl_->worker.joinable()) return false;
  if (impl_->config.port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(impl_->config.host);
    if (impl_->bound_port < 0) return false;
  } else {
    if (!impl_->server.bind_to_port(impl_->config.host, impl_->config.port)) return false;
    impl_->bound_port = impl_->config.port;
  }
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return true;
}

int ScoreService::port() const { return impl_->bound_port; }

void ScoreService::stop() {
  if (!impl_->worker.joinable()) return;
  impl_->server.stop();
  impl_->worker.join();
}

}  // namespace rlvr
