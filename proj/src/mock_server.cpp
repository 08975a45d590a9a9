#include "bridg/mock_server.hpp"

#include <httplib.h>

#include "bridg/errors.hpp"

namespace bridg {

using nlohmann::json;

struct MockServer::Impl {
  httplib::Server server;
};

namespace {

void handle_route(MockEngine& engine, const std::string& route, const httplib::Request& req,
                  httplib::Response& res) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::exception& e) {
    res.status = 400;
    res.set_content(json{{"error", std::string("bad request body: ") + e.what()}}.dump(),
                    "application/json");
    return;
  }
  try {
    json response = engine.handle(route, body);
    res.status = 200;
    res.set_content(response.dump(), "application/json");
  } catch (const Error& e) {
    // Unscripted or unsupported requests: diagnostic 404 per the contract.
    res.status = 404;
    res.set_content(json{{"error", e.what()}, {"route", route}}.dump(), "application/json");
  }
}

}  // namespace

MockServer::MockServer(std::shared_ptr<MockEngine> engine)
    : engine_(std::move(engine)), impl_(std::make_unique<Impl>()) {
  auto bind = [this](const std::string& route, const std::string& path) {
    impl_->server.Post(path, [this, route](const httplib::Request& req, httplib::Response& res) {
      handle_route(*engine_, route, req, res);
    });
  };
  bind("chat/completions", "/v1/chat/completions");
  bind("embeddings", "/v1/embeddings");
  bind("qe/score", "/v1/qe/score");
  impl_->server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });
}

MockServer::~MockServer() { stop(); }

int MockServer::start(const std::string& host, int port) {
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
    if (port_ <= 0) throw io_error("mock server failed to bind a port on " + host);
  } else {
    if (!impl_->server.bind_to_port(host, port))
      throw io_error("mock server failed to bind " + host + ":" + std::to_string(port));
    port_ = port;
  }
  thread_ = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void MockServer::stop() {
  if (thread_.joinable()) {
    impl_->server.stop();
    thread_.join();
  }
}

void MockServer::run(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port))
    throw io_error("mock server failed to bind " + host + ":" + std::to_string(port));
  port_ = port;
  impl_->server.listen_after_bind();
}

}  // namespace bridg
