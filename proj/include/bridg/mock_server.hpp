#pragma once

#include <memory>
#include <string>
#include <thread>

#include "bridg/mocks.hpp"

namespace bridg {

// Serves the chat/embedding/QE wire protocol over HTTP from a scripted
// MockEngine. Unscripted requests get a 404 with a diagnostic body.
class MockServer {
 public:
  explicit MockServer(std::shared_ptr<MockEngine> engine);
  ~MockServer();

  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  // Binds to `port` on host; port 0 picks a free port. Returns the bound
  // port once the server accepts connections.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();
  int port() const { return port_; }

  // Foreground mode used by the CLI subcommand; blocks until the process
  // is interrupted.
  void run(const std::string& host, int port);

 private:
  struct Impl;
  std::shared_ptr<MockEngine> engine_;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace bridg
