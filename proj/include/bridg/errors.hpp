#pragma once

#include <stdexcept>
#include <string>

namespace bridg {

// Error taxonomy shared across the library. The CLI maps `usage` and
// `config` to exit code 2, everything else to exit code 1.
enum class ErrorKind {
  usage,      // caller violated a precondition
  config,     // bad configuration file or override
  parse,      // malformed persisted data (JSONL, pool files, ...)
  format,     // model output that cannot be parsed (e.g. bridge text)
  transport,  // network failure after retries
  provider,   // non-retryable provider response (auth, 4xx, ...)
  protocol,   // well-formed HTTP but malformed/out-of-contract body
  io,         // filesystem failure
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error usage_error(const std::string& m) { return Error(ErrorKind::usage, m); }
inline Error config_error(const std::string& m) { return Error(ErrorKind::config, m); }
inline Error parse_error(const std::string& m) { return Error(ErrorKind::parse, m); }
inline Error format_error(const std::string& m) { return Error(ErrorKind::format, m); }
inline Error transport_error(const std::string& m) { return Error(ErrorKind::transport, m); }
inline Error provider_error(const std::string& m) { return Error(ErrorKind::provider, m); }
inline Error protocol_error(const std::string& m) { return Error(ErrorKind::protocol, m); }
inline Error io_error(const std::string& m) { return Error(ErrorKind::io, m); }

}  // namespace bridg
