#include "bridg/errors.hpp"

namespace bridg {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return "usage error";
    case ErrorKind::config: return "config error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::format: return "format error";
    case ErrorKind::transport: return "transport error";
    case ErrorKind::provider: return "provider error";
    case ErrorKind::protocol: return "protocol error";
    case ErrorKind::io: return "io error";
  }
  return "error";
}

}  // namespace bridg
