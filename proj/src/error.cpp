#include "dbtsdf/error.hpp"

namespace dbtsdf {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::Resource: return "resource error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Corruption: return "corruption error";
    case ErrorKind::Evaluation: return "evaluation error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::InvalidDirection: return "invalid direction";
    case ErrorKind::Contract: return "contract violation";
  }
  return "error";
}

}  // namespace dbtsdf
