#include "mfga/error.hpp"

namespace mfga {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::contract_violation: return "contract_violation";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::configuration: return "configuration";
    case ErrorKind::extinction: return "extinction";
    case ErrorKind::scheme: return "scheme";
  }
  return "unknown";
}

}  // namespace mfga
