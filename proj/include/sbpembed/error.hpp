#pragma once

#include <stdexcept>
#include <string>

namespace sbpembed {

enum class ErrorCode {
  InvalidArgument,
  Configuration,
  InvalidMesh,
  InvalidMapping,
  InconsistentMesh,
  Unsupported,
  Divergence,
  Domain,
  Io,
  Internal,
};

/// Exception carrying a category that the C API maps onto its status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace sbpembed
