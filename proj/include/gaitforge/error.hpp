#pragma once

#include <stdexcept>
#include <string>

namespace gaitforge {

enum class ErrorCode {
  kUnknownMorphology = 1,
  kValidation,
  kDimensionMismatch,
  kInvalidInput,
  kNumericalBlowup,
  kNotReset,
  kIo,
  kProtocol,
  kSchemaMismatch,
  kEmptyReport,
};

const char* error_code_name(ErrorCode code);

// Single exception type for the library; the code drives the C API status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gaitforge
