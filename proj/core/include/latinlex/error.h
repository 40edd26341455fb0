#ifndef LATINLEX_ERROR_H_
#define LATINLEX_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace latinlex {

// Error categories shared by all modules. The service maps these onto
// ApiError codes and HTTP statuses.
enum class ErrorCode {
  kNotFound,
  kConflict,
  kValidation,
  kConstraint,
  kStaleView,
  kSync,
  kParse,
  kIo,
  kTraining,
  kExpansion,
  kClassification,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string location = {})
      : std::runtime_error(message), code_(code), location_(std::move(location)) {}

  ErrorCode code() const { return code_; }

  // Optional position information (file:line, line:column, ...).
  const std::string& location() const { return location_; }

 private:
  ErrorCode code_;
  std::string location_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kConstraint: return "constraint";
    case ErrorCode::kStaleView: return "stale_view";
    case ErrorCode::kSync: return "sync";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kTraining: return "training";
    case ErrorCode::kExpansion: return "expansion";
    case ErrorCode::kClassification: return "classification";
    case ErrorCode::kInternal: return "internal";
  }
  return "internal";
}

}  // namespace latinlex

#endif  // LATINLEX_ERROR_H_
