#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geobim {

/// Every failure the pipeline can raise. The service maps each code to one
/// ApiError code string and HTTP status.
enum class ErrorCode {
  MissingHeader,
  SyntaxError,
  DanglingReference,
  NoLengthUnit,
  NoBuilding,
  CyclicPlacement,
  Unsupported,
  EmptyModel,
  FrameMismatch,
  NoStoreys,
  DegenerateInput,
  EmptyCut,
  ZeroReference,
  NoTopPart,
  NoVertices,
  NoGeoreference,
  InvalidParams,
  UnknownStorey,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string detail = {})
      : std::runtime_error(std::move(message)), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace geobim
