#pragma once

#include <stdexcept>
#include <string>

namespace geowarp {

enum class ErrorCode {
  InvalidInput,
  InvalidQuaternion,
  InvalidDepth,
  BehindCamera,
  DegenerateStatistics,
  InvalidPose,
  InvalidPlacement,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace geowarp
