#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbalancer {

// Machine-readable failure categories. The CLI prints the category name
// verbatim, so keep the spellings stable.
enum class ErrorCategory {
  UnknownNode,
  EmptyCluster,
  NoSample,
  LengthMismatch,
  EmptyInput,
  InvalidConfig,
  NoFeasibleNode,
  SameNode,
  UnknownContainer,
  ContainerVanished,
  ContainerRunning,
  UnknownImage,
  MalformedTopic,
  StaleSnapshot,
  ParseError,
  ValidationError,
  IoError,
};

constexpr std::string_view category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::UnknownNode: return "UnknownNode";
    case ErrorCategory::EmptyCluster: return "EmptyCluster";
    case ErrorCategory::NoSample: return "NoSample";
    case ErrorCategory::LengthMismatch: return "LengthMismatch";
    case ErrorCategory::EmptyInput: return "EmptyInput";
    case ErrorCategory::InvalidConfig: return "InvalidConfig";
    case ErrorCategory::NoFeasibleNode: return "NoFeasibleNode";
    case ErrorCategory::SameNode: return "SameNode";
    case ErrorCategory::UnknownContainer: return "UnknownContainer";
    case ErrorCategory::ContainerVanished: return "ContainerVanished";
    case ErrorCategory::ContainerRunning: return "ContainerRunning";
    case ErrorCategory::UnknownImage: return "UnknownImage";
    case ErrorCategory::MalformedTopic: return "MalformedTopic";
    case ErrorCategory::StaleSnapshot: return "StaleSnapshot";
    case ErrorCategory::ParseError: return "ParseError";
    case ErrorCategory::ValidationError: return "ValidationError";
    case ErrorCategory::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& what) {
  throw Error(category, what);
}

}  // namespace cbalancer
