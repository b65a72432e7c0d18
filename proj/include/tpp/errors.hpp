#pragma once

#include <iostream>
#include <stdexcept>
#include <string>

namespace tpp {

// Base error carrying a short machine-readable kind tag alongside the message.
// The CLI maps kind() into the JSON error report on stderr.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define TPP_ERROR_TYPE(Name, tag)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& msg) : Error(tag, msg) {}      \
  }

TPP_ERROR_TYPE(TooFewShots, "too-few-shots");
TPP_ERROR_TYPE(FormatError, "format-error");
TPP_ERROR_TYPE(DimensionMismatch, "dimension-mismatch");
TPP_ERROR_TYPE(UnknownClass, "unknown-class");
TPP_ERROR_TYPE(UnknownRecipe, "unknown-recipe");
TPP_ERROR_TYPE(SingularMoments, "singular-moments");
TPP_ERROR_TYPE(SingularQ, "singular-q");
TPP_ERROR_TYPE(NotPsd, "not-psd");
TPP_ERROR_TYPE(DegenerateData, "degenerate-data");
TPP_ERROR_TYPE(LengthMismatch, "length-mismatch");
TPP_ERROR_TYPE(DivideByZero, "divide-by-zero");
TPP_ERROR_TYPE(ConfigError, "config-error");
TPP_ERROR_TYPE(InvalidArgument, "invalid-argument");

#undef TPP_ERROR_TYPE

inline void warn(const std::string& msg) {
  std::cerr << "[tpp] warning: " << msg << "\n";
}

}  // namespace tpp
