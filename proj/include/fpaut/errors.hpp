#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fpaut {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FPAUT_DEFINE_ERROR(Name)              \
  class Name : public Error {                 \
   public:                                    \
    explicit Name(const std::string& what)    \
        : Error(#Name ": " + what) {}         \
  }

FPAUT_DEFINE_ERROR(IndexOutOfRange);
FPAUT_DEFINE_ERROR(PresentationMismatch);
FPAUT_DEFINE_ERROR(EmptyWord);
FPAUT_DEFINE_ERROR(InvalidPresentation);
FPAUT_DEFINE_ERROR(NotAnAutomorphism);
FPAUT_DEFINE_ERROR(NotFactorPreserving);
FPAUT_DEFINE_ERROR(FactorsPermuted);
FPAUT_DEFINE_ERROR(ZeroMatrix);
FPAUT_DEFINE_ERROR(NegativeEntry);
FPAUT_DEFINE_ERROR(UnknownDirection);
FPAUT_DEFINE_ERROR(DifferentVertices);
FPAUT_DEFINE_ERROR(TooShort);
FPAUT_DEFINE_ERROR(DimensionMismatch);
FPAUT_DEFINE_ERROR(ConfigError);

#undef FPAUT_DEFINE_ERROR

/// Malformed word or automorphism text; `position` is a 0-based character offset.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : Error("ParseError at " + std::to_string(position) + ": " + message),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace fpaut
