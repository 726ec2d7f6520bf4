#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace degenlab {

/// Base of every error raised by the library.  `kind()` is the stable short
/// name that reports and the CLI print.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

class SyntaxError : public Error {
public:
  SyntaxError(std::size_t position, const std::string& expected)
      : Error("SyntaxError", "at position " + std::to_string(position) + ", expected " + expected),
        position_(position), expected_(expected) {}
  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

private:
  std::size_t position_;
  std::string expected_;
};

#define DEGENLAB_SIMPLE_ERROR(Name)                                                      \
  class Name : public Error {                                                            \
  public:                                                                                \
    explicit Name(const std::string& what) : Error(#Name, what) {}                       \
  }

DEGENLAB_SIMPLE_ERROR(UnknownVariable);
DEGENLAB_SIMPLE_ERROR(ArityError);
DEGENLAB_SIMPLE_ERROR(DomainError);
DEGENLAB_SIMPLE_ERROR(UnboundVariable);
DEGENLAB_SIMPLE_ERROR(StepTooLarge);
DEGENLAB_SIMPLE_ERROR(EmptyShell);
DEGENLAB_SIMPLE_ERROR(NoCrossing);
DEGENLAB_SIMPLE_ERROR(InvalidFamily);
DEGENLAB_SIMPLE_ERROR(NotPSD);
DEGENLAB_SIMPLE_ERROR(RangeMismatch);
DEGENLAB_SIMPLE_ERROR(DimensionMismatch);
DEGENLAB_SIMPLE_ERROR(NotElliptic);
DEGENLAB_SIMPLE_ERROR(PsiNegative);
DEGENLAB_SIMPLE_ERROR(PsiNotHomogeneous);
DEGENLAB_SIMPLE_ERROR(NotConverged);
DEGENLAB_SIMPLE_ERROR(DegenerateMin);
DEGENLAB_SIMPLE_ERROR(ConfigError);
DEGENLAB_SIMPLE_ERROR(IoError);

#undef DEGENLAB_SIMPLE_ERROR

}  // namespace degenlab
