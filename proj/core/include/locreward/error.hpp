#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace locreward {

enum class ErrorCode {
  LabelBoxMismatch,
  DegenerateBox,
  OutOfFrame,
  InvalidArgument,
  InvalidTemplate,
  GroupTooSmall,
  MissingLogprobs,
  LengthMismatch,
  IndexOutOfRange,
  EvenKernel,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so
// callers can branch on the kind without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace locreward
