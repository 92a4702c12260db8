#pragma once

#include <stdexcept>
#include <string>

namespace prost {

// Every failure carries a stable machine-readable kind such as
// "syntax-error" or "invalid-position".
class Error : public std::runtime_error {
 public:
  Error(std::string kind, std::string message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)), message_(std::move(message)) {}

  const std::string& kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string kind_;
  std::string message_;
};

}  // namespace prost
