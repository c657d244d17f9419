#pragma once

#include <stdexcept>
#include <string>

namespace fxctl {

enum class ErrorKind {
  parse,
  validation,
  unknown_parameter,
  range_violation,
  unknown_node,
  locked,
  render,
  transport,
  fixture_miss,
  pipeline,
  session,
  binding_mismatch,
  version_mismatch,
  io,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure surfaced by the library carries a kind and the pipeline
// stage it came from, so service and CLI callers can label errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string stage, const std::string& reason)
      : std::runtime_error(reason), kind_(kind), stage_(std::move(stage)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  std::string reason() const { return what(); }

 private:
  ErrorKind kind_;
  std::string stage_;
};

}  // namespace fxctl
