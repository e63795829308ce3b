#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qft {

enum class ErrorKind {
  PoleOnAxis,
  ZeroMagnitude,
  CriticalPoint,
  InvalidM,
  InvalidTransferFunction,
  SyntaxError,
  UnknownParameter,
  NonFiniteValue,
  OutOfBox,
  TemplateTooWide,
  DegenerateSpread,
  GridMismatch,
  BoundBelowUContour,
  UnstableModel,
  ZeroController,
  EmptyWindow,
  RankDeficient,
  NegativeMappedGain,
  NoFeasiblePoint,
  InvalidArgument,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

} // namespace qft
