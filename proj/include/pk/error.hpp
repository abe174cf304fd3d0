#pragma once

#include <stdexcept>
#include <string>

namespace pk {

enum class Errc {
  InvalidArgument = 1,
  InvalidDomain,
  InvalidTiling,
  AnchorOutsideDomain,
  StepRuleViolation,
  InconsistentPaths,
  NotTileable,
  SiteOutOfRange,
  Infeasible,
  TooLarge,
  LabelMismatch,
  NumericalDegeneracy,
  InsufficientMass,
  HorizonExceeded,
  OnSupport,
  NoCharacteristic,
  NewtonDivergence,
  StiffNearEdge,
  NoSignChange,
  NonPositiveA,
  OutOfRange,
  OnBranchCut,
  QuadratureNonConvergence,
  OutOfSupport,
  NotConverged,
  OnPole,
  ConfigError,
  ParseError,
};

const char* errc_name(Errc c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc c, const std::string& msg) { throw Error(c, msg); }

}  // namespace pk
