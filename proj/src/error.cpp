#include "pk/error.hpp"

namespace pk {

const char* errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidDomain: return "InvalidDomain";
    case Errc::InvalidTiling: return "InvalidTiling";
    case Errc::AnchorOutsideDomain: return "AnchorOutsideDomain";
    case Errc::StepRuleViolation: return "StepRuleViolation";
    case Errc::InconsistentPaths: return "InconsistentPaths";
    case Errc::NotTileable: return "NotTileable";
    case Errc::SiteOutOfRange: return "SiteOutOfRange";
    case Errc::Infeasible: return "Infeasible";
    case Errc::TooLarge: return "TooLarge";
    case Errc::LabelMismatch: return "LabelMismatch";
    case Errc::NumericalDegeneracy: return "NumericalDegeneracy";
    case Errc::InsufficientMass: return "InsufficientMass";
    case Errc::HorizonExceeded: return "HorizonExceeded";
    case Errc::OnSupport: return "OnSupport";
    case Errc::NoCharacteristic: return "NoCharacteristic";
    case Errc::NewtonDivergence: return "NewtonDivergence";
    case Errc::StiffNearEdge: return "StiffNearEdge";
    case Errc::NoSignChange: return "NoSignChange";
    case Errc::NonPositiveA: return "NonPositiveA";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::OnBranchCut: return "OnBranchCut";
    case Errc::QuadratureNonConvergence: return "QuadratureNonConvergence";
    case Errc::OutOfSupport: return "OutOfSupport";
    case Errc::NotConverged: return "NotConverged";
    case Errc::OnPole: return "OnPole";
    case Errc::ConfigError: return "ConfigError";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace pk
