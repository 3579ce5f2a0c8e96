#include "weaves/error.hpp"

namespace weaves {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateModule: return "DuplicateModule";
    case ErrorCode::InvalidDefinition: return "InvalidDefinition";
    case ErrorCode::UnknownModule: return "UnknownModule";
    case ErrorCode::UnknownBead: return "UnknownBead";
    case ErrorCode::EmptyWeave: return "EmptyWeave";
    case ErrorCode::UnknownWeave: return "UnknownWeave";
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::LateSharing: return "LateSharing";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::SignatureMismatch: return "SignatureMismatch";
    case ErrorCode::UnknownEntry: return "UnknownEntry";
    case ErrorCode::UnknownString: return "UnknownString";
    case ErrorCode::AllBlocked: return "AllBlocked";
    case ErrorCode::NotHolder: return "NotHolder";
    case ErrorCode::UnknownLock: return "UnknownLock";
    case ErrorCode::MissingCheckpoint: return "MissingCheckpoint";
    case ErrorCode::DoubleFree: return "DoubleFree";
    case ErrorCode::UnknownAddress: return "UnknownAddress";
    case ErrorCode::ScopeMidStep: return "ScopeMidStep";
    case ErrorCode::StaleCheckpoint: return "StaleCheckpoint";
    case ErrorCode::UnknownCheckpoint: return "UnknownCheckpoint";
    case ErrorCode::CorruptImage: return "CorruptImage";
    case ErrorCode::NoLegalAction: return "NoLegalAction";
    case ErrorCode::NoFeasibleComposition: return "NoFeasibleComposition";
    case ErrorCode::EmptyDatabase: return "EmptyDatabase";
    case ErrorCode::InvalidSplit: return "InvalidSplit";
    case ErrorCode::UnknownChannel: return "UnknownChannel";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::MissingModule: return "MissingModule";
    case ErrorCode::RegionOverflow: return "RegionOverflow";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnresolvedReference: return "UnresolvedReference";
    case ErrorCode::UnknownQuery: return "UnknownQuery";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace weaves
