#include "sybiledge/error.hpp"

namespace sybiledge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::NodeOutOfRange: return "NodeOutOfRange";
    case ErrorCode::NonBinaryLabel: return "NonBinaryLabel";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::Underflow: return "Underflow";
    case ErrorCode::EmptySeedSet: return "EmptySeedSet";
    case ErrorCode::DegenerateSequence: return "DegenerateSequence";
    case ErrorCode::InsufficientTargets: return "InsufficientTargets";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingKey: return "MissingKey";
  }
  return "Unknown";
}

}  // namespace sybiledge
