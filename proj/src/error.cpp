#include "geobim/error.hpp"

namespace geobim {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingHeader: return "MissingHeader";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DanglingReference: return "DanglingReference";
    case ErrorCode::NoLengthUnit: return "NoLengthUnit";
    case ErrorCode::NoBuilding: return "NoBuilding";
    case ErrorCode::CyclicPlacement: return "CyclicPlacement";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::EmptyModel: return "EmptyModel";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::NoStoreys: return "NoStoreys";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::EmptyCut: return "EmptyCut";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::NoTopPart: return "NoTopPart";
    case ErrorCode::NoVertices: return "NoVertices";
    case ErrorCode::NoGeoreference: return "NoGeoreference";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::UnknownStorey: return "UnknownStorey";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace geobim
