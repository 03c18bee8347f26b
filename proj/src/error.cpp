#include "advdist/error.hpp"

namespace advdist {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::RaggedRow: return "RaggedRow";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::NoLabels: return "NoLabels";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::SubsetTooLarge: return "SubsetTooLarge";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyVector: return "EmptyVector";
        case ErrorCode::ProcessSpawnError: return "ProcessSpawnError";
        case ErrorCode::ProtocolError: return "ProtocolError";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::NonPositiveResponseForLog: return "NonPositiveResponseForLog";
        case ErrorCode::TooFewFlipped: return "TooFewFlipped";
        case ErrorCode::DegenerateConfidence: return "DegenerateConfidence";
        case ErrorCode::BudgetExceedsPool: return "BudgetExceedsPool";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::InsufficientEligiblePool: return "InsufficientEligiblePool";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

ParseError::ParseError(std::size_t row, std::string column, const std::string& detail)
    : Error(ErrorCode::ParseError,
            "parse error at row " + std::to_string(row) + ", column " + column + ": " + detail),
      row_(row),
      column_(std::move(column)) {}

ProtocolError::ProtocolError(std::string line, const std::string& detail)
    : Error(ErrorCode::ProtocolError, "protocol error: " + detail + " (reply: '" + line + "')"),
      line_(std::move(line)) {}

void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace advdist
