#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace advdist {

/// Machine-readable failure categories shared by every module.
enum class ErrorCode {
    InvalidArgument,
    MissingFile,
    ParseError,
    RaggedRow,
    EmptyDataset,
    NoLabels,
    SingleClass,
    SubsetTooLarge,
    DimensionMismatch,
    EmptyVector,
    ProcessSpawnError,
    ProtocolError,
    Timeout,
    TooFewPoints,
    NonPositiveResponseForLog,
    TooFewFlipped,
    DegenerateConfidence,
    BudgetExceedsPool,
    EmptyInput,
    InsufficientEligiblePool,
    IoError,
};

[[nodiscard]] std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

/// Raised by load_csv with the 1-based data row and the offending column name.
class ParseError : public Error {
  public:
    ParseError(std::size_t row, std::string column, const std::string& detail);

    [[nodiscard]] std::size_t row() const noexcept { return row_; }
    [[nodiscard]] const std::string& column() const noexcept { return column_; }

  private:
    std::size_t row_;
    std::string column_;
};

/// Protocol violation from an external classifier; carries the offending reply line.
class ProtocolError : public Error {
  public:
    ProtocolError(std::string line, const std::string& detail);

    [[nodiscard]] const std::string& line() const noexcept { return line_; }

  private:
    std::string line_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) {
        fail(code, message);
    }
}

}  // namespace advdist
