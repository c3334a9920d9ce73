#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stagecraft {

enum class ErrorCode {
    MissingField,
    Parse,
    Precondition,
    Transport,
    EmptyResponse,
    ReplayMiss,
    MissingRate,
    InfluenceParse,
    BeliefParse,
    Adjudication,
    Crafting,
    Evaluation,
    UndefinedStatistic,
    InsufficientData,
    Lookup,
    Memory,
    Selection,
    Io,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace stagecraft
