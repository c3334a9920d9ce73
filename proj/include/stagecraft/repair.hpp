#pragma once

#include <string>
#include <utility>

#include "stagecraft/error.hpp"
#include "stagecraft/gateway.hpp"

namespace stagecraft {

inline constexpr int kMaxParseAttempts = 3;

template <typename T>
struct Repaired {
    T value;
    std::string raw;  // reply the value was parsed from
    int attempts = 1;
};

// Reports how many model calls a failed repair loop consumed.
class RepairExhausted : public Error {
public:
    RepairExhausted(ErrorCode code, const std::string& message, int attempts)
        : Error(code, message), attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

// Sends `request`; when `parse` rejects the reply (Error(Parse) or an empty
// completion) the original prompt is re-sent with `reminder` appended, up to
// kMaxParseAttempts calls in total. Transport failures propagate unchanged.
template <typename Parser>
auto complete_with_repair(Session& session, const ChatRequest& request, RoleTag role, const std::string& reminder,
                          ErrorCode failure, Parser&& parse, int max_attempts = kMaxParseAttempts)
    -> Repaired<decltype(parse(std::string{}))> {
    std::string last_reason;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        ChatRequest req = request;
        if (attempt > 1) req.messages.back().content += "\n\n" + reminder;
        try {
            auto reply = session.complete(req, role).content;
            auto value = parse(reply);
            return {std::move(value), std::move(reply), attempt};
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Parse && e.code() != ErrorCode::EmptyResponse) throw;
            last_reason = e.what();
        }
    }
    throw RepairExhausted(failure, request.purpose + " failed after " + std::to_string(max_attempts) +
                                       " attempts: " + last_reason,
                          max_attempts);
}

}  // namespace stagecraft
