#pragma once

#include <string>
#include <vector>

#include "stagecraft/gateway.hpp"

namespace stagecraft {

// Offline stand-in for a chat model. Replies are rule-based and depend only on
// the request (model id, purpose and prompt), so identical requests always get
// identical replies. Holds no state; safe to share across threads.
class SimulatedBackend : public Backend {
public:
    SimulatedBackend() = default;
    ChatResponse chat(const ChatRequest& request) override;
    std::vector<double> embed(const std::string& text) override { return hash_embedding(text); }
};

}  // namespace stagecraft
