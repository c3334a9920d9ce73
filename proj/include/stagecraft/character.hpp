#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stagecraft/domain.hpp"
#include "stagecraft/gateway.hpp"
#include "stagecraft/repair.hpp"

namespace stagecraft {

inline constexpr int kDefaultRecallK = 5;

struct MemoryEntry {
    std::string text;
    std::vector<double> embedding;
    int round = 0;
    std::int64_t seq = 0;
};

struct CharacterState {
    CharacterProfile profile;
    SelfBelief self_belief;
    EnvBelief env_belief;
    std::vector<MemoryEntry> memory;
};

// Round-1 beliefs: belief seeded from the profile text, the rest empty.
CharacterState initial_state(const CharacterProfile& profile);

struct ScoredMemory {
    MemoryEntry entry;
    double score = 0.0;
};

double cosine(const std::vector<double>& a, const std::vector<double>& b);

// Appends one entry. Throws Error(Precondition) on empty text, Error(Memory)
// when embedding fails or (round, seq) does not increase.
void remember(CharacterState& state, Session& session, const std::string& text, int round, std::int64_t seq);

// Top-k by cosine similarity; ties go to the more recent entry (higher round,
// then higher seq). Never mutates the state.
std::vector<ScoredMemory> recall(const std::vector<MemoryEntry>& memory, const std::vector<double>& query, int k);
std::vector<ScoredMemory> recall(const CharacterState& state, Session& session, const std::string& query, int k);

// A produced action together with the exact prompt and observation behind it.
struct Turn {
    Action action;
    std::string observation;
    std::string prompt;
    int attempts = 1;
};

// Action text that is mostly quoted speech is recorded as speak.
ActionKind classify_action(const std::string& text);

class CharacterAgent {
public:
    CharacterAgent(const CharacterProfile& profile, std::string model_id, Language language, Session& session);

    const CharacterState& state() const { return state_; }
    const CharacterProfile& profile() const { return state_.profile; }
    const std::string& model_id() const { return model_id_; }

    void remember(const std::string& text, int round, std::int64_t seq);
    std::vector<ScoredMemory> recall(const std::string& query, int k = kDefaultRecallK) const;

    Turn plan_action(const Environment& env, const std::string& observation, int round, std::int64_t seq);
    Turn speak(const Environment& env, const std::string& observation, int round, std::int64_t seq);
    // Throws Error(Precondition) unless the influence targets this character
    // and comes from someone else.
    Turn react(const Environment& env, const Influence& influence, int round, std::int64_t seq);

    Repaired<SelfBelief> update_self_belief(const Environment& env, const std::string& observation);
    // `others` is filtered to exclude this character before prompting.
    Repaired<EnvBelief> update_env_belief(const Environment& env, const std::vector<CharacterProfile>& others);

    void set_position_state(std::string position, std::string state);

private:
    Turn produce(const char* purpose, const std::string& prompt, const std::string& observation, ActionKind forced,
                 bool classify, int round, std::int64_t seq);

    CharacterState state_;
    std::string model_id_;
    Language language_;
    Session* session_;
};

}  // namespace stagecraft
