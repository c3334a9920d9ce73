#pragma once

#include <string>
#include <vector>

#include "stagecraft/domain.hpp"
#include "stagecraft/gateway.hpp"
#include "stagecraft/parse.hpp"
#include "stagecraft/repair.hpp"

namespace stagecraft {

struct EnvironmentUpdate {
    Environment environment;
    bool skipped = false;  // no observations, no model call
    bool failed = false;   // reply unusable; environment kept unchanged
    int attempts = 0;
    std::string warning;
};

// The objective world model. Stateless between calls; every call is tagged
// "narrator" in the session ledger.
class Narrator {
public:
    Narrator(Session& session, std::string model_id, Language language);

    // Throws RepairExhausted(InfluenceParse) when no usable verdict arrives.
    Repaired<Influence> analyze_influence(const Environment& env, const Action& action,
                                          const std::vector<CharacterProfile>& characters);

    // Throws RepairExhausted(Adjudication) on empty output or when the outcome
    // keeps repeating an action verbatim.
    Repaired<InteractionResult> adjudicate(const Environment& env, const Action& action, const Action& reaction,
                                           const CharacterProfile& actor, const CharacterProfile& reactor);

    Repaired<parse::PositionState> update_character(const CharacterProfile& character, const std::string& observation);

    // Fail-open: a bad reply leaves the environment untouched.
    EnvironmentUpdate update_environment(const Environment& env, const std::vector<std::string>& observations);

    const std::string& model_id() const { return model_id_; }

private:
    Session* session_;
    std::string model_id_;
    Language language_;
};

}  // namespace stagecraft
