#include "stagecraft/narrator.hpp"

#include <algorithm>

#include "stagecraft/error.hpp"
#include "stagecraft/prompts.hpp"
#include "stagecraft/text.hpp"

namespace stagecraft {

Narrator::Narrator(Session& session, std::string model_id, Language language)
    : session_(&session), model_id_(std::move(model_id)), language_(language) {}

Repaired<Influence> Narrator::analyze_influence(const Environment& env, const Action& action,
                                                const std::vector<CharacterProfile>& characters) {
    std::vector<std::string> roster;
    for (const auto& c : characters) roster.push_back(c.name);
    if (std::find(roster.begin(), roster.end(), action.actor) == roster.end()) {
        throw Error(ErrorCode::Precondition, "actor '" + action.actor + "' is not in the roster");
    }
    auto request = ChatRequest::user(model_id_, prompts::influence(env, action, characters, language_),
                                     kDefaultTemperature, prompts::purpose::kInfluence);
    return complete_with_repair(*session_, request, RoleTag::narrator, prompts::reminder::influence(language_),
                                ErrorCode::InfluenceParse, [&](const std::string& reply) {
                                    return parse::influence(reply, action.actor, roster);
                                });
}

Repaired<InteractionResult> Narrator::adjudicate(const Environment& env, const Action& action, const Action& reaction,
                                                 const CharacterProfile& actor, const CharacterProfile& reactor) {
    if (reaction.kind != ActionKind::react || reaction.actor == action.actor) {
        throw Error(ErrorCode::Precondition, "adjudication needs a reaction by a different character");
    }
    auto request = ChatRequest::user(model_id_, prompts::result(env, action, reaction, actor, reactor, language_),
                                     kDefaultTemperature, prompts::purpose::kResult);
    return complete_with_repair(
        *session_, request, RoleTag::narrator, prompts::reminder::no_repeat(language_), ErrorCode::Adjudication,
        [&](const std::string& reply) {
            auto t = text::trim(reply);
            if (t.empty()) throw Error(ErrorCode::Parse, "empty outcome");
            if (t.find(action.text) != std::string::npos || t.find(reaction.text) != std::string::npos) {
                throw Error(ErrorCode::Parse, "outcome repeats an action verbatim");
            }
            return InteractionResult{t};
        });
}

Repaired<parse::PositionState> Narrator::update_character(const CharacterProfile& character,
                                                          const std::string& observation) {
    if (text::trim(observation).empty()) throw Error(ErrorCode::Precondition, "empty observation");
    auto request = ChatRequest::user(model_id_, prompts::update_character(character, observation, language_),
                                     kDefaultTemperature, prompts::purpose::kUpdateCharacter);
    return complete_with_repair(*session_, request, RoleTag::narrator, prompts::reminder::position_state(language_),
                                ErrorCode::Parse,
                                [](const std::string& reply) { return parse::position_state(reply); });
}

EnvironmentUpdate Narrator::update_environment(const Environment& env, const std::vector<std::string>& observations) {
    EnvironmentUpdate out{env, false, false, 0, ""};
    if (observations.empty()) {
        out.skipped = true;
        return out;
    }
    auto request = ChatRequest::user(model_id_, prompts::update_scene(env, observations, language_),
                                     kDefaultTemperature, prompts::purpose::kUpdateScene);
    try {
        auto r = complete_with_repair(*session_, request, RoleTag::narrator, prompts::reminder::scene_fields(language_),
                                      ErrorCode::Parse,
                                      [](const std::string& reply) { return parse::scene_fields(reply); });
        out.environment = r.value;
        out.attempts = r.attempts;
    } catch (const RepairExhausted& e) {
        out.failed = true;
        out.attempts = e.attempts();
        out.warning = e.what();
    }
    return out;
}

}  // namespace stagecraft
