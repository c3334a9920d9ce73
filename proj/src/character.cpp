#include "stagecraft/character.hpp"

#include <algorithm>
#include <cmath>

#include "stagecraft/error.hpp"
#include "stagecraft/parse.hpp"
#include "stagecraft/prompts.hpp"
#include "stagecraft/text.hpp"

namespace stagecraft {

CharacterState initial_state(const CharacterProfile& profile) {
    CharacterState s;
    s.profile = profile;
    s.self_belief.belief = profile.profile;
    return s;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) return 0.0;
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

void remember(CharacterState& state, Session& session, const std::string& text, int round, std::int64_t seq) {
    if (text::trim(text).empty()) throw Error(ErrorCode::Precondition, "cannot remember empty text");
    if (!state.memory.empty()) {
        const auto& last = state.memory.back();
        if (round < last.round || (round == last.round && seq <= last.seq)) {
            throw Error(ErrorCode::Memory, "memory (round, seq) must increase for " + state.profile.name);
        }
    }
    std::vector<double> embedding;
    try {
        embedding = session.embed(text);
    } catch (const Error& e) {
        throw Error(ErrorCode::Memory, std::string("embedding failed: ") + e.what());
    }
    state.memory.push_back(MemoryEntry{text, std::move(embedding), round, seq});
}

std::vector<ScoredMemory> recall(const std::vector<MemoryEntry>& memory, const std::vector<double>& query, int k) {
    if (k <= 0 || memory.empty()) return {};
    std::vector<ScoredMemory> scored;
    scored.reserve(memory.size());
    for (const auto& e : memory) scored.push_back({e, cosine(query, e.embedding)});
    auto better = [](const ScoredMemory& a, const ScoredMemory& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.entry.round != b.entry.round) return a.entry.round > b.entry.round;
        return a.entry.seq > b.entry.seq;
    };
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);
    scored.resize(take);
    return scored;
}

std::vector<ScoredMemory> recall(const CharacterState& state, Session& session, const std::string& query, int k) {
    if (k <= 0 || state.memory.empty() || text::trim(query).empty()) return {};
    return recall(state.memory, session.embed(query), k);
}

ActionKind classify_action(const std::string& text) {
    return text::quoted_fraction(text) > 0.5 ? ActionKind::speak : ActionKind::act;
}

CharacterAgent::CharacterAgent(const CharacterProfile& profile, std::string model_id, Language language,
                               Session& session)
    : state_(initial_state(profile)), model_id_(std::move(model_id)), language_(language), session_(&session) {}

void CharacterAgent::remember(const std::string& text, int round, std::int64_t seq) {
    stagecraft::remember(state_, *session_, text, round, seq);
}

std::vector<ScoredMemory> CharacterAgent::recall(const std::string& query, int k) const {
    return stagecraft::recall(state_, *session_, query, k);
}

Turn CharacterAgent::produce(const char* purpose, const std::string& prompt, const std::string& observation,
                             ActionKind forced, bool classify, int round, std::int64_t seq) {
    auto request = ChatRequest::user(model_id_, prompt, kDefaultTemperature, purpose);
    auto result = complete_with_repair(*session_, request, RoleTag::character, prompts::reminder::non_empty(language_),
                                       ErrorCode::Parse, [](const std::string& reply) {
                                           auto t = text::trim(reply);
                                           if (t.empty()) throw Error(ErrorCode::Parse, "empty action");
                                           return t;
                                       });
    Turn turn;
    turn.action.actor = state_.profile.name;
    turn.action.text = result.value;
    turn.action.round = round;
    turn.action.kind = classify ? classify_action(result.value) : forced;
    turn.observation = observation;
    turn.prompt = prompt;
    turn.attempts = result.attempts;
    remember(state_.profile.name + ": " + turn.action.text, round, seq);
    return turn;
}

namespace {

prompts::CharacterContext context_of(const CharacterState& s, const Environment& env, Language lang) {
    return prompts::CharacterContext{s.profile, s.self_belief, s.env_belief, env, lang};
}

}  // namespace

Turn CharacterAgent::plan_action(const Environment& env, const std::string& observation, int round,
                                 std::int64_t seq) {
    auto prompt = prompts::action(context_of(state_, env, language_), observation);
    return produce(prompts::purpose::kAction, prompt, observation, ActionKind::act, true, round, seq);
}

Turn CharacterAgent::speak(const Environment& env, const std::string& observation, int round, std::int64_t seq) {
    auto prompt = prompts::dialogue(context_of(state_, env, language_), observation);
    return produce(prompts::purpose::kDialogue, prompt, observation, ActionKind::speak, false, round, seq);
}

Turn CharacterAgent::react(const Environment& env, const Influence& influence, int round, std::int64_t seq) {
    if (influence.target != state_.profile.name) {
        throw Error(ErrorCode::Precondition,
                    "influence targets '" + influence.target + "', not '" + state_.profile.name + "'");
    }
    if (!influence.has_responder()) {
        throw Error(ErrorCode::Precondition, "a character cannot react to its own no-responder action");
    }
    auto prompt = prompts::reaction(context_of(state_, env, language_), influence.impact);
    return produce(prompts::purpose::kReaction, prompt, influence.impact, ActionKind::react, false, round, seq);
}

Repaired<SelfBelief> CharacterAgent::update_self_belief(const Environment& env, const std::string& observation) {
    auto request = ChatRequest::user(model_id_, prompts::self_belief(context_of(state_, env, language_), observation),
                                     kDefaultTemperature, prompts::purpose::kSelfBelief);
    auto result = complete_with_repair(*session_, request, RoleTag::character,
                                       prompts::reminder::self_belief(language_), ErrorCode::BeliefParse,
                                       [](const std::string& reply) { return parse::self_belief(reply); });
    state_.self_belief = result.value;
    return result;
}

Repaired<EnvBelief> CharacterAgent::update_env_belief(const Environment& env,
                                                      const std::vector<CharacterProfile>& others) {
    std::vector<CharacterProfile> filtered;
    for (const auto& o : others) {
        if (o.name != state_.profile.name) filtered.push_back(o);
    }
    auto request = ChatRequest::user(model_id_, prompts::env_belief(context_of(state_, env, language_), filtered),
                                     kDefaultTemperature, prompts::purpose::kEnvBelief);
    auto result = complete_with_repair(*session_, request, RoleTag::character,
                                       prompts::reminder::env_belief(language_), ErrorCode::BeliefParse,
                                       [](const std::string& reply) { return parse::env_belief(reply); });
    state_.env_belief = result.value;
    return result;
}

void CharacterAgent::set_position_state(std::string position, std::string state) {
    state_.profile.position = std::move(position);
    state_.profile.state = std::move(state);
}

}  // namespace stagecraft
