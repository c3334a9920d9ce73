#pragma once

#include <string>
#include <vector>

#include "stagecraft/domain.hpp"

// Prompt templates for every model call. Each template exists in English and
// Chinese; the scene language selects which one is used.
namespace stagecraft::prompts {

inline constexpr int kVersion = 1;

// Request purposes, carried on ChatRequest::purpose.
namespace purpose {
inline constexpr const char* kAction = "character.action";
inline constexpr const char* kDialogue = "character.dialogue";
inline constexpr const char* kReaction = "character.reaction";
inline constexpr const char* kSelfBelief = "character.self_belief";
inline constexpr const char* kEnvBelief = "character.env_belief";
inline constexpr const char* kInfluence = "narrator.influence";
inline constexpr const char* kResult = "narrator.result";
inline constexpr const char* kUpdateCharacter = "narrator.update_character";
inline constexpr const char* kUpdateScene = "narrator.update_scene";
inline constexpr const char* kCritique = "judge.critique";
inline constexpr const char* kScore = "judge.score";
inline constexpr const char* kScreenwriteExtract = "forge.screenwrite.extract";
inline constexpr const char* kScreenwriteGenerate = "forge.screenwrite.generate";
inline constexpr const char* kDirect = "forge.direct";
inline constexpr const char* kJudgeScene = "forge.judge";
inline constexpr const char* kReflectCritique = "factory.critique";
inline constexpr const char* kReflectRewrite = "factory.rewrite";
}  // namespace purpose

// Everything a character prompt is assembled from.
struct CharacterContext {
    const CharacterProfile& profile;
    const SelfBelief& self_belief;
    const EnvBelief& env_belief;
    const Environment& environment;
    Language language;
};

std::string action(const CharacterContext& ctx, const std::string& observation);
std::string dialogue(const CharacterContext& ctx, const std::string& observation);
std::string reaction(const CharacterContext& ctx, const std::string& observation);
std::string self_belief(const CharacterContext& ctx, const std::string& observation);
std::string env_belief(const CharacterContext& ctx, const std::vector<CharacterProfile>& others);

// Observation shown before a planned action: setting plus recalled memories.
std::string observation_digest(const Environment& env, const std::vector<std::string>& memories, Language lang);

std::string influence(const Environment& env, const Action& action, const std::vector<CharacterProfile>& roster,
                      Language lang);
std::string result(const Environment& env, const Action& action, const Action& reaction,
                   const CharacterProfile& actor, const CharacterProfile& reactor, Language lang);
std::string update_character(const CharacterProfile& character, const std::string& observation, Language lang);
std::string update_scene(const Environment& env, const std::vector<std::string>& observations, Language lang);

std::string render_trajectory(const Trajectory& t, const std::string& title, Language lang);
std::string critique(const Trajectory& t, const std::string& title, Language lang);
std::string score(const Trajectory& t, const std::string& title, const std::string& critique, Language lang);

// attempt > 1 asks for a fresh take after a rejected draft.
std::string screenwrite(const std::string& source, const std::string& title, bool generate, int index,
                        Language lang, int attempt = 1);
std::string direct(const std::string& draft_block, const std::string& title, Language lang);
std::string judge_scene(const std::string& draft_block, const std::string& source, bool extracted, Language lang);
// Labeled block used to exchange scenes between crafting stages.
std::string scene_block(const Scene& scene);

inline constexpr const char* kKeepMarker = "[KEEP]";
std::string reflect_critique(const Trajectory& t, const std::string& title, Language lang);
std::string reflect_rewrite(const Trajectory& t, const std::string& critique, std::size_t step, Language lang);

// Terse format reminders appended on a repair attempt.
namespace reminder {
std::string influence(Language lang);
std::string position_state(Language lang);
std::string scene_fields(Language lang);
std::string self_belief(Language lang);
std::string env_belief(Language lang);
std::string scores(Language lang);
std::string scene_quality(bool extracted, Language lang);
std::string scene_block(Language lang);
std::string no_repeat(Language lang);
std::string non_empty(Language lang);
std::string rewrite(Language lang);
}  // namespace reminder

}  // namespace stagecraft::prompts
