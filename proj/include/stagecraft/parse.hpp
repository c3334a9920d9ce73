#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stagecraft/domain.hpp"

// Parsers for structured model replies. All of them throw Error(Parse) with a
// reason on malformed input; the repair loop turns that into a reprompt.
namespace stagecraft::parse {

// Exact match after stripping brackets and whitespace, then case-insensitive,
// then a unique substring match in either direction. Ambiguity yields nullopt.
std::optional<std::string> match_roster_name(std::string_view candidate, const std::vector<std::string>& roster);

// "[Actor];;[Target Name];;[Impact]". The actor field is informational; the
// influence always carries `actor`. target == actor means no responder.
Influence influence(std::string_view reply, const std::string& actor, const std::vector<std::string>& roster);

struct PositionState {
    std::string position;
    std::string state;
};
PositionState position_state(std::string_view reply);

// All three fields must be present and non-empty.
Environment scene_fields(std::string_view reply);

SelfBelief self_belief(std::string_view reply);
EnvBelief env_belief(std::string_view reply);

// Seven labeled metric lines; integers or halves in [1,5].
MetricScores metric_scores(std::string_view reply);

// Coherence/Conformity/Detail always; Creativity only when !extracted (and
// dropped if an extracted draft gets one anyway).
SceneQuality scene_quality(std::string_view reply, bool extracted);

// nullopt for the keep marker; throws on a reply with neither form.
std::optional<std::string> rewrite(std::string_view reply);

// Score must be within [1,5] and a multiple of 0.5.
bool valid_score(double v);

}  // namespace stagecraft::parse
