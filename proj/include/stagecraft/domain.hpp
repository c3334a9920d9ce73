#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace stagecraft {

using Json = nlohmann::json;

enum class Language { en, zh };
enum class Origin { extracted, generated };

std::string_view to_string(Language lang);
std::string_view to_string(Origin origin);
Language parse_language(std::string_view s);
Origin parse_origin(std::string_view s);

struct Environment {
    std::string time;
    std::string location;
    std::string description;

    bool operator==(const Environment&) const = default;
};

struct CharacterProfile {
    std::string name;
    std::string role;
    std::string profile;
    std::string position;
    std::string state;

    bool operator==(const CharacterProfile&) const = default;
};

// Belief-desire-intention view a character holds of itself.
struct SelfBelief {
    std::string belief;
    std::string desire;
    std::string intention;

    bool operator==(const SelfBelief&) const = default;
    bool complete() const { return !belief.empty() && !desire.empty() && !intention.empty(); }
};

struct EnvBelief {
    std::string perception_of_others;
    std::string understanding_of_scene;
    std::string influence_on_actions;

    bool operator==(const EnvBelief&) const = default;
    bool complete() const {
        return !perception_of_others.empty() && !understanding_of_scene.empty() && !influence_on_actions.empty();
    }
};

struct Scene {
    std::string id;
    std::string title;
    Language language = Language::en;
    Origin origin = Origin::extracted;
    Environment environment;
    std::vector<CharacterProfile> characters;

    bool operator==(const Scene&) const = default;

    const CharacterProfile* find(std::string_view name) const;
    std::vector<std::string> names() const;
};

enum class ActionKind { act, speak, react };
std::string_view to_string(ActionKind kind);
ActionKind parse_action_kind(std::string_view s);

struct Action {
    std::string actor;
    ActionKind kind = ActionKind::act;
    std::string text;
    int round = 1;

    bool operator==(const Action&) const = default;
};

// target == actor means nobody responds.
struct Influence {
    std::string actor;
    std::string target;
    std::string impact;

    bool operator==(const Influence&) const = default;
    bool has_responder() const { return target != actor; }
};

struct InteractionResult {
    std::string text;
    bool operator==(const InteractionResult&) const = default;
};

struct TrajectoryStep {
    std::string observation;
    Action action;
    std::int64_t seq = 0;
    // Exact character prompt the action answered; empty for hand-built steps.
    std::string prompt;

    bool operator==(const TrajectoryStep&) const = default;
};

struct Trajectory {
    std::string scene_id;
    CharacterProfile character;
    Environment environment;
    std::vector<TrajectoryStep> steps;

    bool operator==(const Trajectory&) const = default;
    std::string id() const { return scene_id + "/" + character.name; }
};

enum class Metric { KA, BA, EE, PT, IM, AD, BC };
inline constexpr std::size_t kMetricCount = 7;
inline constexpr std::array<Metric, kMetricCount> kAllMetrics = {Metric::KA, Metric::BA, Metric::EE, Metric::PT,
                                                                  Metric::IM, Metric::AD, Metric::BC};
std::string_view short_name(Metric m);
std::string_view long_name(Metric m);

struct MetricScores {
    std::array<double, kMetricCount> values{};
    std::string critique;

    double operator[](Metric m) const { return values[static_cast<std::size_t>(m)]; }
    double& operator[](Metric m) { return values[static_cast<std::size_t>(m)]; }
    double mean() const;
    bool operator==(const MetricScores&) const = default;

    // Throws Error(Parse) when any value lies outside [1,5].
    void check_range() const;
};

struct SceneQuality {
    std::optional<double> creativity;
    double coherence = 0;
    double conformity = 0;
    double detail = 0;

    bool operator==(const SceneQuality&) const = default;
    std::vector<double> available() const;
};

// --- validation -------------------------------------------------------------

enum class ViolationCode { EmptyField, EmptyName, DuplicateName, NoCharacters, CharacterCountWarning };
std::string_view to_string(ViolationCode code);

struct Violation {
    ViolationCode code;
    bool warning = false;
    std::string detail;
};

std::vector<Violation> validate_scene(const Scene& scene);
bool has_errors(const std::vector<Violation>& violations);

// --- serialization ----------------------------------------------------------

Json to_json(const Environment& env);
Json to_json(const CharacterProfile& c);
Json to_json(const Scene& scene);
Json to_json(const SelfBelief& b);
Json to_json(const EnvBelief& b);
Json to_json(const MetricScores& s);
Json to_json(const SceneQuality& q);

// Parsers throw Error(MissingField) naming the dotted path of the absent key.
Environment environment_from_json(const Json& j, const std::string& path = "environment");
CharacterProfile character_from_json(const Json& j, const std::string& path = "character");
Scene scene_from_json(const Json& j);
MetricScores scores_from_json(const Json& j);
SceneQuality quality_from_json(const Json& j);

Scene load_scene(const std::filesystem::path& path);
void store_scene(const Scene& scene, const std::filesystem::path& path);
// Loads a single file, or every *.json in a directory sorted by filename.
std::vector<Scene> load_scenes(const std::filesystem::path& path);

// Trajectory files hold one header record followed by one record per step.
std::string trajectory_to_lines(const Trajectory& t);
Trajectory trajectory_from_lines(std::string_view text);
void store_trajectory(const Trajectory& t, const std::filesystem::path& path);
Trajectory load_trajectory(const std::filesystem::path& path);
Json step_record(const std::string& scene_id, const TrajectoryStep& step);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace stagecraft
