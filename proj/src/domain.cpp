#include "stagecraft/domain.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "stagecraft/error.hpp"
#include "stagecraft/text.hpp"

namespace stagecraft {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingField: return "MissingField";
        case ErrorCode::Parse: return "ParseError";
        case ErrorCode::Precondition: return "PreconditionError";
        case ErrorCode::Transport: return "TransportError";
        case ErrorCode::EmptyResponse: return "EmptyResponse";
        case ErrorCode::ReplayMiss: return "ReplayMiss";
        case ErrorCode::MissingRate: return "MissingRate";
        case ErrorCode::InfluenceParse: return "InfluenceParseError";
        case ErrorCode::BeliefParse: return "BeliefParseError";
        case ErrorCode::Adjudication: return "AdjudicationError";
        case ErrorCode::Crafting: return "CraftingError";
        case ErrorCode::Evaluation: return "EvaluationError";
        case ErrorCode::UndefinedStatistic: return "UndefinedStatistic";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::Lookup: return "LookupError";
        case ErrorCode::Memory: return "MemoryError";
        case ErrorCode::Selection: return "SelectionError";
        case ErrorCode::Io: return "IoError";
    }
    return "Error";
}

std::string_view to_string(Language lang) { return lang == Language::en ? "en" : "zh"; }
std::string_view to_string(Origin origin) { return origin == Origin::extracted ? "extracted" : "generated"; }

Language parse_language(std::string_view s) {
    if (s == "en") return Language::en;
    if (s == "zh") return Language::zh;
    throw Error(ErrorCode::Parse, "language must be en or zh, got '" + std::string(s) + "'");
}

Origin parse_origin(std::string_view s) {
    if (s == "extracted") return Origin::extracted;
    if (s == "generated") return Origin::generated;
    throw Error(ErrorCode::Parse, "origin must be extracted or generated, got '" + std::string(s) + "'");
}

std::string_view to_string(ActionKind kind) {
    switch (kind) {
        case ActionKind::act: return "act";
        case ActionKind::speak: return "speak";
        case ActionKind::react: return "react";
    }
    return "act";
}

ActionKind parse_action_kind(std::string_view s) {
    if (s == "act") return ActionKind::act;
    if (s == "speak") return ActionKind::speak;
    if (s == "react") return ActionKind::react;
    throw Error(ErrorCode::Parse, "unknown action kind '" + std::string(s) + "'");
}

const CharacterProfile* Scene::find(std::string_view name) const {
    auto it = std::find_if(characters.begin(), characters.end(), [&](const auto& c) { return c.name == name; });
    return it == characters.end() ? nullptr : &*it;
}

std::vector<std::string> Scene::names() const {
    std::vector<std::string> out;
    for (const auto& c : characters) out.push_back(c.name);
    return out;
}

std::string_view short_name(Metric m) {
    static constexpr std::array<std::string_view, kMetricCount> names = {"KA", "BA", "EE", "PT", "IM", "AD", "BC"};
    return names[static_cast<std::size_t>(m)];
}

std::string_view long_name(Metric m) {
    static constexpr std::array<std::string_view, kMetricCount> names = {
        "Knowledge Accuracy", "Behavioral Accuracy", "Emotional Expression", "Personality Traits",
        "Immersion",          "Adaptability",        "Behavioral Coherence"};
    return names[static_cast<std::size_t>(m)];
}

double MetricScores::mean() const {
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(kMetricCount);
}

void MetricScores::check_range() const {
    for (auto m : kAllMetrics) {
        double v = (*this)[m];
        if (!(v >= 1.0 && v <= 5.0)) {
            throw Error(ErrorCode::Parse, std::string(short_name(m)) + " score " + std::to_string(v) +
                                              " outside [1,5]");
        }
    }
}

std::vector<double> SceneQuality::available() const {
    std::vector<double> out;
    if (creativity) out.push_back(*creativity);
    out.push_back(coherence);
    out.push_back(conformity);
    out.push_back(detail);
    return out;
}

// --- validation -------------------------------------------------------------

std::string_view to_string(ViolationCode code) {
    switch (code) {
        case ViolationCode::EmptyField: return "EmptyField";
        case ViolationCode::EmptyName: return "EmptyName";
        case ViolationCode::DuplicateName: return "DuplicateName";
        case ViolationCode::NoCharacters: return "NoCharacters";
        case ViolationCode::CharacterCountWarning: return "CharacterCountWarning";
    }
    return "Violation";
}

std::vector<Violation> validate_scene(const Scene& scene) {
    std::vector<Violation> out;
    auto require = [&](const std::string& value, const std::string& field) {
        if (text::trim(value).empty()) out.push_back({ViolationCode::EmptyField, false, field});
    };
    require(scene.id, "id");
    require(scene.title, "title");
    require(scene.environment.time, "environment.time");
    require(scene.environment.location, "environment.location");
    require(scene.environment.description, "environment.description");

    if (scene.characters.empty()) out.push_back({ViolationCode::NoCharacters, false, "characters"});

    std::set<std::string> seen;
    for (std::size_t i = 0; i < scene.characters.size(); ++i) {
        const auto& c = scene.characters[i];
        const std::string at = "characters[" + std::to_string(i) + "]";
        if (text::trim(c.name).empty()) {
            out.push_back({ViolationCode::EmptyName, false, at + ".name"});
        } else if (!seen.insert(c.name).second) {
            out.push_back({ViolationCode::DuplicateName, false, c.name});
        }
    }

    const auto n = scene.characters.size();
    if (n > 0 && (n < 2 || n > 4)) {
        out.push_back({ViolationCode::CharacterCountWarning, true, std::to_string(n) + " characters"});
    }
    return out;
}

bool has_errors(const std::vector<Violation>& violations) {
    return std::any_of(violations.begin(), violations.end(), [](const auto& v) { return !v.warning; });
}

// --- serialization ----------------------------------------------------------

namespace {

std::string require_string(const Json& j, const std::string& key, const std::string& path) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::MissingField, where);
    const auto& v = j.at(key);
    if (!v.is_string()) throw Error(ErrorCode::Parse, where + " must be a string");
    return text::trim(v.get<std::string>());
}

double require_number(const Json& j, const std::string& key, const std::string& path) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::MissingField, where);
    const auto& v = j.at(key);
    if (!v.is_number()) throw Error(ErrorCode::Parse, where + " must be a number");
    return v.get<double>();
}

}  // namespace

Json to_json(const Environment& env) {
    return Json{{"time", env.time}, {"location", env.location}, {"description", env.description}};
}

Json to_json(const CharacterProfile& c) {
    return Json{{"name", c.name},
                {"role", c.role},
                {"profile", c.profile},
                {"position", c.position},
                {"state", c.state}};
}

Json to_json(const Scene& scene) {
    Json chars = Json::array();
    for (const auto& c : scene.characters) chars.push_back(to_json(c));
    return Json{{"id", scene.id},
                {"title", scene.title},
                {"language", to_string(scene.language)},
                {"origin", to_string(scene.origin)},
                {"environment", to_json(scene.environment)},
                {"characters", chars}};
}

Json to_json(const SelfBelief& b) {
    return Json{{"belief", b.belief}, {"desire", b.desire}, {"intention", b.intention}};
}

Json to_json(const EnvBelief& b) {
    return Json{{"perception_of_others", b.perception_of_others},
                {"understanding_of_scene", b.understanding_of_scene},
                {"influence_on_actions", b.influence_on_actions}};
}

Json to_json(const MetricScores& s) {
    Json j;
    for (auto m : kAllMetrics) j[text::to_lower_ascii(short_name(m))] = s[m];
    j["critique"] = s.critique;
    return j;
}

Json to_json(const SceneQuality& q) {
    Json j{{"coherence", q.coherence}, {"conformity", q.conformity}, {"detail", q.detail}};
    j["creativity"] = q.creativity ? Json(*q.creativity) : Json(nullptr);
    return j;
}

Environment environment_from_json(const Json& j, const std::string& path) {
    if (!j.is_object()) throw Error(ErrorCode::MissingField, path);
    return Environment{require_string(j, "time", path), require_string(j, "location", path),
                       require_string(j, "description", path)};
}

CharacterProfile character_from_json(const Json& j, const std::string& path) {
    return CharacterProfile{require_string(j, "name", path), require_string(j, "role", path),
                            require_string(j, "profile", path), require_string(j, "position", path),
                            require_string(j, "state", path)};
}

Scene scene_from_json(const Json& j) {
    Scene s;
    s.id = require_string(j, "id", "");
    s.title = require_string(j, "title", "");
    s.language = parse_language(require_string(j, "language", ""));
    s.origin = parse_origin(require_string(j, "origin", ""));
    if (!j.contains("environment")) throw Error(ErrorCode::MissingField, "environment");
    s.environment = environment_from_json(j.at("environment"), "environment");
    if (!j.contains("characters")) throw Error(ErrorCode::MissingField, "characters");
    const auto& chars = j.at("characters");
    if (!chars.is_array()) throw Error(ErrorCode::Parse, "characters must be a list");
    for (std::size_t i = 0; i < chars.size(); ++i) {
        s.characters.push_back(character_from_json(chars[i], "characters[" + std::to_string(i) + "]"));
    }
    return s;
}

MetricScores scores_from_json(const Json& j) {
    MetricScores s;
    for (auto m : kAllMetrics) s[m] = require_number(j, text::to_lower_ascii(short_name(m)), "scores");
    s.critique = j.value("critique", "");
    s.check_range();
    return s;
}

SceneQuality quality_from_json(const Json& j) {
    SceneQuality q;
    q.coherence = require_number(j, "coherence", "quality");
    q.conformity = require_number(j, "conformity", "quality");
    q.detail = require_number(j, "detail", "quality");
    if (j.contains("creativity") && !j.at("creativity").is_null()) q.creativity = j.at("creativity").get<double>();
    return q;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Scene load_scene(const std::filesystem::path& path) {
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }
    return scene_from_json(j);
}

void store_scene(const Scene& scene, const std::filesystem::path& path) {
    write_file(path, to_json(scene).dump(2) + "\n");
}

std::vector<Scene> load_scenes(const std::filesystem::path& path) {
    if (!std::filesystem::is_directory(path)) return {load_scene(path)};
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Scene> out;
    for (const auto& f : files) out.push_back(load_scene(f));
    return out;
}

Json step_record(const std::string& scene_id, const TrajectoryStep& step) {
    return Json{{"record", "step"},
                {"scene_id", scene_id},
                {"character", step.action.actor},
                {"round", step.action.round},
                {"seq", step.seq},
                {"observation", step.observation},
                {"action_kind", to_string(step.action.kind)},
                {"action_text", step.action.text},
                {"prompt", step.prompt}};
}

std::string trajectory_to_lines(const Trajectory& t) {
    std::string out = Json{{"record", "header"},
                           {"scene_id", t.scene_id},
                           {"character", to_json(t.character)},
                           {"environment", to_json(t.environment)}}
                          .dump() +
                      "\n";
    for (const auto& step : t.steps) out += step_record(t.scene_id, step).dump() + "\n";
    return out;
}

Trajectory trajectory_from_lines(std::string_view content) {
    Trajectory t;
    bool have_header = false;
    std::size_t lineno = 0;
    for (const auto& line : text::split(content, "\n")) {
        ++lineno;
        if (text::trim(line).empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            // A torn final line from an interrupted append is dropped.
            break;
        }
        const auto kind = j.value("record", "step");
        if (kind == "header") {
            t.scene_id = require_string(j, "scene_id", "header");
            t.character = character_from_json(j.at("character"), "header.character");
            t.environment = environment_from_json(j.at("environment"), "header.environment");
            have_header = true;
            continue;
        }
        TrajectoryStep step;
        step.action.actor = require_string(j, "character", "step");
        step.action.round = static_cast<int>(require_number(j, "round", "step"));
        step.seq = static_cast<std::int64_t>(require_number(j, "seq", "step"));
        step.observation = require_string(j, "observation", "step");
        step.action.kind = parse_action_kind(require_string(j, "action_kind", "step"));
        step.action.text = require_string(j, "action_text", "step");
        step.prompt = j.value("prompt", "");
        if (t.scene_id.empty()) t.scene_id = require_string(j, "scene_id", "step");
        t.steps.push_back(std::move(step));
    }
    if (!have_header && t.steps.empty()) throw Error(ErrorCode::Parse, "empty trajectory file");
    if (!have_header && !t.steps.empty()) t.character.name = t.steps.front().action.actor;
    return t;
}

void store_trajectory(const Trajectory& t, const std::filesystem::path& path) {
    write_file(path, trajectory_to_lines(t));
}

Trajectory load_trajectory(const std::filesystem::path& path) { return trajectory_from_lines(read_file(path)); }

}  // namespace stagecraft
