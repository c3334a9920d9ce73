#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stagecraft/domain.hpp"
#include "stagecraft/gateway.hpp"

namespace stagecraft {

enum class DraftStage { screenwriter, director };
std::string_view to_string(DraftStage s);

struct SceneDraft {
    Scene scene;
    DraftStage stage = DraftStage::screenwriter;
    std::optional<std::string> source_excerpt;  // extract mode only
    std::vector<Violation> warnings;
};

// A novel or script excerpt, or a synopsis, that scenes are crafted from.
struct SourceWork {
    std::string title;
    Language language = Language::en;
    std::string text;
};

// .json files hold {"title", "language", "text"}; anything else is plain text
// titled after the file stem.
SourceWork load_source(const std::filesystem::path& path);

// Parses a labeled scene block (Title/Time/Location/Description/Characters
// with "- Name: .. | Role: .. | Profile: .. | Position: .. | State: .." lines).
// With `complete` every environment and character field must be non-empty.
Scene parse_scene_block(std::string_view reply, bool complete);

std::string scene_id_for(const SourceWork& source, Origin origin, int index);

struct ForgeModels {
    std::string screenwriter;
    std::string director;
    std::string judge;
};

// `count` drafts numbered first_index, first_index+1, ... One call each.
// Throws RepairExhausted(Crafting) on unusable output.
std::vector<SceneDraft> screenwrite(Session& session, const std::string& model, const SourceWork& source,
                                    Origin mode, int count, int first_index = 1, int attempt = 1);
SceneDraft direct(Session& session, const std::string& model, const SceneDraft& draft);
// Creativity is requested and kept only for generated drafts.
// Throws RepairExhausted(Evaluation) on unusable output.
SceneQuality judge_scene(Session& session, const std::string& model, const SceneDraft& draft,
                         const std::string& source_text);

struct AcceptancePolicy {
    double min_mean = 3.5;
    double min_each = 3.0;
    int max_attempts = 3;

    bool accepts(const SceneQuality& q) const;
};

struct CraftConfig {
    std::vector<SourceWork> sources;
    int extract = 0;   // per source
    int generate = 0;  // per source
    ForgeModels models;
    AcceptancePolicy policy;
};

struct CraftAttempt {
    std::string scene_id;
    std::string title;
    Origin origin = Origin::extracted;
    int attempt = 1;
    bool accepted = false;
    std::optional<SceneQuality> quality;
    std::string error;
};

struct CraftReport {
    std::vector<CraftAttempt> attempts;
    int requested = 0;
    int accepted = 0;

    Json to_json() const;
};

struct CraftResult {
    std::vector<Scene> scenes;
    CraftReport report;
    UsageLedger ledger;
};

// Runs screenwriter -> director -> judge for every requested scene, retrying a
// rejected or failed draft up to policy.max_attempts times, then dropping it.
CraftResult craft(Gateway& gateway, const CraftConfig& config);

}  // namespace stagecraft
