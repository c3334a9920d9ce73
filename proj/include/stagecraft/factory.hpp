#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stagecraft/engine.hpp"
#include "stagecraft/evaluator.hpp"

namespace stagecraft {

enum class SftSource { guided, reflective };
std::string_view to_string(SftSource s);
SftSource parse_sft_source(std::string_view s);

struct SftExample {
    std::string instruction;
    std::string response;
    std::string scene_id;
    std::string character;
    SftSource source = SftSource::guided;
    std::string teacher;
    Language language = Language::en;
    int round = 0;
    std::int64_t seq = 0;

    bool operator==(const SftExample&) const = default;
};

Json to_json(const SftExample& e);
SftExample example_from_json(const Json& j);

// A trajectory together with the model that played it.
struct SourcedTrajectory {
    Trajectory trajectory;
    std::string model;
    Language language = Language::en;
    std::string title;
};

struct TeacherChoice {
    Language language = Language::en;
    std::string model;
    double average = 0.0;
};

struct GuidedPolicy {
    std::optional<double> min_mean;  // per-trajectory seven-metric mean
};

struct GuidedSelection {
    std::vector<TeacherChoice> teachers;  // one per language present in the records
    std::vector<SourcedTrajectory> trajectories;
};

// Top model by Average per language; ties go to the lexicographically
// smallest model id. Throws Error(Selection) when there are no records.
std::vector<TeacherChoice> rank_teachers(const std::vector<EvaluationRecord>& records);
GuidedSelection select_guided(const std::vector<EvaluationRecord>& records, const std::vector<StoredRun>& runs,
                              const GuidedPolicy& policy = {});

// One example per step. The instruction is the exact prompt the step's action
// answered; steps without a stored prompt get the action template rebuilt.
std::vector<SftExample> build_sft(const SourcedTrajectory& t, SftSource source);

struct ReflectiveResult {
    SourcedTrajectory rewritten;
    std::vector<std::size_t> changed;  // step indices whose action was replaced
    std::vector<std::size_t> flagged;  // step indices kept because the rewrite was unusable
    std::string critique;
};

// Self-critique once, then one rewrite call per step. Observations, prompts
// and step count are preserved; only action texts may change.
ReflectiveResult reflective_rewrite(Session& session, const SourcedTrajectory& t);

// Trajectories from completed runs played by `model` (all models when empty).
std::vector<SourcedTrajectory> trajectories_played_by(const std::vector<StoredRun>& runs, const std::string& model);

// Writes one JSON object per line and returns the manifest (also written next
// to the dataset as <path>.manifest.json). Throws Error(Precondition) when empty.
Json export_dataset(const std::vector<SftExample>& examples, const std::filesystem::path& path);
std::vector<SftExample> parse_dataset(std::string_view text);
Json dataset_manifest(const std::vector<SftExample>& examples);

}  // namespace stagecraft
