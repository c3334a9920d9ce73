#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stagecraft/character.hpp"
#include "stagecraft/domain.hpp"
#include "stagecraft/gateway.hpp"

namespace stagecraft {

inline constexpr int kDefaultRounds = 3;

enum class EventKind { action, influence, reaction, result, state_update, env_update, self_belief, env_belief };
std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view s);

// One entry of a run's totally ordered event log. Fields not meaningful for a
// kind stay empty.
struct Event {
    std::int64_t seq = 0;
    int round = 0;
    EventKind kind = EventKind::action;
    std::string actor;
    std::string target;       // influence: affected character (== actor for no responder)
    std::string text;         // action/reaction text, impact, outcome
    std::string observation;  // action/reaction: what the character saw
    std::string prompt;       // action/reaction: exact prompt sent
    ActionKind action_kind = ActionKind::act;
    std::string position;  // state_update
    std::string state;     // state_update
    std::optional<Environment> environment;
    std::optional<SelfBelief> self_belief;
    std::optional<EnvBelief> env_belief;
    int attempts = 0;       // model calls spent on this event
    bool fallback = false;  // influence: verdict unusable, treated as no responder
    bool skipped = false;   // env_update: nothing to apply
    bool failed = false;    // env_update: reply unusable, environment kept
    std::string note;

    bool operator==(const Event&) const = default;
};

Json to_json(const Event& e);
Event event_from_json(const Json& j);

struct RunConfig {
    // Character name -> model id. `default_model` covers unlisted names.
    std::map<std::string, std::string> cast;
    std::string default_model;
    std::string narrator_model;
    int rounds = kDefaultRounds;
    int recall_k = kDefaultRecallK;
    std::string seed;  // replay-script identifier, recorded in the manifest

    std::string model_for(const std::string& name) const;
};

enum class RunStatus { completed, failed };
std::string_view to_string(RunStatus s);

struct SceneRun {
    Scene scene;
    RunConfig config;
    std::vector<Event> events;
    std::map<std::string, Trajectory> trajectories;
    UsageLedger ledger;
    RunStatus status = RunStatus::completed;
    std::string error;
    Environment final_environment;
    std::vector<CharacterState> final_states;
};

// Executes the round loop. Preconditions (valid scene, cast names in the
// roster, rounds >= 1) throw Error(Precondition); failures during the run are
// captured in the returned SceneRun with status failed. When `out_dir` is set,
// events are appended there as they happen and the full tree is written at the end.
SceneRun run_scene(Gateway& gateway, const Scene& scene, const RunConfig& config,
                   const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Projection of the event log onto one character: its actions and reactions
// in event order. Throws Error(Lookup) for an unknown name.
Trajectory extract_trajectory(const SceneRun& run, const std::string& name);
Trajectory project_trajectory(const Scene& scene, const std::vector<Event>& events, const std::string& name);

struct BatchEntry {
    std::string scene_id;
    RunStatus status = RunStatus::completed;
    std::string error;
};

// Independent runs, up to `parallelism` at a time. Output for scene s goes to
// out_dir/<s.id>; a batch manifest lists every entry.
std::vector<SceneRun> run_batch(Gateway& gateway, const std::vector<Scene>& scenes, const RunConfig& config,
                                int parallelism, const std::optional<std::filesystem::path>& out_dir = std::nullopt);

void write_run(const SceneRun& run, const std::filesystem::path& dir);
Json run_manifest(const SceneRun& run);
std::string events_to_lines(const std::vector<Event>& events);
std::string trajectory_file_name(const std::string& character);

// A run directory as read back from disk.
struct StoredRun {
    std::filesystem::path dir;
    Scene scene;
    Json manifest;
    std::vector<Event> events;
    std::vector<Trajectory> trajectories;
    UsageLedger ledger;

    bool completed() const { return manifest.value("status", "") == "completed"; }
    std::string model_for(const std::string& name) const;
};

StoredRun load_run(const std::filesystem::path& dir);
// Every run directory (a directory holding manifest.json) under root, sorted.
std::vector<StoredRun> load_runs(const std::filesystem::path& root);

// Mechanical check of the per-round event grammar; returns one message per
// violation (empty = conforms).
std::vector<std::string> check_turn_structure(const std::vector<Event>& events, const std::vector<std::string>& roster,
                                              int rounds);

}  // namespace stagecraft
