#include "stagecraft/engine.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "stagecraft/error.hpp"
#include "stagecraft/narrator.hpp"
#include "stagecraft/prompts.hpp"
#include "stagecraft/text.hpp"

namespace stagecraft {

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::action: return "action";
        case EventKind::influence: return "influence";
        case EventKind::reaction: return "reaction";
        case EventKind::result: return "result";
        case EventKind::state_update: return "state_update";
        case EventKind::env_update: return "env_update";
        case EventKind::self_belief: return "self_belief";
        case EventKind::env_belief: return "env_belief";
    }
    return "action";
}

EventKind parse_event_kind(std::string_view s) {
    for (auto k : {EventKind::action, EventKind::influence, EventKind::reaction, EventKind::result,
                   EventKind::state_update, EventKind::env_update, EventKind::self_belief, EventKind::env_belief}) {
        if (to_string(k) == s) return k;
    }
    throw Error(ErrorCode::Parse, "unknown event kind '" + std::string(s) + "'");
}

std::string_view to_string(RunStatus s) { return s == RunStatus::completed ? "completed" : "failed"; }

Json to_json(const Event& e) {
    Json j{{"seq", e.seq}, {"round", e.round}, {"kind", to_string(e.kind)}, {"actor", e.actor}, {"attempts", e.attempts}};
    if (!e.target.empty()) j["target"] = e.target;
    if (!e.text.empty()) j["text"] = e.text;
    if (e.kind == EventKind::action || e.kind == EventKind::reaction) {
        j["observation"] = e.observation;
        j["prompt"] = e.prompt;
        j["action_kind"] = to_string(e.action_kind);
    }
    if (e.kind == EventKind::state_update) {
        j["position"] = e.position;
        j["state"] = e.state;
    }
    if (e.environment) j["environment"] = to_json(*e.environment);
    if (e.self_belief) j["self_belief"] = to_json(*e.self_belief);
    if (e.env_belief) j["env_belief"] = to_json(*e.env_belief);
    if (e.fallback) j["fallback"] = true;
    if (e.skipped) j["skipped"] = true;
    if (e.failed) j["failed"] = true;
    if (!e.note.empty()) j["note"] = e.note;
    return j;
}

Event event_from_json(const Json& j) {
    Event e;
    e.seq = j.at("seq").get<std::int64_t>();
    e.round = j.at("round").get<int>();
    e.kind = parse_event_kind(j.at("kind").get<std::string>());
    e.actor = j.value("actor", "");
    e.attempts = j.value("attempts", 0);
    e.target = j.value("target", "");
    e.text = j.value("text", "");
    e.observation = j.value("observation", "");
    e.prompt = j.value("prompt", "");
    if (j.contains("action_kind")) e.action_kind = parse_action_kind(j.at("action_kind").get<std::string>());
    e.position = j.value("position", "");
    e.state = j.value("state", "");
    if (j.contains("environment")) e.environment = environment_from_json(j.at("environment"));
    if (j.contains("self_belief")) {
        const auto& b = j.at("self_belief");
        e.self_belief = SelfBelief{b.value("belief", ""), b.value("desire", ""), b.value("intention", "")};
    }
    if (j.contains("env_belief")) {
        const auto& b = j.at("env_belief");
        e.env_belief = EnvBelief{b.value("perception_of_others", ""), b.value("understanding_of_scene", ""),
                                 b.value("influence_on_actions", "")};
    }
    e.fallback = j.value("fallback", false);
    e.skipped = j.value("skipped", false);
    e.failed = j.value("failed", false);
    e.note = j.value("note", "");
    return e;
}

std::string RunConfig::model_for(const std::string& name) const {
    auto it = cast.find(name);
    return it == cast.end() ? default_model : it->second;
}

namespace {

// Totally ordered event log, optionally mirrored line by line to disk.
class EventLog {
public:
    explicit EventLog(const std::optional<std::filesystem::path>& file) {
        if (!file) return;
        std::filesystem::create_directories(file->parent_path());
        out_.emplace(*file, std::ios::binary | std::ios::trunc);
        if (!*out_) throw Error(ErrorCode::Io, "cannot open " + file->string());
    }

    std::int64_t next_seq() const { return next_; }

    void add(Event e) {
        e.seq = next_++;
        if (out_) {
            *out_ << to_json(e).dump() << '\n';
            out_->flush();
        }
        events_.push_back(std::move(e));
    }

    std::vector<Event> take() { return std::move(events_); }

private:
    std::int64_t next_ = 1;
    std::vector<Event> events_;
    std::optional<std::ofstream> out_;
};

Event turn_event(EventKind kind, const Turn& turn) {
    Event e;
    e.kind = kind;
    e.round = turn.action.round;
    e.actor = turn.action.actor;
    e.text = turn.action.text;
    e.observation = turn.observation;
    e.prompt = turn.prompt;
    e.action_kind = turn.action.kind;
    e.attempts = turn.attempts;
    return e;
}

void check_preconditions(const Scene& scene, const RunConfig& config) {
    auto violations = validate_scene(scene);
    if (has_errors(violations)) {
        std::string msg = "scene " + scene.id + " is invalid:";
        for (const auto& v : violations) {
            if (!v.warning) msg += " " + std::string(to_string(v.code)) + "(" + v.detail + ")";
        }
        throw Error(ErrorCode::Precondition, msg);
    }
    if (config.rounds < 1) throw Error(ErrorCode::Precondition, "rounds must be >= 1");
    if (config.narrator_model.empty()) throw Error(ErrorCode::Precondition, "no narrator model");
    for (const auto& [name, model] : config.cast) {
        if (!scene.find(name)) throw Error(ErrorCode::Precondition, "cast name '" + name + "' not in roster");
    }
    for (const auto& c : scene.characters) {
        if (config.model_for(c.name).empty()) {
            throw Error(ErrorCode::Precondition, "no model for character '" + c.name + "'");
        }
    }
}

}  // namespace

SceneRun run_scene(Gateway& gateway, const Scene& scene, const RunConfig& config,
                   const std::optional<std::filesystem::path>& out_dir) {
    check_preconditions(scene, config);

    SceneRun run;
    run.scene = scene;
    run.config = config;

    const Language lang = scene.language;
    Session session(gateway);
    Narrator narrator(session, config.narrator_model, lang);
    std::vector<CharacterAgent> agents;
    agents.reserve(scene.characters.size());
    for (const auto& c : scene.characters) agents.emplace_back(c, config.model_for(c.name), lang, session);

    auto agent_named = [&](const std::string& name) -> CharacterAgent& {
        for (auto& a : agents) {
            if (a.profile().name == name) return a;
        }
        throw Error(ErrorCode::Lookup, "no character named '" + name + "'");
    };
    auto current_profiles = [&] {
        std::vector<CharacterProfile> out;
        for (const auto& a : agents) out.push_back(a.profile());
        return out;
    };

    Environment env = scene.environment;
    std::optional<std::filesystem::path> events_file;
    if (out_dir) events_file = *out_dir / "events.jsonl";
    EventLog log(events_file);

    auto state_update = [&](CharacterAgent& who, const std::string& observation, int round) {
        auto ps = narrator.update_character(who.profile(), observation);
        who.set_position_state(ps.value.position, ps.value.state);
        Event e;
        e.kind = EventKind::state_update;
        e.round = round;
        e.actor = who.profile().name;
        e.position = ps.value.position;
        e.state = ps.value.state;
        e.attempts = ps.attempts;
        log.add(std::move(e));
    };

    try {
        for (int round = 1; round <= config.rounds; ++round) {
            std::vector<std::string> observations;
            for (auto& agent : agents) {
                const auto& memory = agent.state().memory;
                const std::string latest = memory.empty() ? std::string() : memory.back().text;
                std::vector<std::string> recalled;
                for (const auto& hit : agent.recall(env.description + "\n" + latest, config.recall_k)) {
                    recalled.push_back(hit.entry.text);
                }
                const auto digest = prompts::observation_digest(env, recalled, lang);
                auto turn = agent.plan_action(env, digest, round, log.next_seq());
                log.add(turn_event(EventKind::action, turn));

                Event inf_event;
                inf_event.kind = EventKind::influence;
                inf_event.round = round;
                inf_event.actor = agent.profile().name;
                Influence influence{agent.profile().name, agent.profile().name, ""};
                try {
                    auto verdict = narrator.analyze_influence(env, turn.action, current_profiles());
                    influence = verdict.value;
                    inf_event.attempts = verdict.attempts;
                } catch (const RepairExhausted& e) {
                    if (e.code() != ErrorCode::InfluenceParse) throw;
                    inf_event.fallback = true;
                    inf_event.attempts = e.attempts();
                    inf_event.note = e.what();
                }
                inf_event.target = influence.target;
                inf_event.text = influence.impact;
                log.add(std::move(inf_event));

                if (influence.has_responder()) {
                    auto& target = agent_named(influence.target);
                    auto reaction = target.react(env, influence, round, log.next_seq());
                    log.add(turn_event(EventKind::reaction, reaction));

                    auto outcome = narrator.adjudicate(env, turn.action, reaction.action, agent.profile(),
                                                       target.profile());
                    const auto seq = log.next_seq();
                    agent.remember(outcome.value.text, round, seq);
                    target.remember(outcome.value.text, round, seq);
                    Event res;
                    res.kind = EventKind::result;
                    res.round = round;
                    res.actor = agent.profile().name;
                    res.target = target.profile().name;
                    res.text = outcome.value.text;
                    res.attempts = outcome.attempts;
                    log.add(std::move(res));

                    state_update(agent, outcome.value.text, round);
                    state_update(target, outcome.value.text, round);
                    observations.push_back(outcome.value.text);
                } else {
                    state_update(agent, turn.action.text, round);
                    observations.push_back(turn.action.text);
                }
            }

            auto update = narrator.update_environment(env, observations);
            env = update.environment;
            Event env_event;
            env_event.kind = EventKind::env_update;
            env_event.round = round;
            env_event.environment = env;
            env_event.skipped = update.skipped;
            env_event.failed = update.failed;
            env_event.attempts = update.attempts;
            env_event.note = update.warning;
            log.add(std::move(env_event));

            const auto profiles = current_profiles();
            for (auto& agent : agents) {
                std::vector<std::string> lived;
                for (const auto& m : agent.state().memory) {
                    if (m.round == round) lived.push_back(m.text);
                }
                auto sb = agent.update_self_belief(env, text::join(lived, "\n"));
                Event sb_event;
                sb_event.kind = EventKind::self_belief;
                sb_event.round = round;
                sb_event.actor = agent.profile().name;
                sb_event.self_belief = sb.value;
                sb_event.attempts = sb.attempts;
                log.add(std::move(sb_event));

                auto eb = agent.update_env_belief(env, profiles);
                Event eb_event;
                eb_event.kind = EventKind::env_belief;
                eb_event.round = round;
                eb_event.actor = agent.profile().name;
                eb_event.env_belief = eb.value;
                eb_event.attempts = eb.attempts;
                log.add(std::move(eb_event));
            }
        }
    } catch (const std::exception& e) {
        run.status = RunStatus::failed;
        run.error = e.what();
    }

    run.events = log.take();
    run.ledger = session.ledger();
    run.final_environment = env;
    for (const auto& a : agents) run.final_states.push_back(a.state());
    for (const auto& c : scene.characters) run.trajectories[c.name] = project_trajectory(scene, run.events, c.name);
    if (out_dir) write_run(run, *out_dir);
    return run;
}

Trajectory project_trajectory(const Scene& scene, const std::vector<Event>& events, const std::string& name) {
    const auto* profile = scene.find(name);
    if (!profile) throw Error(ErrorCode::Lookup, "no character named '" + name + "' in scene " + scene.id);
    Trajectory t;
    t.scene_id = scene.id;
    t.character = *profile;
    t.environment = scene.environment;
    for (const auto& e : events) {
        if (e.actor != name || (e.kind != EventKind::action && e.kind != EventKind::reaction)) continue;
        TrajectoryStep step;
        step.observation = e.observation;
        step.action = Action{e.actor, e.action_kind, e.text, e.round};
        step.seq = e.seq;
        step.prompt = e.prompt;
        t.steps.push_back(std::move(step));
    }
    return t;
}

Trajectory extract_trajectory(const SceneRun& run, const std::string& name) {
    auto it = run.trajectories.find(name);
    if (it != run.trajectories.end()) return it->second;
    return project_trajectory(run.scene, run.events, name);
}

std::string trajectory_file_name(const std::string& character) {
    std::string out;
    for (char c : character) {
        switch (c) {
            case '/': case '\\': case ':': case '*': case '?': case '"': case '<': case '>': case '|': case ' ':
            case '\t':
                out += '_';
                break;
            default:
                out += c;
        }
    }
    return out + ".jsonl";
}

std::string events_to_lines(const std::vector<Event>& events) {
    std::string out;
    for (const auto& e : events) out += to_json(e).dump() + "\n";
    return out;
}

Json run_manifest(const SceneRun& run) {
    Json cast = Json::object();
    Json files = Json::object();
    Json finals = Json::object();
    for (const auto& c : run.scene.characters) {
        cast[c.name] = run.config.model_for(c.name);
        files[c.name] = "trajectories/" + trajectory_file_name(c.name);
    }
    for (const auto& s : run.final_states) {
        finals[s.profile.name] = Json{{"position", s.profile.position},
                                      {"state", s.profile.state},
                                      {"self_belief", to_json(s.self_belief)},
                                      {"env_belief", to_json(s.env_belief)},
                                      {"memory_entries", s.memory.size()}};
    }
    Json totals = Json::object();
    for (auto role : kAllRoleTags) {
        auto t = run.ledger.totals(role);
        if (t.calls == 0) continue;
        totals[std::string(to_string(role))] =
            Json{{"calls", t.calls}, {"input_tokens", t.input_tokens}, {"output_tokens", t.output_tokens}};
    }
    Json j{{"scene_id", run.scene.id},
           {"title", run.scene.title},
           {"language", to_string(run.scene.language)},
           {"status", to_string(run.status)},
           {"rounds", run.config.rounds},
           {"recall_k", run.config.recall_k},
           {"cast", cast},
           {"narrator_model", run.config.narrator_model},
           {"seed", run.config.seed},
           {"prompt_version", prompts::kVersion},
           {"event_count", run.events.size()},
           {"trajectories", files},
           {"final_environment", to_json(run.final_environment)},
           {"final_characters", finals},
           {"usage", totals}};
    if (!run.error.empty()) j["error"] = run.error;
    return j;
}

void write_run(const SceneRun& run, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "trajectories");
    store_scene(run.scene, dir / "scene.json");
    write_file(dir / "events.jsonl", events_to_lines(run.events));
    for (const auto& c : run.scene.characters) {
        auto it = run.trajectories.find(c.name);
        if (it == run.trajectories.end()) continue;
        store_trajectory(it->second, dir / "trajectories" / trajectory_file_name(c.name));
    }
    write_file(dir / "ledger.jsonl", run.ledger.to_lines());
    write_file(dir / "manifest.json", run_manifest(run).dump(2) + "\n");
}

std::vector<SceneRun> run_batch(Gateway& gateway, const std::vector<Scene>& scenes, const RunConfig& config,
                                int parallelism, const std::optional<std::filesystem::path>& out_dir) {
    if (parallelism < 1) throw Error(ErrorCode::Precondition, "parallelism must be >= 1");
    std::set<std::string> ids;
    for (const auto& s : scenes) {
        if (!ids.insert(s.id).second) throw Error(ErrorCode::Precondition, "duplicate scene id '" + s.id + "'");
    }

    std::vector<SceneRun> results(scenes.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= scenes.size()) return;
            std::optional<std::filesystem::path> dir;
            if (out_dir) dir = *out_dir / scenes[i].id;
            // A batch-wide cast may name characters of other scenes.
            RunConfig scene_config = config;
            for (auto it = scene_config.cast.begin(); it != scene_config.cast.end();) {
                it = scenes[i].find(it->first) ? std::next(it) : scene_config.cast.erase(it);
            }
            try {
                results[i] = run_scene(gateway, scenes[i], scene_config, dir);
            } catch (const std::exception& e) {
                SceneRun failed;
                failed.scene = scenes[i];
                failed.config = scene_config;
                failed.status = RunStatus::failed;
                failed.error = e.what();
                failed.final_environment = scenes[i].environment;
                if (dir) write_run(failed, *dir);
                results[i] = std::move(failed);
            }
        }
    };
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism), std::max<std::size_t>(1, scenes.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    if (out_dir) {
        Json entries = Json::array();
        for (const auto& r : results) {
            Json e{{"scene_id", r.scene.id}, {"status", to_string(r.status)}, {"dir", r.scene.id}};
            if (!r.error.empty()) e["error"] = r.error;
            entries.push_back(e);
        }
        Json manifest{{"runs", entries},
                      {"total", results.size()},
                      {"completed", std::count_if(results.begin(), results.end(),
                                                  [](const auto& r) { return r.status == RunStatus::completed; })}};
        write_file(*out_dir / "batch_manifest.json", manifest.dump(2) + "\n");
    }
    return results;
}

std::string StoredRun::model_for(const std::string& name) const {
    if (manifest.contains("cast") && manifest.at("cast").contains(name)) {
        return manifest.at("cast").at(name).get<std::string>();
    }
    return "";
}

StoredRun load_run(const std::filesystem::path& dir) {
    StoredRun run;
    run.dir = dir;
    run.manifest = Json::parse(read_file(dir / "manifest.json"));
    run.scene = load_scene(dir / "scene.json");
    for (const auto& line : text::split(read_file(dir / "events.jsonl"), "\n")) {
        if (text::trim(line).empty()) continue;
        try {
            run.events.push_back(event_from_json(Json::parse(line)));
        } catch (const Json::parse_error&) {
            break;  // torn tail after a crash
        }
    }
    if (std::filesystem::exists(dir / "ledger.jsonl")) run.ledger = UsageLedger::from_lines(read_file(dir / "ledger.jsonl"));
    if (run.manifest.contains("trajectories")) {
        for (const auto& c : run.scene.characters) {
            const auto& files = run.manifest.at("trajectories");
            if (!files.contains(c.name)) continue;
            auto path = dir / files.at(c.name).get<std::string>();
            if (std::filesystem::exists(path)) run.trajectories.push_back(load_trajectory(path));
        }
    }
    return run;
}

std::vector<StoredRun> load_runs(const std::filesystem::path& root) {
    std::vector<std::filesystem::path> dirs;
    if (std::filesystem::exists(root / "manifest.json")) dirs.push_back(root);
    if (std::filesystem::is_directory(root)) {
        for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
            if (entry.is_directory() && std::filesystem::exists(entry.path() / "manifest.json")) {
                dirs.push_back(entry.path());
            }
        }
    }
    std::sort(dirs.begin(), dirs.end());
    dirs.erase(std::unique(dirs.begin(), dirs.end()), dirs.end());
    std::vector<StoredRun> out;
    for (const auto& d : dirs) out.push_back(load_run(d));
    return out;
}

std::vector<std::string> check_turn_structure(const std::vector<Event>& events, const std::vector<std::string>& roster,
                                              int rounds) {
    std::vector<std::string> problems;
    std::size_t i = 0;
    auto at = [&](std::size_t k) -> const Event* { return k < events.size() ? &events[k] : nullptr; };
    auto expect = [&](EventKind kind, const std::string& actor, int round, const std::string& where) -> const Event* {
        const Event* e = at(i);
        if (!e) {
            problems.push_back(where + ": log ended, expected " + std::string(to_string(kind)));
            return nullptr;
        }
        if (e->kind != kind || (!actor.empty() && e->actor != actor) || e->round != round) {
            problems.push_back(where + ": expected " + std::string(to_string(kind)) + " by " + actor + " in round " +
                               std::to_string(round) + ", got " + std::string(to_string(e->kind)) + " by " +
                               e->actor + " (seq " + std::to_string(e->seq) + ")");
            return nullptr;
        }
        ++i;
        return e;
    };

    for (std::int64_t k = 1; k < static_cast<std::int64_t>(events.size()); ++k) {
        if (events[static_cast<std::size_t>(k)].seq <= events[static_cast<std::size_t>(k - 1)].seq) {
            problems.push_back("event seq not strictly increasing at index " + std::to_string(k));
        }
    }

    for (int r = 1; r <= rounds && problems.empty(); ++r) {
        const std::string rtag = "round " + std::to_string(r);
        for (const auto& name : roster) {
            const std::string where = rtag + ", turn of " + name;
            if (!expect(EventKind::action, name, r, where)) return problems;
            const Event* inf = at(i);
            if (inf && inf->kind == EventKind::influence) {
                ++i;
                if (inf->actor != name) {
                    problems.push_back(where + ": influence attributed to " + inf->actor);
                    return problems;
                }
                if (inf->target != name) {
                    if (!expect(EventKind::reaction, inf->target, r, where)) return problems;
                    if (!expect(EventKind::result, name, r, where)) return problems;
                    if (!expect(EventKind::state_update, name, r, where)) return problems;
                    if (!expect(EventKind::state_update, inf->target, r, where)) return problems;
                } else {
                    if (!expect(EventKind::state_update, name, r, where)) return problems;
                }
                const Event* extra = at(i);
                if (extra && extra->kind == EventKind::state_update) {
                    problems.push_back(where + ": unexpected extra state_update (seq " + std::to_string(extra->seq) + ")");
                    return problems;
                }
            } else {
                if (!expect(EventKind::state_update, "", r, where)) return problems;
                while (at(i) && at(i)->kind == EventKind::state_update) ++i;
            }
        }
        if (!expect(EventKind::env_update, "", r, rtag)) return problems;
        for (const auto& name : roster) {
            if (!expect(EventKind::self_belief, name, r, rtag)) return problems;
            if (!expect(EventKind::env_belief, name, r, rtag)) return problems;
        }
    }
    if (problems.empty() && i != events.size()) {
        problems.push_back("trailing events after round " + std::to_string(rounds));
    }
    return problems;
}

}  // namespace stagecraft
