#include "stagecraft/factory.hpp"

#include <algorithm>
#include <map>

#include "stagecraft/error.hpp"
#include "stagecraft/parse.hpp"
#include "stagecraft/prompts.hpp"
#include "stagecraft/repair.hpp"
#include "stagecraft/text.hpp"

namespace stagecraft {

std::string_view to_string(SftSource s) { return s == SftSource::guided ? "guided" : "reflective"; }

SftSource parse_sft_source(std::string_view s) {
    if (s == "guided") return SftSource::guided;
    if (s == "reflective") return SftSource::reflective;
    throw Error(ErrorCode::Parse, "unknown source '" + std::string(s) + "'");
}

Json to_json(const SftExample& e) {
    return Json{{"instruction", e.instruction},
                {"response", e.response},
                {"meta",
                 {{"scene_id", e.scene_id},
                  {"character", e.character},
                  {"source", to_string(e.source)},
                  {"teacher", e.teacher},
                  {"language", to_string(e.language)},
                  {"round", e.round},
                  {"seq", e.seq}}}};
}

SftExample example_from_json(const Json& j) {
    for (const char* key : {"instruction", "response", "meta"}) {
        if (!j.contains(key)) throw Error(ErrorCode::MissingField, std::string("example.") + key);
    }
    const auto& m = j.at("meta");
    SftExample e;
    e.instruction = j.at("instruction").get<std::string>();
    e.response = j.at("response").get<std::string>();
    e.scene_id = m.value("scene_id", "");
    e.character = m.value("character", "");
    e.source = parse_sft_source(m.value("source", "guided"));
    e.teacher = m.value("teacher", "");
    e.language = parse_language(m.value("language", "en"));
    e.round = m.value("round", 0);
    e.seq = m.value("seq", std::int64_t{0});
    return e;
}

std::vector<TeacherChoice> rank_teachers(const std::vector<EvaluationRecord>& records) {
    if (records.empty()) throw Error(ErrorCode::Selection, "no evaluation records");
    auto report = aggregate(records);
    std::map<Language, TeacherChoice> best;
    // report.models is ordered by (language, model), so a strict > keeps the
    // lexicographically first model among equals.
    for (const auto& m : report.models) {
        auto it = best.find(m.language);
        if (it == best.end() || m.average.mean > it->second.average) {
            best[m.language] = TeacherChoice{m.language, m.model, m.average.mean};
        }
    }
    std::vector<TeacherChoice> out;
    for (const auto& [lang, choice] : best) out.push_back(choice);
    return out;
}

std::vector<SourcedTrajectory> trajectories_played_by(const std::vector<StoredRun>& runs, const std::string& model) {
    std::vector<SourcedTrajectory> out;
    for (const auto& run : runs) {
        if (!run.completed()) continue;
        for (const auto& t : run.trajectories) {
            const auto played = run.model_for(t.character.name);
            if (!model.empty() && played != model) continue;
            out.push_back(SourcedTrajectory{t, played, run.scene.language, run.scene.title});
        }
    }
    return out;
}

GuidedSelection select_guided(const std::vector<EvaluationRecord>& records, const std::vector<StoredRun>& runs,
                              const GuidedPolicy& policy) {
    GuidedSelection sel;
    sel.teachers = rank_teachers(records);
    auto passes = [&](const std::string& id) {
        if (!policy.min_mean) return true;
        // Any judge's record meeting the bar is enough.
        for (const auto& r : records) {
            if (r.trajectory_id == id && r.scores.mean() >= *policy.min_mean) return true;
        }
        return false;
    };
    for (const auto& teacher : sel.teachers) {
        for (auto& t : trajectories_played_by(runs, teacher.model)) {
            if (t.language != teacher.language || t.trajectory.steps.empty()) continue;
            if (!passes(t.trajectory.id())) continue;
            sel.trajectories.push_back(std::move(t));
        }
    }
    return sel;
}

std::vector<SftExample> build_sft(const SourcedTrajectory& st, SftSource source) {
    std::vector<SftExample> out;
    const auto& t = st.trajectory;
    for (const auto& step : t.steps) {
        SftExample e;
        if (!step.prompt.empty()) {
            e.instruction = step.prompt;
        } else {
            SelfBelief sb;
            sb.belief = t.character.profile;
            EnvBelief eb;
            prompts::CharacterContext ctx{t.character, sb, eb, t.environment, st.language};
            e.instruction = step.action.kind == ActionKind::react ? prompts::reaction(ctx, step.observation)
                                                                  : prompts::action(ctx, step.observation);
        }
        e.response = step.action.text;
        e.scene_id = t.scene_id;
        e.character = t.character.name;
        e.source = source;
        e.teacher = st.model;
        e.language = st.language;
        e.round = step.action.round;
        e.seq = step.seq;
        out.push_back(std::move(e));
    }
    return out;
}

ReflectiveResult reflective_rewrite(Session& session, const SourcedTrajectory& st) {
    ReflectiveResult out;
    out.rewritten = st;
    const auto& t = st.trajectory;
    if (t.steps.empty()) return out;
    const auto lang = st.language;
    auto critique_req = ChatRequest::user(st.model, prompts::reflect_critique(t, st.title, lang), kDefaultTemperature,
                                          prompts::purpose::kReflectCritique);
    try {
        out.critique = complete_with_repair(session, critique_req, RoleTag::character,
                                            prompts::reminder::non_empty(lang), ErrorCode::Parse,
                                            [](const std::string& reply) {
                                                auto s = text::trim(reply);
                                                if (s.empty()) throw Error(ErrorCode::Parse, "empty critique");
                                                return s;
                                            })
                           .value;
    } catch (const RepairExhausted&) {
        for (std::size_t i = 0; i < t.steps.size(); ++i) out.flagged.push_back(i);
        return out;
    }
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        auto req = ChatRequest::user(st.model, prompts::reflect_rewrite(t, out.critique, i, lang), kDefaultTemperature,
                                     prompts::purpose::kReflectRewrite);
        try {
            auto revised = complete_with_repair(session, req, RoleTag::character, prompts::reminder::rewrite(lang),
                                                ErrorCode::Parse,
                                                [](const std::string& reply) { return parse::rewrite(reply); });
            if (revised.value && *revised.value != t.steps[i].action.text) {
                out.rewritten.trajectory.steps[i].action.text = *revised.value;
                out.changed.push_back(i);
            }
        } catch (const RepairExhausted&) {
            out.flagged.push_back(i);
        }
    }
    return out;
}

Json dataset_manifest(const std::vector<SftExample>& examples) {
    std::map<std::string, int> by_source;
    std::map<std::string, int> by_teacher;
    std::map<std::string, int> by_language;
    for (const auto& e : examples) {
        ++by_source[std::string(to_string(e.source))];
        ++by_teacher[e.teacher];
        ++by_language[std::string(to_string(e.language))];
    }
    return Json{{"count", examples.size()},
                {"by_source", by_source},
                {"by_teacher", by_teacher},
                {"by_language", by_language}};
}

Json export_dataset(const std::vector<SftExample>& examples, const std::filesystem::path& path) {
    if (examples.empty()) throw Error(ErrorCode::Precondition, "no examples to export");
    std::string lines;
    for (const auto& e : examples) lines += to_json(e).dump() + "\n";
    write_file(path, lines);
    auto manifest = dataset_manifest(examples);
    manifest["file"] = path.filename().string();
    write_file(path.string() + ".manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

std::vector<SftExample> parse_dataset(std::string_view content) {
    std::vector<SftExample> out;
    for (const auto& line : text::split(content, "\n")) {
        if (text::trim(line).empty()) continue;
        out.push_back(example_from_json(Json::parse(line)));
    }
    return out;
}

}  // namespace stagecraft
