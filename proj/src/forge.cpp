#include "stagecraft/forge.hpp"

#include <cctype>

#include "stagecraft/error.hpp"
#include "stagecraft/parse.hpp"
#include "stagecraft/prompts.hpp"
#include "stagecraft/repair.hpp"
#include "stagecraft/text.hpp"

namespace stagecraft {

std::string_view to_string(DraftStage s) { return s == DraftStage::screenwriter ? "screenwriter" : "director"; }

SourceWork load_source(const std::filesystem::path& path) {
    const auto content = read_file(path);
    SourceWork src;
    if (path.extension() == ".json") {
        auto j = Json::parse(content);
        if (!j.contains("text")) throw Error(ErrorCode::MissingField, "source.text");
        src.text = text::trim(j.at("text").get<std::string>());
        src.title = text::trim(j.value("title", path.stem().string()));
        src.language = parse_language(j.value("language", "en"));
    } else {
        src.text = text::trim(content);
        src.title = path.stem().string();
    }
    return src;
}

namespace {

[[noreturn]] void fail(const std::string& why) { throw Error(ErrorCode::Parse, why); }

const std::vector<text::LabelSpec>& block_labels() {
    static const std::vector<text::LabelSpec> labels = {{"title", {"Title", "标题", "作品"}},
                                                        {"time", {"Time", "时间"}},
                                                        {"location", {"Location", "地点"}},
                                                        {"description", {"Description", "描述"}},
                                                        {"characters", {"Characters", "角色", "人物"}}};
    return labels;
}

std::string field_key(const std::string& raw) {
    static const std::vector<std::pair<std::string, std::vector<std::string>>> keys = {
        {"name", {"name", "名字", "姓名"}},
        {"role", {"role", "身份", "角色定位"}},
        {"profile", {"profile", "简介", "背景"}},
        {"position", {"position", "位置"}},
        {"state", {"state", "状态"}}};
    auto k = text::to_lower_ascii(text::strip_decoration(raw));
    for (const auto& [key, aliases] : keys) {
        for (const auto& a : aliases) {
            if (k == a) return key;
        }
    }
    return "";
}

// "Key: value" with either colon; nullopt when there is no colon.
std::optional<std::pair<std::string, std::string>> split_pair(const std::string& part) {
    auto ascii = part.find(':');
    auto wide = part.find("：");
    std::size_t pos = std::min(ascii, wide);
    if (pos == std::string::npos) return std::nullopt;
    std::size_t skip = pos == ascii ? 1 : std::string("：").size();
    return std::make_pair(text::trim(part.substr(0, pos)), text::trim(part.substr(pos + skip)));
}

std::optional<CharacterProfile> parse_character_line(std::string line) {
    line = text::trim(line);
    while (!line.empty() && (line[0] == '-' || line[0] == '*' || line[0] == '+' ||
                             std::isdigit(static_cast<unsigned char>(line[0])) || line[0] == '.' || line[0] == ')')) {
        line = text::trim(line.substr(1));
    }
    if (line.empty()) return std::nullopt;
    CharacterProfile c;
    bool any = false;
    for (const auto& part : text::split(line, "|")) {
        auto kv = split_pair(part);
        if (!kv) continue;
        const auto key = field_key(kv->first);
        const auto value = text::strip_decoration(kv->second);
        if (key == "name") c.name = value;
        else if (key == "role") c.role = value;
        else if (key == "profile") c.profile = value;
        else if (key == "position") c.position = value;
        else if (key == "state") c.state = value;
        else continue;
        any = true;
    }
    if (!any) return std::nullopt;
    return c;
}

}  // namespace

Scene parse_scene_block(std::string_view reply, bool complete) {
    auto f = text::parse_labeled(reply, block_labels());
    Scene s;
    s.title = f.count("title") ? text::strip_decoration(f["title"]) : "";
    s.environment.time = f.count("time") ? f["time"] : "";
    s.environment.location = f.count("location") ? f["location"] : "";
    s.environment.description = f.count("description") ? f["description"] : "";
    if (f.count("characters")) {
        for (const auto& line : text::split(f["characters"], "\n")) {
            if (auto c = parse_character_line(line)) s.characters.push_back(*c);
        }
    }
    if (s.characters.empty()) fail("no character lines");
    for (const auto& c : s.characters) {
        if (c.name.empty()) fail("character without a name");
    }
    if (s.environment.description.empty()) fail("missing 'Description'");
    if (complete) {
        if (s.environment.time.empty()) fail("missing 'Time'");
        if (s.environment.location.empty()) fail("missing 'Location'");
        for (const auto& c : s.characters) {
            if (c.role.empty() || c.profile.empty() || c.position.empty() || c.state.empty()) {
                fail("character '" + c.name + "' has an empty field");
            }
        }
    }
    return s;
}

std::string scene_id_for(const SourceWork& source, Origin origin, int index) {
    std::string slug;
    for (unsigned char c : source.title) {
        if (std::isalnum(c)) {
            slug += static_cast<char>(std::tolower(c));
        } else if (!slug.empty() && slug.back() != '-' && c < 0x80) {
            slug += '-';
        }
    }
    while (!slug.empty() && slug.back() == '-') slug.pop_back();
    if (slug.empty()) slug = text::hex64(text::fnv1a64(source.title)).substr(0, 8);
    char num[8];
    std::snprintf(num, sizeof num, "%02d", index);
    return slug + (origin == Origin::extracted ? "-ext-" : "-gen-") + num;
}

std::vector<SceneDraft> screenwrite(Session& session, const std::string& model, const SourceWork& source,
                                    Origin mode, int count, int first_index, int attempt) {
    if (count < 0) throw Error(ErrorCode::Precondition, "count must be >= 0");
    if (count == 0) return {};
    if (text::trim(source.text).empty()) throw Error(ErrorCode::Precondition, "empty source context");
    const bool generate = mode == Origin::generated;
    std::vector<SceneDraft> out;
    for (int i = 0; i < count; ++i) {
        const int index = first_index + i;
        auto request = ChatRequest::user(
            model, prompts::screenwrite(source.text, source.title, generate, index, source.language, attempt),
            kDefaultTemperature,
            generate ? prompts::purpose::kScreenwriteGenerate : prompts::purpose::kScreenwriteExtract);
        auto parsed = complete_with_repair(session, request, RoleTag::scene_forge,
                                           prompts::reminder::scene_block(source.language), ErrorCode::Crafting,
                                           [](const std::string& reply) { return parse_scene_block(reply, false); });
        SceneDraft d;
        d.scene = parsed.value;
        d.scene.id = scene_id_for(source, mode, index);
        if (d.scene.title.empty()) d.scene.title = source.title;
        d.scene.language = source.language;
        d.scene.origin = mode;
        d.stage = DraftStage::screenwriter;
        if (!generate) d.source_excerpt = source.text;
        out.push_back(std::move(d));
    }
    return out;
}

SceneDraft direct(Session& session, const std::string& model, const SceneDraft& draft) {
    if (draft.stage != DraftStage::screenwriter) {
        throw Error(ErrorCode::Precondition, "direct expects a screenwriter draft");
    }
    const auto lang = draft.scene.language;
    auto request = ChatRequest::user(model, prompts::direct(prompts::scene_block(draft.scene), draft.scene.title, lang),
                                     kDefaultTemperature, prompts::purpose::kDirect);
    auto parsed = complete_with_repair(session, request, RoleTag::scene_forge, prompts::reminder::scene_block(lang),
                                       ErrorCode::Crafting,
                                       [](const std::string& reply) { return parse_scene_block(reply, true); });
    SceneDraft out = draft;
    out.scene.environment = parsed.value.environment;
    out.scene.characters = parsed.value.characters;
    if (!parsed.value.title.empty()) out.scene.title = parsed.value.title;
    out.stage = DraftStage::director;
    out.warnings.clear();
    for (const auto& v : validate_scene(out.scene)) {
        if (v.warning) out.warnings.push_back(v);
    }
    return out;
}

SceneQuality judge_scene(Session& session, const std::string& model, const SceneDraft& draft,
                         const std::string& source_text) {
    if (draft.stage != DraftStage::director) throw Error(ErrorCode::Precondition, "judge_scene expects a director draft");
    const bool extracted = draft.scene.origin == Origin::extracted;
    const auto lang = draft.scene.language;
    auto request = ChatRequest::user(model,
                                     prompts::judge_scene(prompts::scene_block(draft.scene), source_text, extracted, lang),
                                     kJudgeTemperature, prompts::purpose::kJudgeScene);
    auto parsed = complete_with_repair(session, request, RoleTag::scene_forge,
                                       prompts::reminder::scene_quality(extracted, lang), ErrorCode::Evaluation,
                                       [&](const std::string& reply) { return parse::scene_quality(reply, extracted); });
    return parsed.value;
}

bool AcceptancePolicy::accepts(const SceneQuality& q) const {
    const auto values = q.available();
    if (values.empty()) return false;
    double sum = 0.0;
    for (double v : values) {
        if (v < min_each) return false;
        sum += v;
    }
    return sum / static_cast<double>(values.size()) >= min_mean;
}

Json CraftReport::to_json() const {
    Json list = Json::array();
    for (const auto& a : attempts) {
        Json j{{"scene_id", a.scene_id},
               {"title", a.title},
               {"origin", stagecraft::to_string(a.origin)},
               {"attempt", a.attempt},
               {"accepted", a.accepted}};
        if (a.quality) j["quality"] = stagecraft::to_json(*a.quality);
        if (!a.error.empty()) j["error"] = a.error;
        list.push_back(j);
    }
    return Json{{"requested", requested}, {"accepted", accepted}, {"attempts", list}};
}

CraftResult craft(Gateway& gateway, const CraftConfig& config) {
    if (config.policy.max_attempts < 1) throw Error(ErrorCode::Precondition, "max_attempts must be >= 1");
    if (config.extract < 0 || config.generate < 0) throw Error(ErrorCode::Precondition, "negative scene count");
    CraftResult result;
    Session session(gateway);
    for (const auto& source : config.sources) {
        for (auto origin : {Origin::extracted, Origin::generated}) {
            const int count = origin == Origin::extracted ? config.extract : config.generate;
            for (int index = 1; index <= count; ++index) {
                ++result.report.requested;
                for (int attempt = 1; attempt <= config.policy.max_attempts; ++attempt) {
                    CraftAttempt record;
                    record.scene_id = scene_id_for(source, origin, index);
                    record.title = source.title;
                    record.origin = origin;
                    record.attempt = attempt;
                    try {
                        auto drafts = screenwrite(session, config.models.screenwriter, source, origin, 1, index, attempt);
                        auto refined = direct(session, config.models.director, drafts.front());
                        auto quality = judge_scene(session, config.models.judge, refined, source.text);
                        record.quality = quality;
                        record.accepted = config.policy.accepts(quality) && !has_errors(validate_scene(refined.scene));
                        if (record.accepted) result.scenes.push_back(refined.scene);
                    } catch (const Error& e) {
                        if (e.code() == ErrorCode::Transport || e.code() == ErrorCode::ReplayMiss) throw;
                        record.error = e.what();
                    }
                    const bool accepted = record.accepted;
                    result.report.attempts.push_back(std::move(record));
                    if (accepted) {
                        ++result.report.accepted;
                        break;
                    }
                }
            }
        }
    }
    result.ledger = session.ledger();
    return result;
}

}  // namespace stagecraft
