#include "stagecraft/parse.hpp"

#include <cmath>
#include <regex>

#include "stagecraft/error.hpp"
#include "stagecraft/prompts.hpp"
#include "stagecraft/text.hpp"

namespace stagecraft::parse {

namespace {

[[noreturn]] void fail(const std::string& why) { throw Error(ErrorCode::Parse, why); }

std::string require(const std::map<std::string, std::string>& fields, const std::string& key,
                    const std::string& label) {
    auto it = fields.find(key);
    if (it == fields.end()) fail("missing '" + label + "'");
    if (it->second.empty()) fail("empty '" + label + "'");
    return it->second;
}

const std::vector<text::LabelSpec>& position_state_labels() {
    static const std::vector<text::LabelSpec> labels = {{"position", {"Position", "位置"}},
                                                        {"state", {"State", "状态"}}};
    return labels;
}

const std::vector<text::LabelSpec>& scene_labels() {
    static const std::vector<text::LabelSpec> labels = {{"time", {"Time", "时间"}},
                                                        {"location", {"Location", "地点"}},
                                                        {"description", {"Description", "描述", "场景描述"}}};
    return labels;
}

const std::vector<text::LabelSpec>& self_belief_labels() {
    static const std::vector<text::LabelSpec> labels = {{"belief", {"Belief", "信念"}},
                                                        {"desire", {"Desire", "欲望", "愿望"}},
                                                        {"intention", {"Intention", "意图"}}};
    return labels;
}

const std::vector<text::LabelSpec>& env_belief_labels() {
    static const std::vector<text::LabelSpec> labels = {
        {"others", {"Perception of Others", "对他人的看法"}},
        {"scene", {"Understanding of the Scene", "Understanding of Scene", "对场景的理解"}},
        {"influence", {"Influence on Actions", "对行动的影响"}}};
    return labels;
}

// Finds "<alias>[ (SHORT)]: <number>" anywhere in the reply.
std::optional<double> find_labeled_number(std::string_view reply, const std::vector<std::string>& aliases,
                                          std::string_view short_tag) {
    const std::string s(reply);
    for (const auto& alias : aliases) {
        std::string pattern = "(?:^|[^A-Za-z])" + alias;
        if (!short_tag.empty()) {
            pattern += "(?:\\s*(?:\\(|\xEF\xBC\x88)\\s*" + std::string(short_tag) + "\\s*(?:\\)|\xEF\xBC\x89))?";
        }
        pattern += "\\s*\\**\\s*(?::|\xEF\xBC\x9A)\\s*\\**\\s*([-+]?[0-9]+(?:\\.[0-9]+)?)";
        std::regex re(pattern, std::regex::ECMAScript | std::regex::icase);
        std::smatch m;
        if (std::regex_search(s, m, re)) return std::stod(m[1].str());
    }
    return std::nullopt;
}

}  // namespace

bool valid_score(double v) { return v >= 1.0 && v <= 5.0 && std::floor(v * 2.0) == v * 2.0; }

std::optional<std::string> match_roster_name(std::string_view candidate, const std::vector<std::string>& roster) {
    const std::string c = text::strip_decoration(candidate);
    if (c.empty()) return std::nullopt;
    for (const auto& name : roster) {
        if (name == c) return name;
    }
    std::vector<std::string> hits;
    for (const auto& name : roster) {
        if (text::iequals(name, c)) hits.push_back(name);
    }
    if (hits.size() == 1) return hits.front();
    if (hits.size() > 1) return std::nullopt;
    for (const auto& name : roster) {
        if (text::icontains(name, c) || text::icontains(c, name)) hits.push_back(name);
    }
    if (hits.size() == 1) return hits.front();
    return std::nullopt;
}

Influence influence(std::string_view reply, const std::string& actor, const std::vector<std::string>& roster) {
    // Use the first line that carries the separator; models sometimes add prose around it.
    std::string line;
    for (const auto& l : text::split(reply, "\n")) {
        if (l.find(";;") != std::string::npos) {
            line = text::trim(l);
            break;
        }
    }
    if (line.empty()) fail("no ';;'-separated line");
    auto fields = text::split(line, ";;");
    if (fields.size() != 3) fail("expected 3 ';;' fields, got " + std::to_string(fields.size()));
    auto target = match_roster_name(fields[1], roster);
    if (!target) fail("target '" + text::strip_decoration(fields[1]) + "' is not a unique roster name");
    std::string impact = text::strip_decoration(fields[2]);
    if (impact.empty()) fail("empty impact");
    return Influence{actor, *target, impact};
}

PositionState position_state(std::string_view reply) {
    auto f = text::parse_labeled(reply, position_state_labels());
    return PositionState{text::strip_decoration(require(f, "position", "Position")),
                         text::strip_decoration(require(f, "state", "State"))};
}

Environment scene_fields(std::string_view reply) {
    auto f = text::parse_labeled(reply, scene_labels());
    return Environment{require(f, "time", "Time"), require(f, "location", "Location"),
                       require(f, "description", "Description")};
}

SelfBelief self_belief(std::string_view reply) {
    auto f = text::parse_labeled(reply, self_belief_labels());
    return SelfBelief{require(f, "belief", "Belief"), require(f, "desire", "Desire"),
                      require(f, "intention", "Intention")};
}

EnvBelief env_belief(std::string_view reply) {
    auto f = text::parse_labeled(reply, env_belief_labels());
    return EnvBelief{require(f, "others", "Perception of Others"),
                     require(f, "scene", "Understanding of the Scene"),
                     require(f, "influence", "Influence on Actions")};
}

MetricScores metric_scores(std::string_view reply) {
    static const std::array<std::vector<std::string>, kMetricCount> aliases = {{
        {"Knowledge Accuracy", "知识准确性", "KA"},
        {"Behavioral Accuracy", "Behavioural Accuracy", "行为准确性", "BA"},
        {"Emotional Expression", "情感表达", "EE"},
        {"Personality Traits", "性格特征", "PT"},
        {"Immersion", "沉浸感", "IM"},
        {"Adaptability", "适应性", "AD"},
        {"Behavioral Coherence", "Behavioural Coherence", "行为连贯性", "BC"},
    }};
    MetricScores s;
    for (auto m : kAllMetrics) {
        auto v = find_labeled_number(reply, aliases[static_cast<std::size_t>(m)], short_name(m));
        if (!v) fail("missing metric " + std::string(short_name(m)));
        if (!valid_score(*v)) fail(std::string(short_name(m)) + " score " + text::trim(std::to_string(*v)) +
                                   " not in [1,5] at 0.5 steps");
        s[m] = *v;
    }
    return s;
}

SceneQuality scene_quality(std::string_view reply, bool extracted) {
    auto get = [&](const std::vector<std::string>& aliases, const std::string& label) {
        auto v = find_labeled_number(reply, aliases, "");
        if (!v) fail("missing " + label);
        if (!valid_score(*v)) fail(label + " score out of range");
        return *v;
    };
    SceneQuality q;
    if (!extracted) q.creativity = get({"Creativity", "创造性", "创意"}, "Creativity");
    q.coherence = get({"Coherence", "连贯性"}, "Coherence");
    q.conformity = get({"Conformity", "一致性", "契合度"}, "Conformity");
    q.detail = get({"Detail", "细节"}, "Detail");
    return q;
}

std::optional<std::string> rewrite(std::string_view reply) {
    const std::string t = text::trim(reply);
    if (t.empty()) fail("empty rewrite");
    if (t == prompts::kKeepMarker || text::iequals(text::strip_decoration(t), "KEEP")) return std::nullopt;
    auto f = text::parse_labeled(t, {{"revised", {"Revised Action", "修改后的行动"}}});
    return require(f, "revised", "Revised Action");
}

}  // namespace stagecraft::parse
