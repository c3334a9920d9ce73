#include "stagecraft/simulated.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "stagecraft/prompts.hpp"
#include "stagecraft/text.hpp"

namespace stagecraft {

namespace {

using Rng = std::mt19937_64;

template <std::size_t N>
std::string choose(Rng& rng, const std::array<const char*, N>& bank) {
    return bank[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

double unit(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

bool is_zh(const std::string& prompt) { return prompt.find("：") != std::string::npos; }

std::vector<std::string> lines_of(const std::string& s) { return text::split(s, "\n"); }

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

// Value of the first line that starts with one of the labels.
std::string field(const std::string& prompt, std::initializer_list<std::string_view> labels) {
    for (const auto& line : lines_of(prompt)) {
        for (auto label : labels) {
            if (starts_with(line, label)) return text::trim(line.substr(label.size()));
        }
    }
    return "";
}

// Lines strictly between the first line starting with `from` and the next
// line starting with `to`.
std::string section(const std::string& prompt, std::string_view from, std::string_view to) {
    std::string out;
    bool inside = false;
    for (const auto& line : lines_of(prompt)) {
        if (!inside) {
            if (starts_with(line, from)) inside = true;
            continue;
        }
        if (!to.empty() && starts_with(line, to)) break;
        out += line + "\n";
    }
    return text::trim(out);
}

std::string strip_period(std::string s) {
    s = text::trim(s);
    while (!s.empty() && (s.back() == '.' || s.back() == '!')) s.pop_back();
    if (s.size() >= 3 && s.substr(s.size() - 3) == "。") s.resize(s.size() - 3);
    return s;
}

// 0, 1 or 2: how much texture a given model puts into its actions.
int model_detail(const std::string& model_id) { return static_cast<int>(text::fnv1a64(model_id) % 3); }

constexpr std::array<const char*, 8> kVerbsEn{"edges toward", "circles around", "studies", "reaches for",
                                              "steps past", "braces against", "gestures at", "turns toward"};
constexpr std::array<const char*, 6> kObjectsEn{"the nearest doorway", "the low table", "the shadowed wall",
                                                "the open ground", "the guarded gate", "the flickering light"};
constexpr std::array<const char*, 5> kMannersEn{
    "keeping a wary eye on the others", "jaw set with resolve", "moving quietly so as not to draw notice",
    "testing each step before committing weight", "one hand resting near a weapon"};
constexpr std::array<const char*, 5> kLinesEn{
    "\"We settle this here, before anyone else arrives.\"", "\"Stand aside. I will not ask twice.\"",
    "\"You have no idea what you are meddling with.\"", "\"Tell me the truth, and I may yet listen.\"",
    "\"Enough talk. Show me what you intend.\""};
constexpr std::array<const char*, 6> kVerbsZh{"缓步走向", "绕到", "仔细打量", "伸手去够", "侧身越过", "转身面向"};
constexpr std::array<const char*, 6> kObjectsZh{"最近的门口", "矮桌旁", "阴影中的墙边", "空地中央", "守卫森严的大门",
                                                "摇曳的灯火"};
constexpr std::array<const char*, 5> kMannersZh{"警惕地留意着其他人", "神情坚定", "脚步放轻以免引人注意",
                                                "每一步都先试探再落脚", "一只手按在兵器附近"};
constexpr std::array<const char*, 5> kLinesZh{"“此事今日就在这里了结。”", "“让开，我不会说第二遍。”",
                                              "“你根本不知道自己在招惹什么。”", "“说实话，我或许还肯听。”",
                                              "“少废话，亮出你的本事。”"};

std::string character_name(const std::string& prompt) { return field(prompt, {"Character Name: ", "角色名："}); }

std::string act(Rng& rng, const std::string& name, int detail, bool zh, bool allow_speech) {
    if (allow_speech && unit(rng) < 0.25) return zh ? choose(rng, kLinesZh) : choose(rng, kLinesEn);
    if (zh) {
        std::string out = name;
        if (detail >= 1) out += choose(rng, kMannersZh) + "，";
        out += choose(rng, kVerbsZh) + choose(rng, kObjectsZh);
        if (detail >= 2) out += "，" + choose(rng, kMannersZh);
        return out + "。";
    }
    std::string out = name + " " + choose(rng, kVerbsEn) + " " + choose(rng, kObjectsEn);
    if (detail >= 1) out += ", " + choose(rng, kMannersEn);
    if (detail >= 2) out += " and " + choose(rng, kMannersEn);
    return out + ".";
}

std::string reaction(Rng& rng, const std::string& name, int detail, bool zh) {
    constexpr std::array<const char*, 5> en{"raises an arm to ward off the pressure", "steps back to steady their footing",
                                            "turns sharply to face the source", "drops into a guarded crouch",
                                            "catches the edge of the nearest surface for balance"};
    constexpr std::array<const char*, 5> zhb{"抬臂挡住来势", "后退半步稳住身形", "猛地转身直面来者", "压低身子摆出防御姿态",
                                             "扶住身旁的物件稳住平衡"};
    if (zh) {
        std::string out = name + choose(rng, zhb);
        if (detail >= 1) out += "，" + choose(rng, kMannersZh);
        return out + "。";
    }
    std::string out = name + " " + choose(rng, en);
    if (detail >= 1) out += ", " + choose(rng, kMannersEn);
    return out + ".";
}

std::string influence_reply(Rng& rng, const std::string& prompt, bool zh) {
    const auto actor = field(prompt, {"Actor: ", "行动者："});
    const auto action = field(prompt, {"Action: ", "行动："});
    std::vector<std::string> others;
    for (const auto& n : text::split(field(prompt, {"Characters: ", "角色："}), ", ")) {
        auto t = text::trim(n);
        if (!t.empty() && t != actor) others.push_back(t);
    }
    std::string target = actor;
    for (const auto& o : others) {
        if (action.find(o) != std::string::npos) target = o;
    }
    if (target == actor && !others.empty() && unit(rng) < 0.75) {
        target = others[std::uniform_int_distribution<std::size_t>(0, others.size() - 1)(rng)];
    }
    if (target == actor) {
        return actor + ";;" + actor + (zh ? ";;" + actor + "的举动没有直接波及旁人。" : ";;The move affects no one else directly.");
    }
    constexpr std::array<const char*, 4> en{"is pressed backward by the sudden approach",
                                            "feels the space around them close in", "has their path abruptly cut off",
                                            "is forced to shift weight to stay balanced"};
    constexpr std::array<const char*, 4> zhb{"被突然的逼近压得后退", "感到周身的空间骤然收紧", "的去路被骤然截断",
                                             "不得不调整重心以保持平衡"};
    if (zh) return actor + ";;" + target + ";;" + target + choose(rng, zhb) + "。";
    return actor + ";;" + target + ";;" + target + " " + choose(rng, en) + ".";
}

std::pair<std::string, std::string> split_actor(const std::string& line) {
    auto pos = line.find(" - ");
    if (pos == std::string::npos) return {"", line};
    return {line.substr(0, pos), line.substr(pos + 3)};
}

std::string result_reply(Rng& rng, const std::string& prompt, bool zh) {
    const auto actor = split_actor(field(prompt, {"Action: ", "行动："})).first;
    const auto reactor = split_actor(field(prompt, {"Reaction: ", "回应："})).first;
    constexpr std::array<const char*, 4> en{
        "{reactor} absorbs the pressure and holds ground, while {actor} is forced to rethink the approach.",
        "The two collide in a brief standoff; {actor} gains a half step of space and {reactor} gives it up warily.",
        "{reactor} deflects the advance, leaving {actor} off balance for a heartbeat.",
        "Neither yields: {actor} and {reactor} end up face to face with the distance between them gone."};
    constexpr std::array<const char*, 4> zhb{"{reactor}顶住了压力站稳脚跟，{actor}不得不重新考虑对策。",
                                             "两人短暂僵持，{actor}抢得半步空间，{reactor}戒备地让开。",
                                             "{reactor}化解了这一逼近，{actor}一时失去平衡。",
                                             "双方互不相让，{actor}与{reactor}已近在咫尺。"};
    return text::render(zh ? choose(rng, zhb) : choose(rng, en), {{"actor", actor}, {"reactor", reactor}});
}

std::string update_character_reply(Rng& rng, const std::string& prompt, bool zh) {
    const auto name = character_name(prompt);
    constexpr std::array<const char*, 4> pos_en{"a few paces from where the exchange took place",
                                                "near the edge of the open space, back to the wall",
                                                "at the center of the scene, facing the others",
                                                "beside the nearest cover, half turned away"};
    constexpr std::array<const char*, 4> state_en{"alert and wary, breathing hard", "tense but composed",
                                                  "shaken, muscles still braced", "focused and determined"};
    constexpr std::array<const char*, 4> pos_zh{"离交锋处几步远的地方", "空地边缘，背靠墙壁", "场地中央，面对众人",
                                                "最近的掩体旁，半侧着身"};
    constexpr std::array<const char*, 4> state_zh{"警觉戒备，呼吸急促", "紧张但镇定", "心有余悸，肌肉仍然紧绷",
                                                  "专注而坚定"};
    if (zh) return "位置：" + name + "在" + choose(rng, pos_zh) + "\n状态：" + choose(rng, state_zh);
    return "Position: " + name + " stands " + choose(rng, pos_en) + "\nState: " + choose(rng, state_en);
}

std::string update_scene_reply(Rng& rng, const std::string& prompt, bool zh) {
    const auto time = field(prompt, {"Time: ", "时间："});
    const auto location = field(prompt, {"Location: ", "地点："});
    auto description = field(prompt, {"Description: ", "描述："});
    const std::string mark = zh ? "地上留下了几道凌乱的痕迹。" : " Scuffed marks now show where the characters clashed.";
    if (unit(rng) < 0.3 && description.find(mark) == std::string::npos) description += mark;
    if (zh) return "时间：" + time + "\n地点：" + location + "\n描述：" + description;
    return "Time: " + time + "\nLocation: " + location + "\nDescription: " + description;
}

std::string self_belief_reply(Rng& rng, const std::string& prompt, bool zh) {
    const auto name = character_name(prompt);
    if (zh) {
        constexpr std::array<const char*, 3> b{"我身体无碍，但局势比预想的紧张。", "我有些疲惫，不过还能应付。",
                                               "我处境不利，必须更加小心。"};
        return "信念：" + choose(rng, b) + "\n欲望：眼下要稳住局面，长远来看要守住" + name +
               "一直坚持的东西。\n意图：先观察对方的下一步，再寻找破绽主动出手。";
    }
    constexpr std::array<const char*, 3> b{"I am unhurt, but this is tenser than I expected.",
                                           "I am tired, yet I can still hold my own.",
                                           "I am at a disadvantage and must be careful."};
    return "Belief: " + choose(rng, b) + "\nDesire: Right now I want to steady the situation; in the long run I want to protect what " +
           name + " has always stood for.\nIntention: Watch the others' next move, then look for an opening and act first.";
}

std::string env_belief_reply(Rng& rng, const std::string& prompt, bool zh) {
    (void)prompt;
    if (zh) {
        constexpr std::array<const char*, 3> p{"其他人各怀心思，不能全信。", "对方看似强硬，实则也有顾虑。",
                                               "有人可能成为盟友，但需要试探。"};
        return "对他人的看法：" + choose(rng, p) + "\n对场景的理解：这里地形狭窄，既是阻碍也是机会。\n对行动的影响：我会谨慎推进，避免正面硬拼。";
    }
    constexpr std::array<const char*, 3> p{"The others each have their own agenda; I cannot trust them fully.",
                                           "They look firm, but they have doubts of their own.",
                                           "One of them might become an ally, but I need to test that."};
    return "Perception of Others: " + choose(rng, p) +
           "\nUnderstanding of the Scene: The ground here is cramped, which is both an obstacle and an opportunity.\n"
           "Influence on Actions: I will advance carefully and avoid a head-on clash.";
}

// Mean token length of the actions shown in a rendered trajectory.
double action_detail(const std::string& prompt) {
    double total = 0;
    int n = 0;
    for (const auto& line : lines_of(prompt)) {
        auto t = text::trim(line);
        for (std::string_view marker : {"): ", "）："}) {
            if ((starts_with(t, "Action (") || starts_with(t, "行动（")) && t.find(marker) != std::string::npos) {
                total += static_cast<double>(text::estimate_tokens(t.substr(t.find(marker) + marker.size())));
                ++n;
                break;
            }
        }
    }
    return n == 0 ? 0.0 : total / n;
}

std::string score_reply(Rng& rng, const std::string& prompt) {
    const double base = 2.5 + std::min(2.0, action_detail(prompt) / 12.0);
    std::string out;
    for (auto m : kAllMetrics) {
        double v = base + 0.5 * std::uniform_int_distribution<int>(-1, 1)(rng);
        v = std::clamp(std::round(v * 2.0) / 2.0, 1.0, 5.0);
        char buf[16];
        std::snprintf(buf, sizeof buf, "%g", v);
        out += std::string(short_name(m)) + ": " + buf + "\n";
    }
    return out;
}

std::string critique_reply(Rng& rng, const std::string& prompt, bool zh) {
    const auto detail = action_detail(prompt);
    const auto name = field(prompt, {"Character: ", "角色："});
    const int step = std::uniform_int_distribution<int>(1, 3)(rng);
    if (zh) {
        return "扮演" + name + "的表现" + (detail > 12 ? "细节丰富" : "略显单薄") + "。第" + std::to_string(step) +
               "步的行动与人物设定基本一致，但情感层次可以更鲜明。";
    }
    return "The portrayal of " + name + " is " + (detail > 12 ? "richly detailed" : "somewhat thin") + ". Step " +
           std::to_string(step) + " fits the profile, though the emotional shading could be stronger.";
}

// --- scene crafting ---------------------------------------------------------

std::vector<std::string> source_names(const std::string& source) {
    for (const auto& line : lines_of(source)) {
        for (std::string_view label : {"Characters:", "人物："}) {
            if (!starts_with(line, label)) continue;
            std::string rest = line.substr(label.size());
            std::vector<std::string> names;
            for (auto sep : {std::string("、"), std::string("，")}) {
                std::string::size_type p;
                while ((p = rest.find(sep)) != std::string::npos) rest.replace(p, sep.size(), ",");
            }
            for (const auto& n : text::split(rest, ",")) {
                auto t = text::trim(n);
                if (!t.empty()) names.push_back(t);
            }
            if (!names.empty()) return names;
        }
    }
    static const std::set<std::string> stop{"The", "A", "An", "He", "She", "They", "It", "In", "On", "At", "But",
                                            "And", "When", "Then", "His", "Her", "Their", "There", "This", "That",
                                            "As", "With", "Time", "Location", "Characters", "Title"};
    std::map<std::string, int> counts;
    std::vector<std::string> order;
    std::string word;
    auto flush = [&] {
        if (word.size() > 1 && std::isupper(static_cast<unsigned char>(word[0])) && !stop.count(word)) {
            if (counts[word]++ == 0) order.push_back(word);
        }
        word.clear();
    };
    for (char c : source) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            word += c;
        } else {
            flush();
        }
    }
    flush();
    std::vector<std::string> names;
    for (const auto& w : order) {
        if (counts[w] >= 2) names.push_back(w);
        if (names.size() == 3) break;
    }
    return names;
}

std::string first_sentence_with(const std::string& source, const std::string& name) {
    for (const auto& line : lines_of(source)) {
        if (line.find(':') != std::string::npos && line.find(':') < 16) continue;
        for (const auto& s : text::split(line, ". ")) {
            if (s.find(name) != std::string::npos) return strip_period(s) + ".";
        }
    }
    return "";
}

std::string screenwrite_reply(Rng& rng, const std::string& prompt, bool generate, bool zh) {
    const auto title = field(prompt, {"You are a screenwriter. Source work: ", "你是一名编剧。原著："});
    const auto source = section(prompt, zh ? "原文：" : "Source text:", zh ? (generate ? "为这些角色" : "从原文中") :
                                                                           (generate ? "Invent original" : "Extract scene"));
    auto names = source_names(source);
    if (names.size() < 2) names = zh ? std::vector<std::string>{"主角", "对手"} : std::vector<std::string>{"Protagonist", "Rival"};
    auto time = field(source, {"Time:", "时间："});
    auto location = field(source, {"Location:", "地点："});
    if (time.empty()) time = zh ? "黄昏" : "Dusk";
    if (location.empty()) location = zh ? "一处僻静的庭院" : "A quiet courtyard";
    std::string description;
    if (generate) {
        constexpr std::array<const char*, 3> en{"A narrow bridge over a flooded ravine, slick with rain.",
                                                "An abandoned watchtower whose stairs have half collapsed.",
                                                "A crowded night market lit by paper lanterns."};
        constexpr std::array<const char*, 3> zhb{"一座架在涨水峡谷上的窄桥，桥面湿滑。", "一座楼梯已塌了一半的废弃瞭望塔。",
                                                 "一处挂满纸灯笼、人声嘈杂的夜市。"};
        description = zh ? choose(rng, zhb) : choose(rng, en);
    } else {
        for (const auto& line : lines_of(source)) {
            auto t = text::trim(line);
            if (t.empty() || t.find(':') < 16 || t.find("：") != std::string::npos) continue;
            description = t;
            break;
        }
        if (description.empty()) description = zh ? "四下寂静，只有风声。" : "The place is silent except for the wind.";
    }
    std::string block = "Title: " + title + "\nTime: " + time + "\nLocation: " + location +
                        "\nDescription: " + description + "\nCharacters:\n";
    for (const auto& n : names) {
        auto profile = zh ? std::string() : first_sentence_with(source, n);
        if (profile.empty()) profile = zh ? n + "，出自《" + title + "》。" : n + " from " + title + ".";
        block += "- Name: " + n + " | Role: " + (zh ? "主要人物" : "principal character") + " | Profile: " + profile +
                 " | Position: " + "| State: \n";
    }
    return block;
}

std::string direct_reply(Rng& rng, const std::string& prompt, bool zh) {
    const auto draft = section(prompt, zh ? "草稿：" : "Draft:", zh ? "完善草稿" : "Refine the draft");
    constexpr std::array<const char*, 3> pos_en{"at the near side of the scene", "by the far wall", "in the middle of the open space"};
    constexpr std::array<const char*, 3> state_en{"alert and guarded", "calm but watchful", "restless and eager"};
    constexpr std::array<const char*, 3> pos_zh{"场景近侧", "远处墙边", "空地中间"};
    constexpr std::array<const char*, 3> state_zh{"警觉戒备", "平静而留心", "焦躁急切"};
    std::string out;
    for (const auto& raw : lines_of(draft)) {
        auto line = text::trim(raw);
        if (!starts_with(line, "- Name:")) {
            if (!line.empty()) out += line + "\n";
            continue;
        }
        std::vector<std::string> parts;
        for (const auto& p : text::split(line.substr(2), "|")) parts.push_back(text::trim(p));
        std::string rebuilt = "-";
        for (std::size_t i = 0; i < parts.size(); ++i) {
            auto& p = parts[i];
            if (p == "Position:") p += " " + (zh ? choose(rng, pos_zh) : choose(rng, pos_en));
            if (p == "State:") p += " " + (zh ? choose(rng, state_zh) : choose(rng, state_en));
            rebuilt += (i ? " | " : " ") + p;
        }
        out += rebuilt + "\n";
    }
    return out;
}

std::string judge_scene_reply(Rng& rng, const std::string& prompt, bool zh) {
    const auto block = section(prompt, zh ? "场景：" : "Scene:", zh ? "从以下方面" : "Rate this scene");
    int characters = 0;
    int blanks = 0;
    for (const auto& raw : lines_of(block)) {
        auto line = text::trim(raw);
        if (starts_with(line, "- Name:")) ++characters;
        for (const auto& p : text::split(line, "|")) {
            auto t = text::trim(p);
            if (!t.empty() && t.back() == ':') ++blanks;
        }
        if (line.size() > 0 && line.back() == ':' && line != "Characters:") ++blanks;
    }
    auto draw = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const int coherence = (characters < 2 || characters > 4) ? 2 : draw(3, 5);
    const int conformity = draw(3, 5);
    const int detail = std::max(1, 5 - blanks);
    std::string out;
    bool wants_creativity = false;
    for (const auto& line : lines_of(prompt)) {
        if (starts_with(line, "Creativity:") || starts_with(line, "Creativity：")) wants_creativity = true;
    }
    if (wants_creativity) out += "Creativity: " + std::to_string(draw(2, 5)) + "\n";
    out += "Coherence: " + std::to_string(coherence) + "\nConformity: " + std::to_string(conformity) +
           "\nDetail: " + std::to_string(detail) + "\n";
    return out;
}

std::string reflect_critique_reply(Rng& rng, const std::string& prompt, bool zh) {
    const int step = std::uniform_int_distribution<int>(1, 2)(rng);
    (void)prompt;
    if (zh) return "第" + std::to_string(step) + "步的行动略显平淡，可以更好地体现人物性格。";
    return "Step " + std::to_string(step) + " is a little flat and could show more of the character's temperament.";
}

std::string reflect_rewrite_reply(Rng& rng, const std::string& prompt, bool zh) {
    if (unit(rng) < 0.35) return prompts::kKeepMarker;
    const auto original = strip_period(field(prompt, {"Original action: ", "原始行动："}));
    if (zh) return "Revised Action: " + original + "，动作更加沉稳果断。";
    return "Revised Action: " + original + ", with slower and more deliberate care.";
}

}  // namespace

ChatResponse SimulatedBackend::chat(const ChatRequest& request) {
    std::string prompt;
    for (const auto& m : request.messages) {
        if (m.role == ChatRole::user) prompt = m.content;
    }
    Rng rng(text::fnv1a64(request.model_id + "\x1f" + request.purpose + "\x1f" + prompt));
    const bool zh = is_zh(prompt);
    const auto& p = request.purpose;
    namespace pp = prompts::purpose;
    std::string reply;
    if (p == pp::kAction) {
        reply = act(rng, character_name(prompt), model_detail(request.model_id), zh, true);
    } else if (p == pp::kDialogue) {
        reply = zh ? choose(rng, kLinesZh) : choose(rng, kLinesEn);
    } else if (p == pp::kReaction) {
        reply = reaction(rng, character_name(prompt), model_detail(request.model_id), zh);
    } else if (p == pp::kSelfBelief) {
        reply = self_belief_reply(rng, prompt, zh);
    } else if (p == pp::kEnvBelief) {
        reply = env_belief_reply(rng, prompt, zh);
    } else if (p == pp::kInfluence) {
        reply = influence_reply(rng, prompt, zh);
    } else if (p == pp::kResult) {
        reply = result_reply(rng, prompt, zh);
    } else if (p == pp::kUpdateCharacter) {
        reply = update_character_reply(rng, prompt, zh);
    } else if (p == pp::kUpdateScene) {
        reply = update_scene_reply(rng, prompt, zh);
    } else if (p == pp::kCritique) {
        reply = critique_reply(rng, prompt, zh);
    } else if (p == pp::kScore) {
        reply = score_reply(rng, prompt);
    } else if (p == pp::kScreenwriteExtract || p == pp::kScreenwriteGenerate) {
        reply = screenwrite_reply(rng, prompt, p == pp::kScreenwriteGenerate, zh);
    } else if (p == pp::kDirect) {
        reply = direct_reply(rng, prompt, zh);
    } else if (p == pp::kJudgeScene) {
        reply = judge_scene_reply(rng, prompt, zh);
    } else if (p == pp::kReflectCritique) {
        reply = reflect_critique_reply(rng, prompt, zh);
    } else if (p == pp::kReflectRewrite) {
        reply = reflect_rewrite_reply(rng, prompt, zh);
    } else {
        reply = zh ? "好的。" : "Understood.";
    }
    std::int64_t input = 0;
    for (const auto& m : request.messages) input += text::estimate_tokens(m.content);
    return ChatResponse{reply, input, text::estimate_tokens(reply)};
}

}  // namespace stagecraft
