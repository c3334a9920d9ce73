#include "stagecraft/prompts.hpp"

#include "stagecraft/text.hpp"

namespace stagecraft::prompts {

namespace {

using Vars = std::map<std::string, std::string>;

const char* pick(Language lang, const char* en, const char* zh) { return lang == Language::zh ? zh : en; }

std::string or_none(const std::string& s, Language lang) {
    if (!text::trim(s).empty()) return s;
    return lang == Language::zh ? "（暂无）" : "(none yet)";
}

Vars character_vars(const CharacterContext& ctx) {
    const auto lang = ctx.language;
    return Vars{{"name", ctx.profile.name},
                {"role", ctx.profile.role},
                {"profile", ctx.profile.profile},
                {"position", or_none(ctx.profile.position, lang)},
                {"state", or_none(ctx.profile.state, lang)},
                {"belief", or_none(ctx.self_belief.belief, lang)},
                {"desire", or_none(ctx.self_belief.desire, lang)},
                {"intention", or_none(ctx.self_belief.intention, lang)},
                {"others", or_none(ctx.env_belief.perception_of_others, lang)},
                {"scene_view", or_none(ctx.env_belief.understanding_of_scene, lang)},
                {"time", ctx.environment.time},
                {"location", ctx.environment.location},
                {"description", ctx.environment.description}};
}

constexpr const char* kCharacterHeaderEn = R"(Character Name: {name}
Role: {role}
Profile: {profile}
Position: {position}
State: {state}
Self-belief: {belief}
Goals: {desire}
Plans: {intention}
View of others: {others}
Time: {time}
Location: {location}
)";

constexpr const char* kCharacterHeaderZh = R"(角色名：{name}
身份：{role}
简介：{profile}
位置：{position}
状态：{state}
自我信念：{belief}
目标：{desire}
计划：{intention}
对他人的看法：{others}
时间：{time}
地点：{location}
)";

std::string character_header(const CharacterContext& ctx) {
    return text::render(pick(ctx.language, kCharacterHeaderEn, kCharacterHeaderZh), character_vars(ctx));
}

}  // namespace

std::string observation_digest(const Environment& env, const std::vector<std::string>& memories, Language lang) {
    std::string out = env.description + "\n";
    out += pick(lang, "Recent memories:", "近期记忆：");
    if (memories.empty()) {
        out += pick(lang, " none", "无");
        return out;
    }
    for (std::size_t i = 0; i < memories.size(); ++i) {
        out += "\n" + std::to_string(i + 1) + ". " + memories[i];
    }
    return out;
}

std::string action(const CharacterContext& ctx, const std::string& observation) {
    constexpr const char* en = R"(Observation:
{observation}

From {name}'s profile, the memories above and the current scene, state the single next action {name} performs. Keep it in character and grounded in the physical setting, and make it something anyone present could see. Do not repeat an earlier action, and leave out inner thoughts. The action should move the scene or {name}'s goals forward.
Reply with the action only.)";
    constexpr const char* zh = R"(观察：
{observation}

根据{name}的人物设定、上述记忆和当前场景，写出{name}接下来要做的一个具体行动。行动要符合人物性格，贴合所处的物理环境，并且在场的人都能看到。不要重复之前的行动，也不要写内心活动。这个行动应当推动情节或{name}的目标向前发展。
只回复行动本身。)";
    auto vars = character_vars(ctx);
    vars["observation"] = observation;
    return character_header(ctx) + "\n" + text::render(pick(ctx.language, en, zh), vars);
}

std::string dialogue(const CharacterContext& ctx, const std::string& observation) {
    constexpr const char* en = R"(Observation:
{observation}

Write the line {name} would say right now. Let {name}'s personality, role in the story, the observation and recent memories set its tone and content. Reply with the spoken line in quotation marks.)";
    constexpr const char* zh = R"(观察：
{observation}

写出{name}此刻会说的一句话。语气和内容要体现{name}的性格、在故事中的身份、当前观察和近期记忆。用引号给出这句台词。)";
    auto vars = character_vars(ctx);
    vars["observation"] = observation;
    return character_header(ctx) + "\n" + text::render(pick(ctx.language, en, zh), vars);
}

std::string reaction(const CharacterContext& ctx, const std::string& observation) {
    constexpr const char* en = R"(Observation:
{observation}

Something has just affected {name}. Describe one visible action {name} takes in response, consistent with {name}'s personality, position and state and with what was observed. Keep it external and observable; no dialogue or inner thoughts.
Reply with the reaction only.)";
    constexpr const char* zh = R"(观察：
{observation}

{name}刚刚受到了影响。描述{name}做出的一个可见的回应动作，要符合{name}的性格、位置和状态，并与观察到的情况相符。只写外在可见的动作，不写对白或内心活动。
只回复回应动作本身。)";
    auto vars = character_vars(ctx);
    vars["observation"] = observation;
    return character_header(ctx) + "\n" + text::render(pick(ctx.language, en, zh), vars);
}

std::string self_belief(const CharacterContext& ctx, const std::string& observation) {
    constexpr const char* en = R"(Description: {description}
This round:
{observation}

Speak as {name}, in the first person. Given who you are, the setting, what happened this round and your memories, state your self-belief in three labeled parts:
Belief: how you see your situation and condition right now (injuries, movement, energy, abilities).
Desire: your short- and long-term goals.
Intention: the concrete actions you plan next and how you will handle obstacles.
Keep each part brief.)";
    constexpr const char* zh = R"(描述：{description}
本轮经历：
{observation}

以{name}的第一人称作答。结合你的身份、环境、本轮经历和记忆，分三部分写出你的自我信念：
信念：你此刻如何看待自己的处境和身体状况（伤势、行动、体力、能力变化）。
欲望：你的短期和长期目标。
意图：你接下来具体打算怎么做，以及如何应对阻碍。
每部分简短作答。)";
    auto vars = character_vars(ctx);
    vars["observation"] = observation;
    return character_header(ctx) + text::render(pick(ctx.language, en, zh), vars);
}

std::string env_belief(const CharacterContext& ctx, const std::vector<CharacterProfile>& others) {
    std::string roster;
    for (const auto& o : others) {
        roster += "- " + o.name + " (" + o.role + "): " + o.position + "; " + o.state + "\n";
    }
    if (roster.empty()) roster = pick(ctx.language, "- nobody else\n", "- 无其他角色\n");
    constexpr const char* en = R"(Description: {description}
Other Characters:
{roster}
Speak as {name}, in the first person, and describe how you read your surroundings in three labeled parts:
Perception of Others: what you make of the other characters' intentions, relationships and influence on you.
Understanding of the Scene: what this place and moment mean for you, including challenges and opportunities.
Influence on Actions: how these views shape what you will do next.
Keep it concise.)";
    constexpr const char* zh = R"(描述：{description}
其他角色：
{roster}
以{name}的第一人称，分三部分描述你对环境的认识：
对他人的看法：你如何理解其他角色的意图、关系以及他们对你的影响。
对场景的理解：此时此地对你意味着什么，有哪些挑战和机会。
对行动的影响：这些认识如何左右你接下来的行动。
请简要作答。)";
    auto vars = character_vars(ctx);
    vars["roster"] = roster;
    return character_header(ctx) + text::render(pick(ctx.language, en, zh), vars);
}

std::string influence(const Environment& env, const Action& action, const std::vector<CharacterProfile>& roster,
                      Language lang) {
    std::string names;
    std::string states;
    for (std::size_t i = 0; i < roster.size(); ++i) {
        if (i) names += ", ";
        names += roster[i].name;
        states += "- " + roster[i].name + ": " + roster[i].position + "; " + roster[i].state + "\n";
    }
    constexpr const char* en = R"(Scene: {description}
Characters: {names}
Character states:
{states}Action: {action}
Actor: {actor}
Work out which single character from 'Characters' is physically affected by this action.
1. The target must be one name from the 'Characters' list; choose exactly one.
2. Describe the physical act the actor performs and its concrete effect on the target's body or circumstances.
3. If nobody listed is physically affected, give the actor's own name as the target.
4. Answer on one line in exactly this format: [Actor];;[Target Name];;[Detailed Physical Impact of {actor} on Target]
Be brief and precise.)";
    constexpr const char* zh = R"(场景：{description}
角色：{names}
角色状态：
{states}行动：{action}
行动者：{actor}
判断“角色”列表中哪一个角色受到此行动的实际物理影响。
1. 目标必须是“角色”列表中的一个名字，只能选一个。
2. 描述行动者的具体动作及其对目标身体或处境的实际影响。
3. 如果列表中没有人受到物理影响，则把行动者自己的名字作为目标。
4. 用一行作答，严格使用格式：[行动者];;[目标名];;[{actor}对目标的具体物理影响]
简洁准确。)";
    return text::render(pick(lang, en, zh), Vars{{"description", env.description},
                                                 {"names", names},
                                                 {"states", states},
                                                 {"action", action.text},
                                                 {"actor", action.actor}});
}

std::string result(const Environment& env, const Action& action, const Action& reaction,
                   const CharacterProfile& actor, const CharacterProfile& reactor, Language lang) {
    constexpr const char* en = R"(Scene: {description}
{actor} ({actor_role}): {actor_state}
{reactor} ({reactor_role}): {reactor_state}
Action: {actor} - {action}
Reaction: {reactor} - {reaction}
Act as an impartial narrator ruling on this exchange. State, in a few sentences, what immediately results from the two actions meeting, as cause and effect at this exact moment. Stay within what the characters and actions support; no speculation and no later consequences. Do not restate the actions themselves.)";
    constexpr const char* zh = R"(场景：{description}
{actor}（{actor_role}）：{actor_state}
{reactor}（{reactor_role}）：{reactor_state}
行动：{actor} - {action}
回应：{reactor} - {reaction}
作为公正的旁白裁定这次交锋。用几句话说明两个动作相遇后此刻立即产生的结果，写清因果。只依据人物和动作本身，不做推测，也不写后续发展。不要复述动作本身。)";
    return text::render(pick(lang, en, zh), Vars{{"description", env.description},
                                                 {"actor", actor.name},
                                                 {"actor_role", actor.role},
                                                 {"actor_state", actor.state},
                                                 {"reactor", reactor.name},
                                                 {"reactor_role", reactor.role},
                                                 {"reactor_state", reactor.state},
                                                 {"action", action.text},
                                                 {"reaction", reaction.text}});
}

std::string update_character(const CharacterProfile& character, const std::string& observation, Language lang) {
    constexpr const char* en = R"(Observation: {observation}
Character Name: {name}
Backstory: {profile}
Previous position: {position}
Previous state: {state}
Summarize where {name} is now and in what condition, showing how the latest interaction changed things. Use exactly these two labeled lines:
Position: [{name}'s exact position, with spatial detail from the setting]
State: [{name}'s current emotional and physical condition after recent events])";
    constexpr const char* zh = R"(观察：{observation}
角色名：{name}
背景：{profile}
之前的位置：{position}
之前的状态：{state}
概括{name}现在所处的位置和状况，体现最近的互动带来的变化。严格使用以下两行格式：
位置：[{name}的确切位置，结合环境中的空间细节]
状态：[{name}经历最近事件后的情绪与身体状况])";
    return text::render(pick(lang, en, zh), Vars{{"observation", observation},
                                                 {"name", character.name},
                                                 {"profile", character.profile},
                                                 {"position", character.position},
                                                 {"state", character.state}});
}

std::string update_scene(const Environment& env, const std::vector<std::string>& observations, Language lang) {
    std::string obs;
    for (const auto& o : observations) obs += "- " + o + "\n";
    constexpr const char* en = R"(Current scene:
Time: {time}
Location: {location}
Description: {description}
Observations:
{observations}
Update the scene for physical changes only. Keep time, location and description exactly as they are unless an observation clearly changes them. The description covers the physical setting and never character actions. Keep the same structure and add no new fields or commentary.
Output:
Time:
Location:
Description:)";
    constexpr const char* zh = R"(当前场景：
时间：{time}
地点：{location}
描述：{description}
观察：
{observations}
只根据物理环境的变化更新场景。除非观察明确表明发生了变化，否则时间、地点和描述保持原样。描述只写物理环境，不写角色行为。保持原有结构，不要增加新字段或额外说明。
输出：
时间：
地点：
描述：)";
    return text::render(pick(lang, en, zh), Vars{{"time", env.time},
                                                 {"location", env.location},
                                                 {"description", env.description},
                                                 {"observations", obs}});
}

std::string render_trajectory(const Trajectory& t, const std::string& title, Language lang) {
    std::string out;
    if (lang == Language::zh) {
        out += "作品：" + title + "\n场景：" + t.environment.time + "，" + t.environment.location + "。" +
               t.environment.description + "\n角色：" + t.character.name + "（" + t.character.role + "）\n简介：" +
               t.character.profile + "\n行为：\n";
    } else {
        out += "Title: " + title + "\nScene: " + t.environment.time + ", " + t.environment.location + ". " +
               t.environment.description + "\nCharacter: " + t.character.name + " (" + t.character.role +
               ")\nProfile: " + t.character.profile + "\nBehavior:\n";
    }
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const auto& s = t.steps[i];
        out += "[" + std::to_string(i + 1) + "] " + pick(lang, "Observation: ", "观察：") + s.observation + "\n";
        out += "    " + std::string(pick(lang, "Action (", "行动（")) + std::string(to_string(s.action.kind)) +
               pick(lang, "): ", "）：") + s.action.text + "\n";
    }
    return out;
}

std::string critique(const Trajectory& t, const std::string& title, Language lang) {
    constexpr const char* en = R"(You are reviewing a role-play performance. Read the character's trajectory below.
{trajectory}
Write a critique of how well the model played {name}: accuracy of knowledge and behavior, emotional expression, personality, immersion, adaptability to events and logical coherence across steps. Point to specific steps. Do not give numeric scores yet.)";
    constexpr const char* zh = R"(你正在评审一段角色扮演表现。请阅读下面的角色轨迹。
{trajectory}
写一段评论，说明模型扮演{name}的效果：知识与行为是否准确、情感表达、性格、沉浸感、对事件的适应以及前后行为的逻辑连贯。请指出具体步骤。暂时不要打分。)";
    return text::render(pick(lang, en, zh),
                        Vars{{"trajectory", render_trajectory(t, title, lang)}, {"name", t.character.name}});
}

std::string score(const Trajectory& t, const std::string& title, const std::string& critique_text, Language lang) {
    constexpr const char* en = R"({trajectory}
Critique:
{critique}

Taking the critique into account, score the performance of {name} on each metric from 1 (poor) to 5 (excellent); half points are allowed.
Knowledge Accuracy (KA): is what the character knows correct for their background?
Behavioral Accuracy (BA): do behavior and speech habits match the character?
Emotional Expression (EE): are emotions vivid and fitting?
Personality Traits (PT): are core traits kept throughout?
Immersion (IM): does the character stay in role?
Adaptability (AD): does the character handle new situations while staying true to itself?
Behavioral Coherence (BC): are actions logically consistent with earlier behavior and context?
Reply with exactly seven lines in this form:
KA: <score>
BA: <score>
EE: <score>
PT: <score>
IM: <score>
AD: <score>
BC: <score>)";
    constexpr const char* zh = R"({trajectory}
评论：
{critique}

参考上述评论，为{name}的表现在每个指标上打分，1分最差，5分最好，可以给半分。
知识准确性（KA）：角色掌握的信息是否符合其背景？
行为准确性（BA）：行为与语言习惯是否符合角色？
情感表达（EE）：情感是否生动贴切？
性格特征（PT）：核心性格是否始终如一？
沉浸感（IM）：角色是否始终在戏中？
适应性（AD）：面对新情况能否应对并保持角色本色？
行为连贯性（BC）：行动是否与之前的行为和情境逻辑一致？
严格按以下七行格式回复：
KA: <分数>
BA: <分数>
EE: <分数>
PT: <分数>
IM: <分数>
AD: <分数>
BC: <分数>)";
    return text::render(pick(lang, en, zh), Vars{{"trajectory", render_trajectory(t, title, lang)},
                                                 {"critique", critique_text},
                                                 {"name", t.character.name}});
}

std::string scene_block(const Scene& scene) {
    std::string out = "Title: " + scene.title + "\nTime: " + scene.environment.time +
                      "\nLocation: " + scene.environment.location +
                      "\nDescription: " + scene.environment.description + "\nCharacters:\n";
    for (const auto& c : scene.characters) {
        out += "- Name: " + c.name + " | Role: " + c.role + " | Profile: " + c.profile +
               " | Position: " + c.position + " | State: " + c.state + "\n";
    }
    return out;
}

namespace {

constexpr const char* kBlockFormat = R"(Title: <work title>
Time: <time or era>
Location: <place>
Description: <physical setting only, no character actions>
Characters:
- Name: <name> | Role: <role> | Profile: <backstory and personality> | Position: <where they stand> | State: <condition>)";

}  // namespace

std::string screenwrite(const std::string& source, const std::string& title, bool generate, int index,
                        Language lang, int attempt) {
    constexpr const char* en_extract = R"(You are a screenwriter. Source work: {title}
Source text:
{source}

Extract scene #{index} from the source: a moment where two to four characters meet and something is at stake. Keep to events the source actually contains. Use this format:
{format})";
    constexpr const char* en_generate = R"(You are a screenwriter. Source work: {title}
Source text:
{source}

Invent original scene #{index} for these characters: a new situation that does not happen in the source but fits its world and logic, with two to four characters. Use this format:
{format})";
    constexpr const char* zh_extract = R"(你是一名编剧。原著：{title}
原文：
{source}

从原文中提取第{index}个场景：两到四个角色相遇、存在冲突或利害关系的时刻。只使用原文中真实发生的事件。字段名保持英文，格式如下：
{format})";
    constexpr const char* zh_generate = R"(你是一名编剧。原著：{title}
原文：
{source}

为这些角色创作第{index}个原创场景：原著中没有发生、但符合其世界观和逻辑的新情境，包含两到四个角色。字段名保持英文，格式如下：
{format})";
    const char* tmpl = generate ? pick(lang, en_generate, zh_generate) : pick(lang, en_extract, zh_extract);
    auto out = text::render(tmpl, Vars{{"title", title},
                                       {"source", source},
                                       {"index", std::to_string(index)},
                                       {"format", kBlockFormat}});
    if (attempt > 1) {
        out += text::render(pick(lang, "\nThis is attempt {n}; an earlier draft was rejected, so take a different angle.",
                                 "\n这是第{n}次尝试，之前的草稿未通过，请换一个角度。"),
                            Vars{{"n", std::to_string(attempt)}});
    }
    return out;
}

std::string direct(const std::string& draft_block, const std::string& title, Language lang) {
    constexpr const char* en = R"(You are a director preparing a scene from {title} for performance.
Draft:
{draft}
Refine the draft: sharpen the key event, make every character's role, profile, position and state concrete, keep two to four characters, and keep the description to the physical setting. Fill in anything missing. Return the full scene in the same format:
{format})";
    constexpr const char* zh = R"(你是一名导演，正在为《{title}》的一个场景做排演准备。
草稿：
{draft}
完善草稿：突出关键事件，让每个角色的身份、简介、位置和状态都具体明确，保留两到四个角色，描述只写物理环境。补全缺失的内容。字段名保持英文，按相同格式返回完整场景：
{format})";
    return text::render(pick(lang, en, zh), Vars{{"title", title}, {"draft", draft_block}, {"format", kBlockFormat}});
}

std::string judge_scene(const std::string& draft_block, const std::string& source, bool extracted, Language lang) {
    constexpr const char* en = R"(Source text:
{source}

Scene:
{draft}
Rate this scene from 1 to 5 on each aspect.
{aspects}Reply with one labeled line per aspect, e.g. "Coherence: 4".)";
    constexpr const char* zh = R"(原文：
{source}

场景：
{draft}
从以下方面为该场景打分，1到5分。
{aspects}每个方面一行，标签保持英文，例如“Coherence: 4”。)";
    std::string aspects;
    if (!extracted) aspects += pick(lang, "Creativity: how original the situation is\n", "Creativity：情境是否新颖\n");
    aspects += pick(lang,
                    "Coherence: whether the scene hangs together logically\n"
                    "Conformity: whether it stays true to the source's characters and world\n"
                    "Detail: how concrete the setting and characters are\n",
                    "Coherence：场景是否逻辑自洽\n"
                    "Conformity：是否忠于原著的人物和世界观\n"
                    "Detail：环境和人物是否具体\n");
    return text::render(pick(lang, en, zh), Vars{{"source", source}, {"draft", draft_block}, {"aspects", aspects}});
}

std::string reflect_critique(const Trajectory& t, const std::string& title, Language lang) {
    constexpr const char* en = R"(Below is a trajectory you produced while playing {name}.
{trajectory}
Review your own performance. List every step where the action is inconsistent with {name}'s profile, earlier behavior or the situation, or where the portrayal lacks depth. Refer to steps by their number.)";
    constexpr const char* zh = R"(下面是你扮演{name}时产生的轨迹。
{trajectory}
回顾你自己的表现。列出所有与{name}的人物设定、之前的行为或当前情境不一致，或者刻画不够深入的步骤，并注明步骤编号。)";
    return text::render(pick(lang, en, zh),
                        Vars{{"trajectory", render_trajectory(t, title, lang)}, {"name", t.character.name}});
}

std::string reflect_rewrite(const Trajectory& t, const std::string& critique_text, std::size_t step,
                            Language lang) {
    const auto& s = t.steps.at(step);
    constexpr const char* en = R"(Character: {name} ({role})
Profile: {profile}
Your critique of the trajectory:
{critique}

Step {index}
Observation: {observation}
Original action: {action}

Rewrite the action for this step so it is more consistent with {name} and fixes any problem the critique raised. Keep the same observation and kind of action. If the original action needs no change, reply with {keep} only. Otherwise reply in the form:
Revised Action: <new action>)";
    constexpr const char* zh = R"(角色：{name}（{role}）
简介：{profile}
你对轨迹的评论：
{critique}

第{index}步
观察：{observation}
原始行动：{action}

改写这一步的行动，使其更符合{name}的形象，并修正评论指出的问题。观察和行动类型保持不变。如果原始行动无需修改，只回复{keep}。否则按以下格式回复：
Revised Action: <新的行动>)";
    return text::render(pick(lang, en, zh), Vars{{"name", t.character.name},
                                                 {"role", t.character.role},
                                                 {"profile", t.character.profile},
                                                 {"critique", critique_text},
                                                 {"index", std::to_string(step + 1)},
                                                 {"observation", s.observation},
                                                 {"action", s.action.text},
                                                 {"keep", kKeepMarker}});
}

namespace reminder {

std::string influence(Language lang) {
    return pick(lang,
                "Format reminder: answer with one line, three fields separated by ';;': "
                "[Actor];;[Target Name];;[Impact]. The target must be a listed character or the actor.",
                "格式提醒：只回复一行，用';;'分隔三个字段：[行动者];;[目标名];;[影响]。目标必须是列表中的角色或行动者本人。");
}

std::string position_state(Language lang) {
    return pick(lang, "Format reminder: reply with exactly two lines, 'Position: ...' and 'State: ...'.",
                "格式提醒：严格回复两行，“位置：……”和“状态：……”。");
}

std::string scene_fields(Language lang) {
    return pick(lang, "Format reminder: reply with exactly three lines, 'Time: ...', 'Location: ...', 'Description: ...'.",
                "格式提醒：严格回复三行，“时间：……”“地点：……”“描述：……”。");
}

std::string self_belief(Language lang) {
    return pick(lang, "Format reminder: include all three labeled parts, 'Belief:', 'Desire:' and 'Intention:'.",
                "格式提醒：必须包含“信念：”“欲望：”“意图：”三个部分。");
}

std::string env_belief(Language lang) {
    return pick(lang,
                "Format reminder: include all three labeled parts, 'Perception of Others:', "
                "'Understanding of the Scene:' and 'Influence on Actions:'.",
                "格式提醒：必须包含“对他人的看法：”“对场景的理解：”“对行动的影响：”三个部分。");
}

std::string scores(Language lang) {
    return pick(lang,
                "Format reminder: reply with seven lines KA, BA, EE, PT, IM, AD, BC, each 'XX: <score>' with a score "
                "from 1 to 5 in steps of 0.5.",
                "格式提醒：回复七行 KA、BA、EE、PT、IM、AD、BC，每行形如“XX: <分数>”，分数为1到5，步长0.5。");
}

std::string scene_quality(bool extracted, Language lang) {
    if (extracted) {
        return pick(lang, "Format reminder: reply with 'Coherence: <1-5>', 'Conformity: <1-5>', 'Detail: <1-5>'.",
                    "格式提醒：回复“Coherence: <1-5>”“Conformity: <1-5>”“Detail: <1-5>”。");
    }
    return pick(lang,
                "Format reminder: reply with 'Creativity: <1-5>', 'Coherence: <1-5>', 'Conformity: <1-5>', "
                "'Detail: <1-5>'.",
                "格式提醒：回复“Creativity: <1-5>”“Coherence: <1-5>”“Conformity: <1-5>”“Detail: <1-5>”。");
}

std::string scene_block(Language lang) {
    return std::string(pick(lang, "Format reminder: use exactly this structure:\n", "格式提醒：严格使用以下结构：\n")) +
           kBlockFormat;
}

std::string no_repeat(Language lang) {
    return pick(lang, "Reminder: describe only the outcome; do not repeat the actions word for word.",
                "提醒：只描述结果，不要逐字复述动作。");
}

std::string non_empty(Language lang) {
    return pick(lang, "Reminder: your reply must not be empty.", "提醒：回复不能为空。");
}

std::string rewrite(Language lang) {
    return std::string(pick(lang, "Format reminder: reply with ", "格式提醒：只回复")) + kKeepMarker +
           pick(lang, " or with 'Revised Action: <new action>'.", "，或回复“Revised Action: <新的行动>”。");
}

}  // namespace reminder

}  // namespace stagecraft::prompts
