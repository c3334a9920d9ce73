#include <doctest.h>

#include "stagecraft/error.hpp"
#include "stagecraft/forge.hpp"
#include "stagecraft/prompts.hpp"
#include "stagecraft/repair.hpp"
#include "stagecraft/simulated.hpp"
#include "support.hpp"

using namespace stagecraft;

namespace {

const char* kDraft =
    "Title: Trouble at the Cave\n"
    "Time: Dusk\n"
    "Location: A cave mouth\n"
    "Description: Smoke curls from a cave while pilgrims argue outside.\n"
    "Characters:\n"
    "- Name: Sun Wukong | Role: Disciple | Profile: Brash immortal. | Position: On a rock | State:\n"
    "- Name: Tang Sanzang | Role: Monk | Profile: Gentle pilgrim. | Position: | State: Weary\n";

const char* kComplete =
    "Title: Trouble at the Cave\n"
    "Time: Dusk\n"
    "Location: A cave mouth\n"
    "Description: Smoke curls from a cave while pilgrims argue outside.\n"
    "Characters:\n"
    "- Name: Sun Wukong | Role: Disciple | Profile: Brash immortal. | Position: On a rock | State: Alert\n"
    "- Name: Tang Sanzang | Role: Monk | Profile: Gentle pilgrim. | Position: By the path | State: Weary\n";

SourceWork source() { return SourceWork{"White Bone Demon", Language::en, "Sun Wukong guards Tang Sanzang."}; }

}  // namespace

TEST_CASE("acceptance policy truth table") {
    AcceptancePolicy p;
    CHECK(p.accepts({std::nullopt, 4, 4, 4}));
    CHECK_FALSE(p.accepts({3, 3, 3, 3}));
    CHECK(p.accepts({5, 3, 3, 3}));             // mean 3.5, every aspect 3
    CHECK_FALSE(p.accepts({5, 5, 5, 2.5}));     // one aspect below 3
    CHECK_FALSE(p.accepts({std::nullopt, 3.5, 3.5, 3}));  // mean 3.33
    CHECK(p.accepts({std::nullopt, 3.5, 3.5, 3.5}));
    CHECK_FALSE(p.accepts({}));
}

TEST_CASE("scene blocks parse with and without completeness") {
    auto s = parse_scene_block(kDraft, false);
    CHECK(s.title == "Trouble at the Cave");
    REQUIRE(s.characters.size() == 2);
    CHECK(s.characters[0].state.empty());
    CHECK(s.characters[1].position.empty());
    CHECK_THROWS_AS(parse_scene_block(kDraft, true), Error);
    CHECK(parse_scene_block(kComplete, true).characters[1].position == "By the path");
    CHECK_THROWS_AS(parse_scene_block("Title: x\nTime: y", false), Error);
}

TEST_CASE("scene ids") {
    CHECK(scene_id_for(source(), Origin::extracted, 1) == "white-bone-demon-ext-01");
    CHECK(scene_id_for(source(), Origin::generated, 12) == "white-bone-demon-gen-12");
    auto zh = scene_id_for(SourceWork{"西游记", Language::zh, "x"}, Origin::extracted, 1);
    CHECK(zh.size() == std::string("01234567-ext-01").size());
}

TEST_CASE("screenwriter stage") {
    auto q = std::make_shared<QueuedBackend>(std::vector<std::string>{kDraft});
    auto gw = testing::gateway_for(q);
    Session s(*gw);
    auto drafts = screenwrite(s, "sw", source(), Origin::extracted, 1);
    REQUIRE(drafts.size() == 1);
    CHECK(drafts[0].stage == DraftStage::screenwriter);
    CHECK(drafts[0].scene.id == "white-bone-demon-ext-01");
    CHECK(drafts[0].scene.origin == Origin::extracted);
    CHECK(screenwrite(s, "sw", source(), Origin::extracted, 0).empty());
    CHECK_THROWS_AS(screenwrite(s, "sw", SourceWork{"t", Language::en, "  "}, Origin::extracted, 1), Error);
    CHECK(s.ledger().totals(RoleTag::scene_forge).calls == 1);
}

TEST_CASE("director fills missing fields and refuses refined drafts") {
    auto q = std::make_shared<QueuedBackend>(std::vector<std::string>{kDraft, kComplete});
    auto gw = testing::gateway_for(q);
    Session s(*gw);
    auto draft = screenwrite(s, "sw", source(), Origin::extracted, 1).front();
    auto refined = direct(s, "dir", draft);
    CHECK(refined.stage == DraftStage::director);
    CHECK(refined.scene.characters[0].state == "Alert");
    CHECK(refined.scene.id == draft.scene.id);
    CHECK_THROWS_AS(direct(s, "dir", refined), Error);
}

TEST_CASE("judging keeps creativity only for generated drafts") {
    auto q = std::make_shared<QueuedBackend>(std::vector<std::string>{
        "Coherence: 4 Conformity: 4 Detail: 4", "Creativity: 4\nCoherence: 4\nConformity: 4\nDetail: 6",
        "Creativity: 4\nCoherence: 4\nConformity: 4\nDetail: 5"});
    auto gw = testing::gateway_for(q);
    Session s(*gw);
    SceneDraft d{parse_scene_block(kComplete, true), DraftStage::director, std::nullopt, {}};
    d.scene.origin = Origin::extracted;
    auto ext = judge_scene(s, "j", d, "src");
    CHECK_FALSE(ext.creativity.has_value());
    CHECK(ext.coherence == 4);
    CHECK(q->requests()[0].messages.back().content.find("Creativity") == std::string::npos);

    d.scene.origin = Origin::generated;
    auto gen = judge_scene(s, "j", d, "src");
    CHECK(gen.creativity == 4.0);
    CHECK(gen.detail == 5);
    CHECK(q->requests().size() == 3);
}

TEST_CASE("craft with a rejecting judge reports every attempt") {
    auto gw = testing::gateway_for(std::make_shared<FunctionBackend>([](const ChatRequest& r) -> std::string {
        if (r.purpose.rfind("forge.screenwrite", 0) == 0) return kDraft;
        if (r.purpose == prompts::purpose::kDirect) return kComplete;
        return "Creativity: 3\nCoherence: 3\nConformity: 3\nDetail: 3";
    }));
    CraftConfig cfg;
    cfg.sources = {source()};
    cfg.extract = 1;
    cfg.generate = 1;
    cfg.models = {"sw", "dir", "j"};
    cfg.policy.max_attempts = 1;
    auto r = craft(*gw, cfg);
    CHECK(r.scenes.empty());
    CHECK(r.report.requested == 2);
    CHECK(r.report.accepted == 0);
    CHECK(r.report.attempts.size() == 2);
    cfg.policy.max_attempts = 3;
    CHECK(craft(*gw, cfg).report.attempts.size() == 6);
}

TEST_CASE("simulated craft produces valid scenes; extracted ones carry no creativity") {
    auto gw = testing::gateway_for(std::make_shared<SimulatedBackend>());
    CraftConfig cfg;
    cfg.sources = {load_source(testing::fixture("sources/white_bone.json"))};
    cfg.extract = 2;
    cfg.generate = 2;
    cfg.models = {"sim-a", "sim-b", "sim-judge"};
    auto r = craft(*gw, cfg);
    CHECK(r.report.requested == 4);
    CHECK(r.report.accepted == static_cast<int>(r.scenes.size()));
    for (const auto& s : r.scenes) CHECK_FALSE(has_errors(validate_scene(s)));
    for (const auto& a : r.report.attempts) {
        if (a.origin == Origin::extracted && a.quality) CHECK_FALSE(a.quality->creativity.has_value());
        if (a.origin == Origin::generated && a.quality) CHECK(a.quality->creativity.has_value());
    }
    auto j = r.report.to_json();
    CHECK(j["requested"] == 4);
}
