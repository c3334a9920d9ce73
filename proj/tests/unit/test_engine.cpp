#include <doctest.h>

#include <fstream>

#include "stagecraft/engine.hpp"
#include "stagecraft/error.hpp"
#include "stagecraft/prompts.hpp"
#include "stagecraft/simulated.hpp"
#include "support.hpp"

using namespace stagecraft;

namespace {

RunConfig sim_config() {
    RunConfig c;
    c.default_model = "sim-a";
    c.narrator_model = "sim-narrator";
    c.rounds = 3;
    return c;
}

int count(const std::vector<Event>& ev, EventKind k) {
    int n = 0;
    for (const auto& e : ev) n += e.kind == k;
    return n;
}

// Narrator never finds a responder; every other call gets a fixed reply.
std::string lonely(const ChatRequest& r) {
    namespace p = prompts::purpose;
    const auto& prompt = r.messages.back().content;
    if (r.purpose == p::kInfluence) {
        auto pos = prompt.find("Actor: ");
        auto actor = prompt.substr(pos + 7, prompt.find('\n', pos) - pos - 7);
        return actor + ";;" + actor + ";;Nothing reaches anyone";
    }
    if (r.purpose == p::kUpdateCharacter) return "Position: same place\nState: steady";
    if (r.purpose == p::kUpdateScene) return "Time: Dusk\nLocation: A cave mouth\nDescription: Still damp.";
    if (r.purpose == p::kSelfBelief) return "Belief: b\nDesire: d\nIntention: i";
    if (r.purpose == p::kEnvBelief)
        return "Perception of Others: o\nUnderstanding of the Scene: s\nInfluence on Actions: a";
    return "She looks around quietly.";
}

}  // namespace

TEST_CASE("a simulated run follows the round grammar") {
    auto gw = testing::gateway_for(std::make_shared<SimulatedBackend>());
    auto scene = testing::two_hander();
    auto run = run_scene(*gw, scene, sim_config());
    REQUIRE(run.status == RunStatus::completed);
    CHECK(check_turn_structure(run.events, scene.names(), 3).empty());
    CHECK(run.events.front().seq == 1);
    for (std::size_t i = 0; i < run.events.size(); ++i) CHECK(run.events[i].seq == static_cast<std::int64_t>(i + 1));
    CHECK(count(run.events, EventKind::env_update) == 3);
    CHECK(count(run.events, EventKind::self_belief) == 6);
    CHECK(count(run.events, EventKind::action) == 6);

    auto w = extract_trajectory(run, "Wukong");
    CHECK(w.steps.size() >= 3);
    for (const auto& st : w.steps) {
        CHECK(st.action.actor == "Wukong");
        CHECK_FALSE(st.prompt.empty());
    }
    CHECK_THROWS_AS(extract_trajectory(run, "Bajie"), Error);
    CHECK(run.ledger.totals(RoleTag::narrator).calls > 0);
    CHECK(run.ledger.totals(RoleTag::character).calls > 0);
}

TEST_CASE("no-responder actions produce exactly one state update") {
    auto gw = testing::gateway_for(std::make_shared<FunctionBackend>(lonely));
    auto scene = testing::two_hander();
    auto cfg = sim_config();
    cfg.rounds = 2;
    auto run = run_scene(*gw, scene, cfg);
    REQUIRE(run.status == RunStatus::completed);
    CHECK(check_turn_structure(run.events, scene.names(), 2).empty());
    CHECK(count(run.events, EventKind::reaction) == 0);
    CHECK(count(run.events, EventKind::result) == 0);
    CHECK(count(run.events, EventKind::state_update) == count(run.events, EventKind::action));
    for (std::size_t i = 0; i < run.events.size(); ++i) {
        if (run.events[i].kind != EventKind::influence) continue;
        REQUIRE(i + 1 < run.events.size());
        CHECK(run.events[i + 1].kind == EventKind::state_update);
        CHECK(run.events[i + 1].actor == run.events[i].actor);
    }
}

TEST_CASE("the grammar checker flags broken logs") {
    auto gw = testing::gateway_for(std::make_shared<SimulatedBackend>());
    auto scene = testing::two_hander();
    auto run = run_scene(*gw, scene, sim_config());
    auto events = run.events;
    SUBCASE("missing env update") {
        events.erase(std::find_if(events.begin(), events.end(),
                                  [](const Event& e) { return e.kind == EventKind::env_update; }));
        for (std::size_t i = 0; i < events.size(); ++i) events[i].seq = static_cast<std::int64_t>(i + 1);
        CHECK_FALSE(check_turn_structure(events, scene.names(), 3).empty());
    }
    SUBCASE("non-increasing seq") {
        events[3].seq = events[2].seq;
        CHECK_FALSE(check_turn_structure(events, scene.names(), 3).empty());
    }
    SUBCASE("wrong round count") { CHECK_FALSE(check_turn_structure(events, scene.names(), 4).empty()); }
}

TEST_CASE("preconditions") {
    auto gw = testing::gateway_for(std::make_shared<SimulatedBackend>());
    auto scene = testing::two_hander();
    auto cfg = sim_config();
    SUBCASE("zero rounds") {
        cfg.rounds = 0;
        CHECK_THROWS_AS(run_scene(*gw, scene, cfg), Error);
    }
    SUBCASE("cast outside roster") {
        cfg.cast["Bajie"] = "sim-b";
        CHECK_THROWS_AS(run_scene(*gw, scene, cfg), Error);
    }
    SUBCASE("no model for a character") {
        cfg.default_model.clear();
        cfg.cast["Wukong"] = "sim-b";
        CHECK_THROWS_AS(run_scene(*gw, scene, cfg), Error);
    }
    SUBCASE("invalid scene") {
        scene.characters[1].name = "Wukong";
        CHECK_THROWS_AS(run_scene(*gw, scene, cfg), Error);
    }
}

TEST_CASE("transport failure mid-run is captured as a failed run") {
    int calls = 0;
    auto gw = testing::gateway_for(std::make_shared<FunctionBackend>([&](const ChatRequest& r) -> std::string {
        if (++calls > 5) throw Error(ErrorCode::Transport, "gone");
        return lonely(r);
    }));
    testing::TempDir dir;
    auto run = run_scene(*gw, testing::two_hander(), sim_config(), dir.path());
    CHECK(run.status == RunStatus::failed);
    CHECK(run.error.find("gone") != std::string::npos);
    auto stored = load_run(dir.path());
    CHECK_FALSE(stored.completed());
    CHECK(stored.events.size() == run.events.size());
}

TEST_CASE("written runs load back") {
    auto gw = testing::gateway_for(std::make_shared<SimulatedBackend>());
    testing::TempDir dir;
    auto cfg = sim_config();
    cfg.cast["Sanzang"] = "sim-b";
    auto run = run_scene(*gw, testing::two_hander(), cfg, dir.path());
    auto stored = load_run(dir.path());
    CHECK(stored.completed());
    CHECK(stored.scene == run.scene);
    CHECK(stored.events == run.events);
    CHECK(stored.ledger.entries() == run.ledger.entries());
    CHECK(stored.model_for("Sanzang") == "sim-b");
    CHECK(stored.model_for("Wukong") == "sim-a");
    REQUIRE(stored.trajectories.size() == 2);
    CHECK(std::filesystem::exists(dir / "trajectories/Wukong.jsonl"));

    // A torn final line in the event log is ignored.
    std::ofstream(dir / "events.jsonl", std::ios::app) << "{\"seq\": 99, \"ki";
    CHECK(load_run(dir.path()).events == run.events);
}

TEST_CASE("trajectory file names are sanitized") {
    CHECK(trajectory_file_name("Guo Jing") == "Guo_Jing.jsonl");
    CHECK(trajectory_file_name("a/b:c") == "a_b_c.jsonl");
    CHECK(trajectory_file_name("孙悟空") == "孙悟空.jsonl");
}

TEST_CASE("events round trip through json") {
    auto gw = testing::gateway_for(std::make_shared<SimulatedBackend>());
    auto run = run_scene(*gw, testing::two_hander(), sim_config());
    for (const auto& e : run.events) CHECK(event_from_json(to_json(e)) == e);
}

TEST_CASE("batch output does not depend on parallelism") {
    auto all = load_scenes(testing::fixture("scenes"));
    std::vector<Scene> four(all.begin(), all.begin() + 4);
    auto gw = testing::gateway_for(std::make_shared<SimulatedBackend>());
    testing::TempDir a, b;
    auto cfg = sim_config();
    cfg.rounds = 2;
    auto ra = run_batch(*gw, four, cfg, 1, a.path());
    auto rb = run_batch(*gw, four, cfg, 4, b.path());
    REQUIRE(ra.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(ra[i].scene.id == four[i].id);
        CHECK(ra[i].events == rb[i].events);
    }
    CHECK(testing::tree(a.path()) == testing::tree(b.path()));
    auto runs = load_runs(a.path());
    CHECK(runs.size() == 4);
}

TEST_CASE("batch cast entries only apply to scenes that have the character") {
    auto all = load_scenes(testing::fixture("scenes"));
    auto gw = testing::gateway_for(std::make_shared<SimulatedBackend>());
    auto cfg = sim_config();
    cfg.rounds = 1;
    cfg.cast["Frodo"] = "sim-b";
    auto runs = run_batch(*gw, all, cfg, 2);
    for (const auto& r : runs) {
        INFO(r.scene.id, ": ", r.error);
        CHECK(r.status == RunStatus::completed);
        if (r.scene.find("Frodo")) {
            CHECK(r.config.model_for("Frodo") == "sim-b");
        } else {
            CHECK(r.config.cast.empty());
        }
    }
}
