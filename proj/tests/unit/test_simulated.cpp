#include <doctest.h>

#include "stagecraft/engine.hpp"
#include "stagecraft/parse.hpp"
#include "stagecraft/prompts.hpp"
#include "stagecraft/simulated.hpp"
#include "support.hpp"

using namespace stagecraft;

TEST_CASE("identical requests get identical replies") {
    SimulatedBackend b;
    auto r = ChatRequest::user("sim-a", "Actor: Wukong\nAction: he jumps", 0.7, prompts::purpose::kAction);
    auto x = b.chat(r);
    CHECK(x.content == b.chat(r).content);
    CHECK(x.input_tokens > 0);
    CHECK(x.output_tokens > 0);
    auto other = r;
    other.model_id = "sim-b";
    CHECK(b.chat(other).content != x.content);
}

TEST_CASE("structured purposes produce parseable replies") {
    auto gw = testing::gateway_for(std::make_shared<SimulatedBackend>());
    for (const auto& scene : load_scenes(testing::fixture("scenes"))) {
        RunConfig cfg;
        cfg.default_model = "sim-a";
        cfg.narrator_model = "sim-n";
        cfg.rounds = 2;
        auto run = run_scene(*gw, scene, cfg);
        INFO(scene.id, ": ", run.error);
        CHECK(run.status == RunStatus::completed);
        for (const auto& e : run.events) {
            CHECK_FALSE(e.fallback);
            CHECK_FALSE(e.failed);
        }
    }
}

TEST_CASE("judge replies parse as seven scores") {
    SimulatedBackend b;
    auto r = ChatRequest::user("sim-judge", "Trajectory:\nWukong: leaps\n", 0.0, prompts::purpose::kScore);
    auto s = parse::metric_scores(b.chat(r).content);
    for (double v : s.values) CHECK(parse::valid_score(v));
}
