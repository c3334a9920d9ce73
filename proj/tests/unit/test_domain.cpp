#include <doctest.h>

#include <set>

#include "stagecraft/domain.hpp"
#include "stagecraft/error.hpp"
#include "support.hpp"

using namespace stagecraft;

namespace {

bool has_code(const std::vector<Violation>& vs, ViolationCode code) {
    for (const auto& v : vs) {
        if (v.code == code) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("validate_scene") {
    auto s = testing::two_hander();
    CHECK(validate_scene(s).empty());

    SUBCASE("duplicate name") {
        s.characters[1].name = "Wukong";
        auto v = validate_scene(s);
        CHECK(has_code(v, ViolationCode::DuplicateName));
        CHECK(has_errors(v));
    }
    SUBCASE("five characters is only a warning") {
        for (int i = 0; i < 3; ++i) s.characters.push_back({"Extra" + std::to_string(i), "r", "p", "x", "y"});
        auto v = validate_scene(s);
        REQUIRE(v.size() == 1);
        CHECK(v[0].code == ViolationCode::CharacterCountWarning);
        CHECK(v[0].warning);
        CHECK_FALSE(has_errors(v));
    }
    SUBCASE("no characters") {
        s.characters.clear();
        CHECK(has_code(validate_scene(s), ViolationCode::NoCharacters));
    }
    SUBCASE("empty environment field") {
        s.environment.location = "";
        CHECK(has_code(validate_scene(s), ViolationCode::EmptyField));
    }
    SUBCASE("empty name") {
        s.characters[0].name = "";
        CHECK(has_code(validate_scene(s), ViolationCode::EmptyName));
    }
}

TEST_CASE("scene store/load round trip") {
    testing::TempDir dir;
    auto s = testing::two_hander();
    s.language = Language::zh;
    s.origin = Origin::generated;
    store_scene(s, dir / "s.json");
    CHECK(load_scene(dir / "s.json") == s);
}

TEST_CASE("missing field errors name the path") {
    auto j = to_json(testing::two_hander());
    j["environment"].erase("location");
    try {
        scene_from_json(j);
        FAIL("expected MissingField");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingField);
        CHECK(std::string(e.what()).find("location") != std::string::npos);
    }
}

TEST_CASE("surrounding whitespace is trimmed on load, inner text verbatim") {
    auto j = to_json(testing::two_hander());
    j["characters"][0]["state"] = "  Restless,  very  ";
    auto s = scene_from_json(j);
    CHECK(s.characters[0].state == "Restless,  very");
}

TEST_CASE("fixture corpus of 10 scenes loads without errors") {
    auto scenes = load_scenes(testing::fixture("scenes"));
    REQUIRE(scenes.size() == 10);
    int warnings = 0;
    std::set<std::string> ids;
    for (const auto& s : scenes) {
        auto v = validate_scene(s);
        CHECK_FALSE(has_errors(v));
        warnings += static_cast<int>(v.size());
        ids.insert(s.id);
    }
    CHECK(ids.size() == scenes.size());
    CHECK(warnings == 1);  // the five-character table
}

TEST_CASE("trajectory lines round trip and tolerate a torn tail") {
    Trajectory t;
    t.scene_id = "t-01";
    t.character = testing::two_hander().characters[0];
    t.environment = testing::two_hander().environment;
    t.steps.push_back({"obs one", {"Wukong", ActionKind::act, "leaps", 1}, 1, "prompt one"});
    t.steps.push_back({"impact", {"Wukong", ActionKind::react, "ducks", 1}, 4, ""});
    t.steps.push_back({"obs two", {"Wukong", ActionKind::speak, "\"Hah!\"", 2}, 9, "p"});
    auto lines = trajectory_to_lines(t);
    CHECK(trajectory_from_lines(lines) == t);

    auto torn = lines + "{\"record\":\"step\",\"scene";
    CHECK(trajectory_from_lines(torn) == t);

    testing::TempDir dir;
    store_trajectory(t, dir / "w.jsonl");
    CHECK(load_trajectory(dir / "w.jsonl") == t);
}

TEST_CASE("step records carry the documented keys") {
    TrajectoryStep st{"o", {"A", ActionKind::act, "x", 2}, 7, "p"};
    auto j = step_record("sc", st);
    for (const char* key : {"scene_id", "character", "round", "seq", "observation", "action_kind", "action_text"}) {
        CHECK_MESSAGE(j.contains(key), key);
    }
    CHECK(j["action_kind"] == "act");
}

TEST_CASE("metric scores round trip and range check") {
    MetricScores s;
    s.values = {1, 1.5, 2, 3, 4, 4.5, 5};
    s.critique = "fine";
    CHECK(scores_from_json(to_json(s)) == s);
    CHECK(s.mean() == doctest::Approx(3.0));
    s.values[0] = 0;
    CHECK_THROWS_AS(s.check_range(), Error);
}

TEST_CASE("scene quality keeps creativity absent for extracted scenes") {
    SceneQuality q{std::nullopt, 4, 4, 4};
    auto j = to_json(q);
    CHECK(j["creativity"].is_null());
    CHECK(quality_from_json(j) == q);
    CHECK(q.available().size() == 3);
}
