#include <doctest.h>

#include "parser_corpus.hpp"
#include "stagecraft/error.hpp"
#include "stagecraft/parse.hpp"
#include "support.hpp"

using namespace stagecraft;

TEST_CASE("corpus") {
    auto corpus = Json::parse(stagecraft::read_file(testing::fixture("parsers/corpus.json")));
    REQUIRE(corpus.size() >= 50);
    for (const auto& c : corpus) {
        INFO(c.at("input").get<std::string>());
        CHECK(testing::check_parser_case(c) == "");
    }
}

TEST_CASE("roster name matching") {
    std::vector<std::string> roster = {"Guo Jing", "Huang Rong", "Huang Yaoshi"};
    CHECK(parse::match_roster_name("Guo Jing", roster) == "Guo Jing");
    CHECK(parse::match_roster_name("guo jing", roster) == "Guo Jing");
    CHECK(parse::match_roster_name("Rong", roster) == "Huang Rong");
    CHECK_FALSE(parse::match_roster_name("Huang", roster).has_value());
    CHECK_FALSE(parse::match_roster_name("", roster).has_value());
}

TEST_CASE("influence always carries the caller's actor") {
    auto r = parse::influence("Someone Else;;Frodo;;A shove", "Boromir", {"Frodo", "Boromir"});
    CHECK(r.actor == "Boromir");
    CHECK(r.target == "Frodo");
    CHECK(r.has_responder());
    auto none = parse::influence("Frodo;;Frodo;;He hides", "Frodo", {"Frodo", "Boromir"});
    CHECK_FALSE(none.has_responder());
}

TEST_CASE("description-only change keeps time and location verbatim") {
    auto e = parse::scene_fields("Time: Dusk\nLocation: A cave mouth\nDescription: The fire has gone out.");
    CHECK(e.time == "Dusk");
    CHECK(e.location == "A cave mouth");
}

TEST_CASE("valid scores are halves in range") {
    CHECK(parse::valid_score(1));
    CHECK(parse::valid_score(4.5));
    CHECK_FALSE(parse::valid_score(0.5));
    CHECK_FALSE(parse::valid_score(5.5));
    CHECK_FALSE(parse::valid_score(3.25));
}
