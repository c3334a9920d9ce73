#include <doctest.h>

#include "stagecraft/text.hpp"

using namespace stagecraft;

TEST_CASE("trim and case helpers") {
    CHECK(text::trim("  a b \n") == "a b");
    CHECK(text::trim("") == "");
    CHECK(text::iequals("Position", "position"));
    CHECK_FALSE(text::iequals("Position", "positions"));
    CHECK(text::icontains("Huang Rong", "rong"));
    CHECK(text::to_lower_ascii("KA: 4") == "ka: 4");
}

TEST_CASE("split keeps empty fields") {
    auto parts = text::split("a;;b;;", ";;");
    REQUIRE(parts.size() == 3);
    CHECK(parts[2].empty());
    CHECK(text::join({"x", "y", "z"}, ", ") == "x, y, z");
}

TEST_CASE("strip_decoration removes one wrapping layer") {
    CHECK(text::strip_decoration("[Huang Rong]") == "Huang Rong");
    CHECK(text::strip_decoration("**Frodo**") == "Frodo");
    CHECK(text::strip_decoration("\"hello\"") == "hello");
    CHECK(text::strip_decoration("  plain ") == "plain");
}

TEST_CASE("render substitutes known keys only") {
    CHECK(text::render("{a} and {b} and {c}", {{"a", "1"}, {"b", "2"}}) == "1 and 2 and {c}");
}

TEST_CASE("fnv1a64 reference values") {
    // Published FNV-1a 64-bit test vectors.
    CHECK(text::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(text::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(text::fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(text::hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("estimate_tokens counts words, punctuation and code points") {
    CHECK(text::estimate_tokens("") == 0);
    CHECK(text::estimate_tokens("hello world") == 2);
    CHECK(text::estimate_tokens("KA: 4") == 3);
    CHECK(text::estimate_tokens("孙悟空") == 3);
    CHECK(text::estimate_tokens("a,b") == 3);
}

TEST_CASE("parse_labeled tolerates markdown and full-width colons") {
    std::vector<text::LabelSpec> labels = {{"position", {"Position", "位置"}}, {"state", {"State", "状态"}}};
    auto f = text::parse_labeled("**Position:** behind the altar\n- state: winded", labels);
    CHECK(f["position"] == "behind the altar");
    CHECK(f["state"] == "winded");

    auto zh = text::parse_labeled("位置：门口\n状态：疲惫", labels);
    CHECK(zh["position"] == "门口");
    CHECK(zh["state"] == "疲惫");

    SUBCASE("values span lines until the next label") {
        auto m = text::parse_labeled("Position: on the\nbridge\nState: calm", labels);
        CHECK(m["position"] == "on the\nbridge");
    }
    SUBCASE("first occurrence wins") {
        auto m = text::parse_labeled("State: one\nState: two\nPosition: p", labels);
        CHECK(m["state"] == "one");
    }
    SUBCASE("longest alias is preferred") {
        std::vector<text::LabelSpec> l2 = {{"scene", {"Understanding of Scene", "Understanding of the Scene"}}};
        auto m = text::parse_labeled("Understanding of the Scene: tense", l2);
        CHECK(m["scene"] == "tense");
    }
}

TEST_CASE("quoted_fraction") {
    CHECK(text::quoted_fraction("\"Stand aside.\"") == doctest::Approx(1.0));
    CHECK(text::quoted_fraction("He waves.") == doctest::Approx(0.0));
    CHECK(text::quoted_fraction("“让开。”") == doctest::Approx(1.0));
    CHECK(text::quoted_fraction("He shouts \"Go!\" and runs off toward the hills") < 0.5);
}
