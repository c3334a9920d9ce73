#include <doctest.h>

#include <cmath>

#include "stagecraft/error.hpp"
#include "stagecraft/gateway.hpp"
#include "stagecraft/character.hpp"
#include "support.hpp"

using namespace stagecraft;

namespace {

PriceTable half_and_one_half() {
    PriceTable p;
    p.set("gpt-3.5", Rate{Rational::from_decimal("0.5"), Rational::from_decimal("1.5"), true});
    p.set("gpt-4", Rate{Rational::from_decimal("0.5"), Rational::from_decimal("1.5"), true});
    return p;
}

// Fails with Transport a set number of times, then answers.
class FlakyBackend : public Backend {
public:
    explicit FlakyBackend(int failures) : failures_(failures) {}
    ChatResponse chat(const ChatRequest&) override {
        ++calls;
        if (failures_-- > 0) throw Error(ErrorCode::Transport, "connection reset");
        return {"ok", 3, 1};
    }
    std::vector<double> embed(const std::string& t) override { return hash_embedding(t); }
    int calls = 0;

private:
    int failures_;
};

}  // namespace

TEST_CASE("Rational parsing and half-up display") {
    CHECK(Rational::from_decimal("0.5") == Rational(1, 2));
    CHECK(Rational::from_decimal("12") == Rational(12));
    CHECK(Rational::from_decimal("1e-06") == Rational(1, 1000000));
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational(5, 100000).to_fixed(4) == "0.0001");
    CHECK(Rational(4, 100000).to_fixed(4) == "0.0000");
    CHECK(Rational(0).to_fixed(4) == "0.0000");
}

TEST_CASE("cost report reproduces the two metered rows") {
    auto prices = half_and_one_half();
    SUBCASE("first row") {
        UsageLedger l;
        l.append({RoleTag::narrator, "gpt-3.5", 25723, 4203});
        l.append({RoleTag::character, "gpt-4", 75349, 14407});
        auto r = scene_cost_report(l, prices);
        CHECK(r.find(RoleTag::narrator)->cost->to_fixed(4) == "0.0192");
        CHECK(r.find(RoleTag::character)->cost->to_fixed(4) == "0.0593");
        CHECK(r.total->to_fixed(4) == "0.0785");
    }
    SUBCASE("second row") {
        UsageLedger l;
        l.append({RoleTag::narrator, "gpt-3.5", 19954, 3883});
        l.append({RoleTag::character, "gpt-4", 49832, 6823});
        auto r = scene_cost_report(l, prices);
        CHECK(r.find(RoleTag::narrator)->cost->to_fixed(4) == "0.0158");
        CHECK(r.find(RoleTag::character)->cost->to_fixed(4) == "0.0352");
        CHECK(r.total->to_fixed(4) == "0.0510");
    }
    SUBCASE("empty ledger") {
        auto r = scene_cost_report(UsageLedger{}, prices);
        CHECK(r.roles.empty());
        CHECK(r.total.value_or(Rational(0)).to_fixed(4) == "0.0000");
    }
}

TEST_CASE("unmetered models render a dash and missing rates throw") {
    auto prices = PriceTable::from_json(Json::parse(R"({"gpt-3.5": {"input": "0.5", "output": "1.5"},
                                                          "llama": {"metered": false}})"));
    UsageLedger l;
    l.append({RoleTag::narrator, "gpt-3.5", 24403, 3928});
    l.append({RoleTag::character, "llama", 50000, 9000});
    auto r = scene_cost_report(l, prices);
    CHECK(r.find(RoleTag::narrator)->cost->to_fixed(4) == "0.0181");
    CHECK_FALSE(r.find(RoleTag::character)->cost.has_value());
    CHECK(r.render().find(" -\n") != std::string::npos);

    l.append({RoleTag::judge, "mystery", 1, 1});
    try {
        scene_cost_report(l, prices);
        FAIL("expected MissingRate");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingRate);
    }
}

TEST_CASE("ledger conservation and cost monotonicity") {
    auto prices = half_and_one_half();
    UsageLedger l;
    Rational last(0);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        auto role = kAllRoleTags[rng() % 4];
        l.append({role, (i % 2) ? "gpt-4" : "gpt-3.5", static_cast<std::int64_t>(rng() % 5000 + 1),
                  static_cast<std::int64_t>(rng() % 900)});
        auto r = scene_cost_report(l, prices);
        CHECK(last < *r.total);
        last = *r.total;
        Rational sum(0);
        std::int64_t in = 0;
        for (const auto& rc : r.roles) {
            sum += *rc.cost;
            in += rc.tokens.input_tokens;
        }
        CHECK(sum == *r.total);
        CHECK(in == l.grand_total().input_tokens);
    }
    CHECK(UsageLedger::from_lines(l.to_lines()).entries() == l.entries());
}

TEST_CASE("gateway returns queued content and records usage") {
    auto backend = std::make_shared<QueuedBackend>(std::vector<std::string>{"Hello", "   "});
    auto gw = testing::gateway_for(backend);
    Session s(*gw);
    auto r = s.complete(ChatRequest::user("m", "hi", 0.7, "test"), RoleTag::narrator);
    CHECK(r.content == "Hello");
    CHECK(s.ledger().size() == 1);
    CHECK(s.ledger().entries()[0].role == RoleTag::narrator);

    try {
        s.complete(ChatRequest::user("m", "hi", 0.7, "test"), RoleTag::narrator);
        FAIL("expected EmptyResponse");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyResponse);
    }
    CHECK(s.ledger().size() == 2);
}

TEST_CASE("request validation") {
    ChatRequest r = ChatRequest::user("m", "x", 0.7, "p");
    CHECK_NOTHROW(r.validate());
    r.temperature = -1;
    CHECK_THROWS_AS(r.validate(), Error);
    r = ChatRequest::user("m", "x", 0.7, "p");
    r.messages.clear();
    CHECK_THROWS_AS(r.validate(), Error);
    r = ChatRequest::user("m", "x", 0.7, "p");
    r.messages.insert(r.messages.begin(), ChatMessage{ChatRole::assistant, "a"});
    CHECK_THROWS_AS(r.validate(), Error);
}

TEST_CASE("purpose is not part of the request hash") {
    auto a = ChatRequest::user("m", "x", 0.7, "one");
    auto b = ChatRequest::user("m", "x", 0.7, "two");
    CHECK(a.hash() == b.hash());
    b.temperature = 0.0;
    CHECK(a.hash() != b.hash());
}

TEST_CASE("transport failures are retried with exponential backoff") {
    auto flaky = std::make_shared<FlakyBackend>(2);
    Gateway gw(flaky, RetryPolicy{3, std::chrono::milliseconds(1000)});
    std::vector<long> waits;
    gw.set_sleeper([&](std::chrono::milliseconds d) { waits.push_back(static_cast<long>(d.count())); });
    UsageLedger l;
    CHECK(gw.complete(ChatRequest::user("m", "x", 0.7, "p"), RoleTag::judge, l).content == "ok");
    CHECK(flaky->calls == 3);
    CHECK(waits == std::vector<long>{1000, 2000});

    auto dead = std::make_shared<FlakyBackend>(100);
    auto gw2 = testing::gateway_for(dead);
    try {
        gw2->complete(ChatRequest::user("m", "x", 0.7, "p"), RoleTag::judge, l);
        FAIL("expected Transport");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Transport);
    }
    CHECK(dead->calls == 4);
}

TEST_CASE("record then replay serves identical responses") {
    testing::TempDir dir;
    auto inner = std::make_shared<QueuedBackend>(std::vector<std::string>{"first", "second"});
    auto rec = testing::gateway_for(std::make_shared<ScriptedBackend>(ScriptMode::record, dir.path(), inner));
    UsageLedger l;
    auto q1 = ChatRequest::user("m", "one", 0.7, "p");
    auto q2 = ChatRequest::user("m", "two", 0.7, "p");
    CHECK(rec->complete(q1, RoleTag::character, l).content == "first");
    CHECK(rec->complete(q2, RoleTag::character, l).content == "second");
    // A repeat is served from the store, not the inner backend.
    CHECK(rec->complete(q1, RoleTag::character, l).content == "first");
    CHECK(inner->remaining() == 0);

    auto rep = testing::gateway_for(std::make_shared<ScriptedBackend>(ScriptMode::replay, dir.path()));
    UsageLedger l2;
    CHECK(rep->complete(q2, RoleTag::character, l2).content == "second");
    CHECK(rep->complete(q2, RoleTag::character, l2).content == "second");
    CHECK(l2.entries()[0] == l.entries()[1]);
    try {
        rep->complete(ChatRequest::user("m", "three", 0.7, "p"), RoleTag::character, l2);
        FAIL("expected ReplayMiss");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ReplayMiss);
    }
}

TEST_CASE("hash embeddings are deterministic unit vectors") {
    auto gw = testing::gateway_for(std::make_shared<QueuedBackend>());
    auto a = gw->embed("a");
    CHECK(a == gw->embed("a"));
    CHECK(a.size() == kHashEmbeddingDim);
    for (const char* t : {"a", "sword fight", "孙悟空", "x y z"}) {
        auto v = gw->embed(t);
        double n = 0;
        for (double x : v) n += x * x;
        CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-9);
    }
    CHECK(cosine(gw->embed("sword fight"), gw->embed("sword fight")) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(gw->embed(""), Error);
}

TEST_CASE("http wire shapes") {
    auto req = ChatRequest::user("gpt-4", "hi", 0.0, "judge.score");
    auto body = HttpBackend::request_body(req, "gpt-4-0613");
    CHECK(body["model"] == "gpt-4-0613");
    CHECK(body["messages"][0]["role"] == "user");
    CHECK(body["temperature"] == 0.0);
    auto resp = HttpBackend::parse_response(Json::parse(
        R"({"choices":[{"message":{"content":"yo"}}],"usage":{"prompt_tokens":5,"completion_tokens":2}})"));
    CHECK(resp.content == "yo");
    CHECK(resp.input_tokens == 5);
    CHECK(resp.output_tokens == 2);
}

TEST_CASE("backend config parsing") {
    auto c = BackendConfig::from_json(Json::parse(R"({"kind":"simulated","retry":{"max_retries":1,"backoff_base_ms":5},
        "prices":{"a":{"input":1,"output":2},"b":null}})"));
    CHECK(c.retry.max_retries == 1);
    CHECK(c.prices.find("a")->metered);
    CHECK_FALSE(c.prices.find("b")->metered);
    CHECK_THROWS_AS(BackendConfig::from_json(Json::parse(R"({"kind":"carrier-pigeon"})")), Error);
}
