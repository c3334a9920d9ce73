#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stagecraft/error.hpp"
#include "stagecraft/evaluator.hpp"
#include "stagecraft/simulated.hpp"
#include "support.hpp"

using namespace stagecraft;

namespace {

const char* kAllThrees = "KA: 3\nBA: 3\nEE: 3\nPT: 3\nIM: 3\nAD: 3\nBC: 3";

Trajectory small_trajectory() {
    Trajectory t;
    t.scene_id = "t-01";
    t.character = testing::two_hander().characters[0];
    t.environment = testing::two_hander().environment;
    t.steps.push_back({"The fire crackles.", {"Wukong", ActionKind::act, "Wukong stirs the embers.", 1}, 1, "p"});
    return t;
}

EvaluationRecord rec(std::string model, std::string scene, double v, Language lang = Language::en) {
    EvaluationRecord r;
    r.model_under_test = std::move(model);
    r.scene_id = std::move(scene);
    r.character = "c";
    r.trajectory_id = r.scene_id + "/" + r.character + "/" + r.model_under_test;
    r.judge = "judge";
    r.language = lang;
    r.scores.values.fill(v);
    return r;
}

void check_error(ErrorCode code, const std::function<void()>& f) {
    try {
        f();
        FAIL("expected error");
    } catch (const Error& e) {
        CHECK(e.code() == code);
    }
}

}  // namespace

TEST_CASE("score_trajectory critiques then scores") {
    auto q = std::make_shared<QueuedBackend>(std::vector<std::string>{"Solid but flat.", kAllThrees});
    auto gw = testing::gateway_for(q);
    Session s(*gw);
    auto scores = score_trajectory(s, small_trajectory(), "Test Piece", "judge", Language::en);
    for (double v : scores.values) CHECK(v == 3.0);
    CHECK(scores.critique == "Solid but flat.");
    REQUIRE(q->requests().size() == 2);
    CHECK(q->requests()[1].messages.back().content.find("Solid but flat.") != std::string::npos);
    CHECK(q->requests()[1].temperature == 0.0);
    CHECK(s.ledger().totals(RoleTag::judge).calls == 2);
}

TEST_CASE("out-of-range scores trigger repair") {
    auto q = std::make_shared<QueuedBackend>(std::vector<std::string>{
        "c", "KA: 5\nBA: 5\nEE: 5\nPT: 5\nIM: 5\nAD: 5\nBC: 0", kAllThrees});
    auto gw = testing::gateway_for(q);
    Session s(*gw);
    CHECK(score_trajectory(s, small_trajectory(), "T", "judge", Language::en).values[6] == 3.0);
    CHECK(q->requests().size() == 3);

    auto bad = std::make_shared<QueuedBackend>(std::vector<std::string>{"c", "x", "y", "z"});
    auto gw2 = testing::gateway_for(bad);
    Session s2(*gw2);
    CHECK_THROWS_AS(score_trajectory(s2, small_trajectory(), "T", "judge", Language::en), RepairExhausted);
    auto empty = small_trajectory();
    empty.steps.clear();
    check_error(ErrorCode::Precondition, [&] { score_trajectory(s2, empty, "T", "judge", Language::en); });
}

TEST_CASE("aggregate edge cases") {
    CHECK(aggregate({}).models.empty());

    auto one = aggregate({rec("m", "s1", 4)});
    REQUIRE(one.models.size() == 1);
    for (const auto& st : one.models[0].metrics) {
        CHECK(st.mean == 4.0);
        CHECK(st.std == 0.0);
        CHECK(st.single);
    }
    CHECK(one.render().find("(n=1)") != std::string::npos);

    auto two = aggregate({rec("m", "s1", 3), rec("m", "s2", 5)});
    for (const auto& st : two.models[0].metrics) {
        CHECK(st.mean == 4.0);
        CHECK(st.std == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
        CHECK_FALSE(st.single);
    }
    CHECK(two.render().find("4.00±1.41") != std::string::npos);
}

TEST_CASE("scene means come first, then the mean over scenes") {
    // Scene s1 has three trajectories averaging 2, scene s2 one trajectory of 5.
    auto r = aggregate({rec("m", "s1", 1), rec("m", "s1", 2), rec("m", "s1", 3), rec("m", "s2", 5)});
    CHECK(r.models[0].metrics[0].mean == 3.5);
    CHECK(r.models[0].scene_means.at("s1")[0] == 2.0);
}

TEST_CASE("aggregate separates languages and ignores record order") {
    std::vector<EvaluationRecord> rs = {rec("b", "s1", 3), rec("a", "s1", 4), rec("a", "z1", 2, Language::zh),
                                        rec("a", "s2", 5), rec("b", "s2", 2)};
    auto r1 = aggregate(rs);
    std::reverse(rs.begin(), rs.end());
    auto r2 = aggregate(rs);
    CHECK(r1.to_json() == r2.to_json());
    REQUIRE(r1.models.size() == 3);
    CHECK(r1.models[0].model == "a");
    CHECK(r1.models[2].language == Language::zh);
    CHECK(r1.find("a", Language::zh)->average.mean == 2.0);
    auto text = r1.render();
    CHECK(text.find("[en]") < text.find("[zh]"));
    CHECK(text.find("Average") != std::string::npos);
}

TEST_CASE("dimension grouping") {
    CHECK(dimension_metrics(Dimension::CharacterFidelity) == std::vector<Metric>{Metric::KA, Metric::BA});
    CHECK(dimension_metrics(Dimension::HumanLikeness) == std::vector<Metric>{Metric::EE, Metric::PT});
    CHECK(dimension_metrics(Dimension::Consistency) == std::vector<Metric>{Metric::IM, Metric::AD, Metric::BC});
}

TEST_CASE("cronbach alpha") {
    CHECK(cronbach_alpha({{1, 1, 1}, {2, 2, 2}, {4, 4, 4}}) == 1.0);
    std::vector<std::vector<double>> m = {{1, 2}, {2, 3}, {3, 4}};
    CHECK(std::abs(cronbach_alpha(m) - oracle::cronbach_alpha(m)) < 1e-12);
    check_error(ErrorCode::Precondition, [] { cronbach_alpha({{1}, {2}}); });
    check_error(ErrorCode::Precondition, [] { cronbach_alpha({{1, 2}}); });
    check_error(ErrorCode::Precondition, [] { cronbach_alpha({{1, 2}, {1}}); });
    check_error(ErrorCode::UndefinedStatistic, [] { cronbach_alpha({{3, 3}, {3, 3}}); });

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(1, 5);
    for (int i = 0; i < 200; ++i) {
        std::vector<std::vector<double>> rows(3 + rng() % 10, std::vector<double>(2 + rng() % 4));
        for (auto& r : rows)
            for (auto& x : r) x = u(rng);
        CHECK(std::abs(cronbach_alpha(rows) - oracle::cronbach_alpha(rows)) < 1e-12);
    }
}

TEST_CASE("pearson") {
    std::vector<double> xs = {1, 2, 3, 4, 5};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(2 * x + 1);
    CHECK(pearson(xs, ys) == 1.0);
    CHECK(pearson({1, 2, 3}, {3, 2, 1}) == -1.0);
    check_error(ErrorCode::UndefinedStatistic, [] { pearson({1, 1, 1}, {1, 2, 3}); });
    check_error(ErrorCode::Precondition, [] { pearson({1, 2}, {1}); });
    check_error(ErrorCode::Precondition, [] { pearson({1}, {1}); });

    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0, 1);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> a(50), b(50);
        for (int j = 0; j < 50; ++j) {
            a[j] = g(rng);
            b[j] = 0.3 * a[j] + g(rng);
        }
        double r = pearson(a, b);
        CHECK(std::abs(r - oracle::pearson(a, b)) < 1e-12);
        std::vector<double> scaled, neg;
        for (double x : a) {
            scaled.push_back(3 * x + 7);
            neg.push_back(-x);
        }
        CHECK(std::abs(pearson(scaled, b) - r) < 1e-12);
        CHECK(std::abs(pearson(neg, b) + r) < 1e-12);
    }
}

TEST_CASE("validity against human scores") {
    auto human = parse_human_scores(
        "trajectory_id,KA,BA,EE,PT,IM,AD,BC\n"
        "s1/c/a,3,3,3,3,3,3,3\n"
        "s2/c/a,5,5,5,5,5,5,5\n"
        "s3/c/a,4,4,4,4,4,2,4\n");
    CHECK(human.size() == 3);
    std::vector<EvaluationRecord> rs = {rec("a", "s1", 3), rec("a", "s2", 5), rec("a", "s3", 4)};
    rs[2].scores.values[5] = 2;
    auto rows = validity_report(rs, human);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].matched == 3);
    for (const auto& v : rows[0].metrics) CHECK(v.value_or(0) == doctest::Approx(1.0));
    CHECK(rows[0].overall.value_or(0) == doctest::Approx(1.0));
    CHECK(render_validity(rows).find("judge") != std::string::npos);

    auto tsv = parse_human_scores("trajectory_id\tKA\tBA\tEE\tPT\tIM\tAD\tBC\nx\t1\t1\t1\t1\t1\t1\t1\n");
    CHECK(tsv.count("x") == 1);
    check_error(ErrorCode::InsufficientData, [&] { validity_report({rs[0]}, human); });
}

TEST_CASE("reliability report covers every dimension per language") {
    std::vector<EvaluationRecord> rs;
    std::mt19937_64 rng(3);
    for (const char* model : {"a", "b"}) {
        for (int s = 0; s < 4; ++s) {
            auto r = rec(model, "s" + std::to_string(s), 3);
            for (auto& v : r.scores.values) v = 1 + static_cast<double>(rng() % 9) / 2;
            rs.push_back(r);
        }
    }
    auto entries = reliability_report(rs);
    CHECK(entries.size() == 3);
    for (const auto& e : entries) {
        CHECK(e.rows == 8);
        CHECK(e.language == Language::en);
    }
    CHECK(render_reliability(entries).find("Consistency") != std::string::npos);
}

TEST_CASE("records round trip") {
    auto r = rec("m", "s", 4.5);
    r.scores.critique = "terse";
    auto back = records_from_lines(records_to_lines({r, r}));
    REQUIRE(back.size() == 2);
    CHECK(back[0] == r);
}

TEST_CASE("evaluate_runs scores every trajectory of completed runs") {
    auto gw = testing::gateway_for(std::make_shared<SimulatedBackend>());
    testing::TempDir dir;
    RunConfig cfg;
    cfg.default_model = "sim-a";
    cfg.narrator_model = "sim-n";
    cfg.rounds = 1;
    auto scenes = load_scenes(testing::fixture("scenes"));
    scenes.resize(3);
    run_batch(*gw, scenes, cfg, 1, dir.path());
    auto runs = load_runs(dir.path());
    auto one = evaluate_runs(*gw, runs, "sim-judge", 1);
    auto four = evaluate_runs(*gw, runs, "sim-judge", 4);
    CHECK(one.failures.empty());
    CHECK(one.records == four.records);
    std::size_t expected = 0;
    for (const auto& r : runs) expected += r.trajectories.size();
    CHECK(one.records.size() == expected);
    for (const auto& r : one.records) {
        CHECK(r.judge == "sim-judge");
        CHECK(r.model_under_test == "sim-a");
    }
}
