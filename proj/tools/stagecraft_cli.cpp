#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stagecraft/engine.hpp"
#include "stagecraft/error.hpp"
#include "stagecraft/evaluator.hpp"
#include "stagecraft/factory.hpp"
#include "stagecraft/forge.hpp"
#include "stagecraft/gateway.hpp"
#include "stagecraft/text.hpp"

using namespace stagecraft;
namespace fs = std::filesystem;

namespace {

struct BackendOptions {
    std::string config;
    std::string record;
    std::string replay;

    void attach(CLI::App* app) {
        app->add_option("--backend", config, "Backend config JSON (default: built-in simulated backend)");
        auto* rec = app->add_option("--record", record, "Record every exchange into this script directory");
        auto* rep = app->add_option("--replay", replay, "Serve exchanges only from this script directory");
        rec->excludes(rep);
    }

    std::unique_ptr<Gateway> make() const {
        BackendConfig cfg;
        if (!config.empty()) cfg = BackendConfig::load(config);
        std::shared_ptr<Backend> backend;
        if (!replay.empty()) {
            backend = std::make_shared<ScriptedBackend>(ScriptMode::replay, replay);
        } else {
            backend = make_backend(cfg);
            if (!record.empty()) backend = std::make_shared<ScriptedBackend>(ScriptMode::record, record, backend);
        }
        return std::make_unique<Gateway>(backend, cfg.retry, cfg.prices);
    }
};

// Each --cast item is name=model, a JSON file mapping names to models, or a
// bare model id used for every character not mapped otherwise.
void parse_cast(const std::vector<std::string>& items, RunConfig& cfg) {
    for (const auto& item : items) {
        auto eq = item.find('=');
        if (eq != std::string::npos) {
            cfg.cast[text::trim(item.substr(0, eq))] = text::trim(item.substr(eq + 1));
        } else if (fs::is_regular_file(item)) {
            auto j = Json::parse(read_file(item));
            for (auto it = j.begin(); it != j.end(); ++it) cfg.cast[it.key()] = it.value().get<std::string>();
        } else {
            cfg.default_model = item;
        }
    }
}

void print_costs(const UsageLedger& ledger, const PriceTable& prices) {
    try {
        std::cout << scene_cost_report(ledger, prices).render();
    } catch (const Error& e) {
        if (e.code() != ErrorCode::MissingRate) throw;
        for (auto role : kAllRoleTags) {
            auto t = ledger.totals(role);
            if (t.calls == 0) continue;
            std::cout << "  " << to_string(role) << ": " << t.calls << " calls, " << t.input_tokens << " in / "
                      << t.output_tokens << " out tokens\n";
        }
    }
}

// Subcommand state lives here so the CLI11 callbacks stay small.
struct RunCmd {
    std::string scene;
    std::vector<std::string> cast;
    std::string model;
    std::string narrator;
    int rounds = kDefaultRounds;
    int recall_k = kDefaultRecallK;
    int parallel = 1;
    std::string out = "out";
    BackendOptions backend;

    int exec() const {
        auto gateway = backend.make();
        RunConfig cfg;
        cfg.default_model = model;
        parse_cast(cast, cfg);
        cfg.narrator_model = narrator.empty() ? cfg.default_model : narrator;
        cfg.rounds = rounds;
        cfg.recall_k = recall_k;
        cfg.seed = backend.replay.empty() ? backend.record : backend.replay;
        auto scenes = load_scenes(scene);
        for (const auto& s : scenes) {
            for (const auto& v : validate_scene(s)) {
                if (v.warning) std::cerr << "warning: " << s.id << ": " << v.detail << "\n";
            }
        }
        auto runs = run_batch(*gateway, scenes, cfg, parallel, fs::path(out));
        int failed = 0;
        for (const auto& r : runs) {
            std::cout << r.scene.id << ": " << to_string(r.status) << ", " << r.events.size() << " events";
            if (!r.error.empty()) std::cout << " (" << r.error << ")";
            std::cout << "\n";
            if (r.status == RunStatus::failed) ++failed;
            if (!r.ledger.entries().empty()) print_costs(r.ledger, gateway->prices());
        }
        std::cout << "output: " << out << "\n";
        return failed == 0 ? 0 : 1;
    }
};

struct CraftCmd {
    std::vector<std::string> sources;
    int extract = 0;
    int generate = 0;
    std::string lang;
    std::string model;
    std::string screenwriter;
    std::string director;
    std::string judge;
    AcceptancePolicy policy;
    std::string out = "scenes";
    BackendOptions backend;

    int exec() const {
        auto gateway = backend.make();
        CraftConfig cfg;
        for (const auto& s : sources) {
            auto src = load_source(s);
            if (!lang.empty()) src.language = parse_language(lang);
            cfg.sources.push_back(src);
        }
        cfg.extract = extract;
        cfg.generate = generate;
        cfg.models = ForgeModels{screenwriter.empty() ? model : screenwriter, director.empty() ? model : director,
                                 judge.empty() ? model : judge};
        cfg.policy = policy;
        auto result = craft(*gateway, cfg);
        fs::create_directories(out);
        for (const auto& s : result.scenes) store_scene(s, fs::path(out) / (s.id + ".json"));
        write_file(fs::path(out) / "craft_report.json", result.report.to_json().dump(2) + "\n");
        for (const auto& a : result.report.attempts) {
            std::cout << a.scene_id << " attempt " << a.attempt << ": " << (a.accepted ? "accepted" : "rejected");
            if (a.quality) {
                std::cout << " [";
                if (a.quality->creativity) std::cout << "creativity " << *a.quality->creativity << ", ";
                std::cout << "coherence " << a.quality->coherence << ", conformity " << a.quality->conformity
                          << ", detail " << a.quality->detail << "]";
            }
            if (!a.error.empty()) std::cout << " " << a.error;
            std::cout << "\n";
        }
        std::cout << result.report.accepted << "/" << result.report.requested << " scenes accepted -> " << out << "\n";
        print_costs(result.ledger, gateway->prices());
        return 0;
    }
};

struct EvalCmd {
    std::string runs;
    std::string judge;
    std::string out = "report";
    int parallel = 1;
    BackendOptions backend;

    int exec() const {
        auto gateway = backend.make();
        auto stored = load_runs(runs);
        if (stored.empty()) throw Error(ErrorCode::Lookup, "no run directories under " + runs);
        auto result = evaluate_runs(*gateway, stored, judge, parallel);
        fs::create_directories(out);
        write_file(fs::path(out) / "records.jsonl", records_to_lines(result.records));
        auto report = aggregate(result.records, static_cast<int>(result.failures.size()));
        Json doc = report.to_json();
        Json failures = Json::array();
        for (const auto& f : result.failures) {
            failures.push_back(Json{{"trajectory_id", f.trajectory_id}, {"model", f.model_under_test}, {"error", f.error}});
        }
        doc["failures"] = failures;
        doc["judge"] = judge;
        write_file(fs::path(out) / "report.json", doc.dump(2) + "\n");
        const auto table = report.render();
        write_file(fs::path(out) / "report.txt", table);
        std::cout << table;
        std::cout << result.records.size() << " trajectories scored, " << result.failures.size() << " failed -> "
                  << out << "\n";
        print_costs(result.ledger, gateway->prices());
        return 0;
    }
};

struct StatsCmd {
    std::string records;
    std::string human;

    int exec() const {
        auto recs = load_records(records);
        std::cout << aggregate(recs).render() << "\n";
        std::cout << "Cronbach's alpha\n" << render_reliability(reliability_report(recs));
        if (!human.empty()) {
            auto scores = parse_human_scores(read_file(human));
            std::cout << "\nPearson correlation with human scores\n"
                      << render_validity(validity_report(recs, scores));
        }
        return 0;
    }
};

struct ExportCmd {
    std::string runs;
    std::string records;
    std::string method = "guided";
    std::string model;
    std::optional<double> min_mean;
    std::string out = "sft.jsonl";
    BackendOptions backend;

    int exec() const {
        auto stored = load_runs(runs);
        std::vector<SftExample> examples;
        if (method == "guided") {
            if (records.empty()) throw Error(ErrorCode::Precondition, "guided export needs --records");
            auto recs = load_records(records);
            auto sel = select_guided(recs, stored, GuidedPolicy{min_mean});
            for (const auto& t : sel.teachers) {
                std::cout << "teacher [" << to_string(t.language) << "]: " << t.model << " (average " << t.average
                          << ")\n";
            }
            for (const auto& t : sel.trajectories) {
                if (!model.empty() && t.model != model) continue;
                auto ex = build_sft(t, SftSource::guided);
                examples.insert(examples.end(), ex.begin(), ex.end());
            }
        } else {
            auto gateway = backend.make();
            Session session(*gateway);
            for (const auto& t : trajectories_played_by(stored, model)) {
                if (t.trajectory.steps.empty()) continue;
                auto r = reflective_rewrite(session, t);
                std::cout << t.trajectory.id() << ": " << r.changed.size() << " rewritten, " << r.flagged.size()
                          << " flagged\n";
                auto ex = build_sft(r.rewritten, SftSource::reflective);
                examples.insert(examples.end(), ex.begin(), ex.end());
            }
            print_costs(session.ledger(), gateway->prices());
        }
        auto manifest = export_dataset(examples, out);
        std::cout << manifest.at("count").get<int>() << " examples -> " << out << "\n";
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent role-play simulation sandbox"};
    app.require_subcommand(1);

    RunCmd run;
    auto* run_app = app.add_subcommand("run", "Simulate scenes");
    run_app->add_option("--scene", run.scene, "Scene file or directory of scene files")->required();
    run_app->add_option("--cast", run.cast, "Model id, name=model pair, or JSON file mapping names to models");
    run_app->add_option("--model", run.model, "Model for characters not listed in --cast");
    run_app->add_option("--narrator", run.narrator, "Narrator model (default: --model)");
    run_app->add_option("--rounds", run.rounds, "Rounds per scene")->check(CLI::PositiveNumber);
    run_app->add_option("--recall-k", run.recall_k, "Memories recalled per action")->check(CLI::NonNegativeNumber);
    run_app->add_option("--parallel", run.parallel, "Scenes run at once")->check(CLI::PositiveNumber);
    run_app->add_option("--out", run.out, "Output directory");
    run.backend.attach(run_app);

    CraftCmd craft_cmd;
    auto* craft_app = app.add_subcommand("craft", "Craft scenes from source works");
    craft_app->add_option("--source", craft_cmd.sources, "Source file(s): .json {title, language, text} or plain text")
        ->required();
    craft_app->add_option("--extract", craft_cmd.extract, "Scenes to extract per source");
    craft_app->add_option("--generate", craft_cmd.generate, "Scenes to generate per source");
    craft_app->add_option("--lang", craft_cmd.lang, "Override source language")->check(CLI::IsMember({"en", "zh"}));
    craft_app->add_option("--model", craft_cmd.model, "Model for all three stages");
    craft_app->add_option("--screenwriter", craft_cmd.screenwriter, "Screenwriter model (default: --model)");
    craft_app->add_option("--director", craft_cmd.director, "Director model (default: --model)");
    craft_app->add_option("--judge", craft_cmd.judge, "Scene judge model (default: --model)");
    craft_app->add_option("--min-mean", craft_cmd.policy.min_mean, "Acceptance: minimum mean aspect score");
    craft_app->add_option("--min-each", craft_cmd.policy.min_each, "Acceptance: minimum score of every aspect");
    craft_app->add_option("--max-attempts", craft_cmd.policy.max_attempts, "Drafts tried per requested scene")->check(CLI::PositiveNumber);
    craft_app->add_option("--out", craft_cmd.out, "Directory for accepted scenes and the report");
    craft_cmd.backend.attach(craft_app);

    EvalCmd eval;
    auto* eval_app = app.add_subcommand("eval", "Score run trajectories with a judge model");
    eval_app->add_option("--runs", eval.runs, "Run output directory")->required();
    eval_app->add_option("--judge", eval.judge, "Judge model")->required();
    eval_app->add_option("--out", eval.out, "Report directory");
    eval_app->add_option("--parallel", eval.parallel, "Runs scored at once")->check(CLI::PositiveNumber);
    eval.backend.attach(eval_app);

    StatsCmd stats;
    auto* stats_app = app.add_subcommand("stats", "Aggregate scores and reliability/validity statistics");
    stats_app->add_option("--records", stats.records, "records.jsonl from eval")->required();
    stats_app->add_option("--human", stats.human, "Human scores: trajectory_id,KA,BA,EE,PT,IM,AD,BC");

    ExportCmd exp;
    auto* exp_app = app.add_subcommand("export-sft", "Build a fine-tuning dataset from runs");
    exp_app->add_option("--runs", exp.runs, "Run output directory")->required();
    exp_app->add_option("--records", exp.records, "records.jsonl from eval (guided)");
    exp_app->add_option("--method", exp.method)->check(CLI::IsMember({"guided", "reflective"}));
    exp_app->add_option("--model", exp.model, "Restrict to trajectories played by this model");
    exp_app->add_option("--min-mean", exp.min_mean, "Guided: minimum per-trajectory mean score");
    exp_app->add_option("--out", exp.out, "Dataset file (JSON lines)");
    exp.backend.attach(exp_app);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_app->parsed()) return run.exec();
        if (craft_app->parsed()) return craft_cmd.exec();
        if (eval_app->parsed()) return eval.exec();
        if (stats_app->parsed()) return stats.exec();
        if (exp_app->parsed()) return exp.exec();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
