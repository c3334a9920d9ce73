#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stagecraft/engine.hpp"
#include "stagecraft/error.hpp"
#include "stagecraft/evaluator.hpp"
#include "stagecraft/factory.hpp"
#include "stagecraft/gateway.hpp"
#include "stagecraft/simulated.hpp"

namespace py = pybind11;
using namespace stagecraft;

namespace {

struct BackendChoice {
    std::string config;  // backend config file; empty = simulated
    std::string record;
    std::string replay;
};

std::unique_ptr<Gateway> make_gateway(const BackendChoice& b) {
    BackendConfig cfg;
    if (!b.config.empty()) cfg = BackendConfig::load(b.config);
    std::shared_ptr<Backend> backend;
    if (!b.replay.empty()) {
        backend = std::make_shared<ScriptedBackend>(ScriptMode::replay, b.replay);
    } else if (!b.record.empty()) {
        backend = std::make_shared<ScriptedBackend>(ScriptMode::record, b.record, make_backend(cfg));
    } else {
        backend = make_backend(cfg);
    }
    return std::make_unique<Gateway>(backend, cfg.retry, cfg.prices);
}

std::string run_json(const std::string& scene_path, const std::string& config_json, const std::string& out,
                     int parallel, const std::string& backend, const std::string& record, const std::string& replay) {
    auto j = Json::parse(config_json);
    RunConfig cfg;
    cfg.default_model = j.value("default_model", "");
    cfg.narrator_model = j.value("narrator_model", cfg.default_model);
    cfg.rounds = j.value("rounds", kDefaultRounds);
    cfg.recall_k = j.value("recall_k", kDefaultRecallK);
    if (j.contains("cast")) cfg.cast = j.at("cast").get<std::map<std::string, std::string>>();
    auto scenes = load_scenes(scene_path);
    auto gw = make_gateway({backend, record, replay});
    std::optional<std::filesystem::path> out_dir;
    if (!out.empty()) out_dir = out;
    std::vector<SceneRun> runs;
    {
        py::gil_scoped_release release;
        runs = run_batch(*gw, scenes, cfg, parallel, out_dir);
    }
    Json result = Json::array();
    for (const auto& r : runs) {
        Json row = run_manifest(r);
        Json events = Json::array();
        for (const auto& e : r.events) events.push_back(to_json(e));
        row["events"] = std::move(events);
        result.push_back(row);
    }
    return result.dump();
}

std::string validate_json(const std::string& scene_json) {
    auto scene = scene_from_json(Json::parse(scene_json));
    Json out = Json::array();
    for (const auto& v : validate_scene(scene)) {
        out.push_back({{"code", to_string(v.code)}, {"warning", v.warning}, {"detail", v.detail}});
    }
    return out.dump();
}

std::string aggregate_json(const std::string& records_jsonl) {
    return aggregate(records_from_lines(records_jsonl)).to_json().dump();
}

std::string render_aggregate(const std::string& records_jsonl) {
    return aggregate(records_from_lines(records_jsonl)).render();
}

std::string cost_json(const std::string& ledger_jsonl, const std::string& prices_json) {
    auto report = scene_cost_report(UsageLedger::from_lines(ledger_jsonl), PriceTable::from_json(Json::parse(prices_json)));
    return report.to_json().dump();
}

std::vector<std::string> turn_structure(const std::string& run_dir) {
    auto run = load_run(run_dir);
    return check_turn_structure(run.events, run.scene.names(), run.manifest.value("rounds", 0));
}

std::string evaluate_json(const std::string& runs_dir, const std::string& judge, int parallel,
                          const std::string& backend, const std::string& record, const std::string& replay) {
    auto gw = make_gateway({backend, record, replay});
    auto runs = load_runs(runs_dir);
    EvaluationRun result;
    {
        py::gil_scoped_release release;
        result = evaluate_runs(*gw, runs, judge, parallel);
    }
    return records_to_lines(result.records);
}

}  // namespace

PYBIND11_MODULE(_stagecraft, m) {
    m.doc() = "Role-play simulation sandbox core";

    static py::exception<Error> error(m, "StagecraftError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            error(e.what());
        } catch (const Json::exception& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("cronbach_alpha", &cronbach_alpha, py::arg("rows"));
    m.def("pearson", &pearson, py::arg("xs"), py::arg("ys"));
    m.def("validate_scene_json", &validate_json, py::arg("scene_json"));
    m.def("run_json", &run_json, py::arg("scene_path"), py::arg("config_json"), py::arg("out") = "",
          py::arg("parallel") = 1, py::arg("backend") = "", py::arg("record") = "", py::arg("replay") = "");
    m.def("evaluate_jsonl", &evaluate_json, py::arg("runs_dir"), py::arg("judge"), py::arg("parallel") = 1,
          py::arg("backend") = "", py::arg("record") = "", py::arg("replay") = "");
    m.def("aggregate_json", &aggregate_json, py::arg("records_jsonl"));
    m.def("render_aggregate", &render_aggregate, py::arg("records_jsonl"));
    m.def("cost_json", &cost_json, py::arg("ledger_jsonl"), py::arg("prices_json"));
    m.def("check_turn_structure", &turn_structure, py::arg("run_dir"));
    m.def("hash_embedding", [](const std::string& t) { return hash_embedding(t); }, py::arg("text"));
}
