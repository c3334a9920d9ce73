#include "stagecraft/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <thread>

#include "stagecraft/error.hpp"
#include "stagecraft/parse.hpp"
#include "stagecraft/prompts.hpp"
#include "stagecraft/repair.hpp"
#include "stagecraft/text.hpp"

namespace stagecraft {

Json to_json(const EvaluationRecord& r) {
    return Json{{"trajectory_id", r.trajectory_id},
                {"scene_id", r.scene_id},
                {"character", r.character},
                {"model_under_test", r.model_under_test},
                {"judge", r.judge},
                {"language", to_string(r.language)},
                {"scores", to_json(r.scores)}};
}

EvaluationRecord record_from_json(const Json& j) {
    auto req = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_string()) throw Error(ErrorCode::MissingField, std::string("record.") + key);
        return j.at(key).get<std::string>();
    };
    EvaluationRecord r;
    r.trajectory_id = req("trajectory_id");
    r.scene_id = req("scene_id");
    r.character = j.value("character", "");
    r.model_under_test = req("model_under_test");
    r.judge = req("judge");
    r.language = parse_language(j.value("language", "en"));
    if (!j.contains("scores")) throw Error(ErrorCode::MissingField, "record.scores");
    r.scores = scores_from_json(j.at("scores"));
    return r;
}

std::string records_to_lines(const std::vector<EvaluationRecord>& records) {
    std::string out;
    for (const auto& r : records) out += to_json(r).dump() + "\n";
    return out;
}

std::vector<EvaluationRecord> records_from_lines(std::string_view text) {
    std::vector<EvaluationRecord> out;
    for (const auto& line : text::split(text, "\n")) {
        if (text::trim(line).empty()) continue;
        out.push_back(record_from_json(Json::parse(line)));
    }
    return out;
}

std::vector<EvaluationRecord> load_records(const std::filesystem::path& path) {
    return records_from_lines(read_file(path));
}

MetricScores score_trajectory(Session& session, const Trajectory& trajectory, const std::string& title,
                              const std::string& judge, Language lang) {
    if (trajectory.steps.empty()) throw Error(ErrorCode::Precondition, "trajectory " + trajectory.id() + " is empty");
    auto critique_req = ChatRequest::user(judge, prompts::critique(trajectory, title, lang), kJudgeTemperature,
                                          prompts::purpose::kCritique);
    auto critique = complete_with_repair(session, critique_req, RoleTag::judge, prompts::reminder::non_empty(lang),
                                         ErrorCode::Evaluation, [](const std::string& reply) {
                                             auto t = text::trim(reply);
                                             if (t.empty()) throw Error(ErrorCode::Parse, "empty critique");
                                             return t;
                                         });
    auto score_req = ChatRequest::user(judge, prompts::score(trajectory, title, critique.value, lang),
                                       kJudgeTemperature, prompts::purpose::kScore);
    auto scores = complete_with_repair(session, score_req, RoleTag::judge, prompts::reminder::scores(lang),
                                       ErrorCode::Evaluation,
                                       [](const std::string& reply) { return parse::metric_scores(reply); });
    scores.value.critique = critique.value;
    return scores.value;
}

EvaluationRun evaluate_runs(Gateway& gateway, const std::vector<StoredRun>& runs, const std::string& judge,
                            int parallelism) {
    if (parallelism < 1) throw Error(ErrorCode::Precondition, "parallelism must be >= 1");
    if (judge.empty()) throw Error(ErrorCode::Precondition, "no judge model");
    struct Slot {
        std::vector<EvaluationRecord> records;
        std::vector<EvaluationFailure> failures;
        UsageLedger ledger;
    };
    std::vector<Slot> slots(runs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const auto i = next.fetch_add(1);
            if (i >= runs.size()) return;
            const auto& run = runs[i];
            if (!run.completed()) continue;
            Session session(gateway);
            for (const auto& t : run.trajectories) {
                if (t.steps.empty()) continue;
                const auto model = run.model_for(t.character.name);
                try {
                    auto scores = score_trajectory(session, t, run.scene.title, judge, run.scene.language);
                    slots[i].records.push_back(EvaluationRecord{t.id(), t.scene_id, t.character.name, model, judge,
                                                                run.scene.language, scores});
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::Evaluation) throw;
                    slots[i].failures.push_back(EvaluationFailure{t.id(), model, e.what()});
                }
            }
            slots[i].ledger = session.ledger();
        }
    };
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism), std::max<std::size_t>(1, runs.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    EvaluationRun out;
    for (auto& s : slots) {
        out.records.insert(out.records.end(), s.records.begin(), s.records.end());
        out.failures.insert(out.failures.end(), s.failures.begin(), s.failures.end());
        for (const auto& e : s.ledger.entries()) out.ledger.append(e);
    }
    return out;
}

// --- aggregation -----------------------------------------------------------

std::string_view to_string(Dimension d) {
    switch (d) {
        case Dimension::CharacterFidelity: return "Character Fidelity";
        case Dimension::HumanLikeness: return "Human-Likeness";
        case Dimension::Consistency: return "Consistency";
    }
    return "";
}

const std::vector<Metric>& dimension_metrics(Dimension d) {
    static const std::vector<Metric> cf{Metric::KA, Metric::BA};
    static const std::vector<Metric> hl{Metric::EE, Metric::PT};
    static const std::vector<Metric> co{Metric::IM, Metric::AD, Metric::BC};
    switch (d) {
        case Dimension::CharacterFidelity: return cf;
        case Dimension::HumanLikeness: return hl;
        case Dimension::Consistency: return co;
    }
    return cf;
}

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

Stat stat_of(const std::vector<double>& v) {
    Stat s;
    s.n = static_cast<int>(v.size());
    if (v.empty()) return s;
    s.mean = mean_of(v);
    if (v.size() == 1) {
        s.single = true;
    } else {
        s.std = std::sqrt(sample_variance(v));
    }
    return s;
}

std::string fixed(double v, int places = 2) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", places, v);
    return buf;
}

Json stat_json(const Stat& s) {
    Json j{{"mean", s.mean}, {"std", s.std}, {"n", s.n}};
    if (s.single) j["single"] = true;
    return j;
}

std::string pad(const std::string& s, std::size_t width) {
    // Widths count code points so zh model names line up roughly.
    std::size_t cps = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++cps;
    }
    return cps >= width ? s : s + std::string(width - cps, ' ');
}

}  // namespace

const ModelAggregate* AggregateReport::find(const std::string& model, Language lang) const {
    for (const auto& m : models) {
        if (m.model == model && m.language == lang) return &m;
    }
    return nullptr;
}

AggregateReport aggregate(const std::vector<EvaluationRecord>& records, int excluded) {
    AggregateReport report;
    report.excluded = excluded;
    // (language, model) -> scene -> list of per-trajectory scores
    std::map<std::pair<Language, std::string>, std::map<std::string, std::vector<const MetricScores*>>> cells;
    for (const auto& r : records) cells[{r.language, r.model_under_test}][r.scene_id].push_back(&r.scores);

    for (const auto& [key, scenes] : cells) {
        ModelAggregate agg;
        agg.language = key.first;
        agg.model = key.second;
        std::array<std::vector<double>, kMetricCount> per_metric;
        std::array<std::vector<double>, 3> per_dim;
        std::vector<double> averages;
        for (const auto& [scene_id, list] : scenes) {
            std::array<double, kMetricCount> means{};
            for (auto m : kAllMetrics) {
                double sum = 0.0;
                for (const auto* s : list) sum += (*s)[m];
                means[static_cast<std::size_t>(m)] = sum / static_cast<double>(list.size());
            }
            agg.scene_means[scene_id] = means;
            for (std::size_t i = 0; i < kMetricCount; ++i) per_metric[i].push_back(means[i]);
            for (std::size_t d = 0; d < kAllDimensions.size(); ++d) {
                double sum = 0.0;
                const auto& ms = dimension_metrics(kAllDimensions[d]);
                for (auto m : ms) sum += means[static_cast<std::size_t>(m)];
                per_dim[d].push_back(sum / static_cast<double>(ms.size()));
            }
            averages.push_back(std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(kMetricCount));
        }
        for (std::size_t i = 0; i < kMetricCount; ++i) agg.metrics[i] = stat_of(per_metric[i]);
        for (std::size_t d = 0; d < per_dim.size(); ++d) agg.dimensions[d] = stat_of(per_dim[d]);
        agg.average = stat_of(averages);
        report.models.push_back(std::move(agg));
    }
    return report;
}

Json AggregateReport::to_json() const {
    Json models_json = Json::array();
    for (const auto& m : models) {
        Json metrics = Json::object();
        for (auto metric : kAllMetrics) metrics[std::string(short_name(metric))] = stat_json(m.metrics[static_cast<std::size_t>(metric)]);
        Json dims = Json::object();
        for (std::size_t d = 0; d < kAllDimensions.size(); ++d) dims[std::string(to_string(kAllDimensions[d]))] = stat_json(m.dimensions[d]);
        Json scenes = Json::object();
        for (const auto& [id, means] : m.scene_means) {
            Json row = Json::object();
            for (auto metric : kAllMetrics) row[std::string(short_name(metric))] = means[static_cast<std::size_t>(metric)];
            scenes[id] = row;
        }
        models_json.push_back(Json{{"model", m.model},
                                   {"language", stagecraft::to_string(m.language)},
                                   {"metrics", metrics},
                                   {"dimensions", dims},
                                   {"average", stat_json(m.average)},
                                   {"scenes", scenes}});
    }
    return Json{{"models", models_json}, {"excluded", excluded}};
}

std::string AggregateReport::render() const {
    std::size_t name_width = 5;
    for (const auto& m : models) name_width = std::max(name_width, m.model.size());
    name_width += 2;
    constexpr std::size_t cell = 12;
    std::string out;
    std::optional<Language> current;
    for (const auto& m : models) {
        if (!current || *current != m.language) {
            if (current) out += "\n";
            current = m.language;
            out += "[" + std::string(stagecraft::to_string(m.language)) + "]\n";
            std::string header = pad("Model", name_width);
            for (auto metric : kAllMetrics) header += pad(std::string(short_name(metric)), cell);
            header += "Average";
            out += header + "\n";
        }
        std::string row = pad(m.model, name_width);
        for (auto metric : kAllMetrics) {
            const auto& s = m.metrics[static_cast<std::size_t>(metric)];
            row += pad(fixed(s.mean) + "±" + fixed(s.std), cell);
        }
        row += fixed(m.average.mean) + "±" + fixed(m.average.std);
        if (m.average.single) row += "  (n=1)";
        out += row + "\n";
    }
    if (excluded > 0) out += "excluded trajectories: " + std::to_string(excluded) + "\n";
    return out;
}

// --- statistics -------------------------------------------------------------

double cronbach_alpha(const std::vector<std::vector<double>>& rows) {
    if (rows.size() < 2) throw Error(ErrorCode::Precondition, "cronbach_alpha needs at least 2 rows");
    const std::size_t k = rows.front().size();
    if (k < 2) throw Error(ErrorCode::Precondition, "cronbach_alpha needs at least 2 items");
    for (const auto& r : rows) {
        if (r.size() != k) throw Error(ErrorCode::Precondition, "cronbach_alpha rows differ in length");
    }
    // Sums of squared deviations; the n-1 divisor cancels in the ratio.
    auto ss = [](const std::vector<double>& v) {
        const double m = mean_of(v);
        double acc = 0.0;
        for (double x : v) acc += (x - m) * (x - m);
        return acc;
    };
    double item_ss = 0.0;
    std::vector<double> column(rows.size());
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < rows.size(); ++i) column[i] = rows[i][j];
        item_ss += ss(column);
    }
    std::vector<double> totals;
    totals.reserve(rows.size());
    for (const auto& r : rows) totals.push_back(std::accumulate(r.begin(), r.end(), 0.0));
    const double total_ss = ss(totals);
    if (!(total_ss > 0.0)) throw Error(ErrorCode::UndefinedStatistic, "total score variance is zero");
    const double kd = static_cast<double>(k);
    return kd * (total_ss - item_ss) / ((kd - 1.0) * total_ss);
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw Error(ErrorCode::Precondition, "pearson inputs differ in length");
    if (xs.size() < 2) throw Error(ErrorCode::Precondition, "pearson needs at least 2 points");
    const double mx = mean_of(xs);
    const double my = mean_of(ys);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw Error(ErrorCode::UndefinedStatistic, "pearson input is constant");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<ReliabilityEntry> reliability_report(const std::vector<EvaluationRecord>& records) {
    std::vector<ReliabilityEntry> out;
    auto report = aggregate(records);
    std::set<Language> languages;
    for (const auto& m : report.models) languages.insert(m.language);
    for (auto lang : languages) {
        for (auto dim : kAllDimensions) {
            ReliabilityEntry e;
            e.language = lang;
            e.dimension = dim;
            std::vector<std::vector<double>> rows;
            for (const auto& m : report.models) {
                if (m.language != lang) continue;
                for (const auto& [scene, means] : m.scene_means) {
                    std::vector<double> row;
                    for (auto metric : dimension_metrics(dim)) row.push_back(means[static_cast<std::size_t>(metric)]);
                    rows.push_back(std::move(row));
                }
            }
            e.rows = static_cast<int>(rows.size());
            try {
                e.alpha = cronbach_alpha(rows);
            } catch (const Error& err) {
                e.note = err.what();
            }
            out.push_back(std::move(e));
        }
    }
    return out;
}

std::string render_reliability(const std::vector<ReliabilityEntry>& entries) {
    std::vector<Language> langs;
    for (const auto& e : entries) {
        if (std::find(langs.begin(), langs.end(), e.language) == langs.end()) langs.push_back(e.language);
    }
    std::string out = pad("Dimension", 22);
    for (auto l : langs) out += pad(std::string(to_string(l)), 10);
    out += "\n";
    for (auto dim : kAllDimensions) {
        std::string row = pad(std::string(to_string(dim)), 22);
        for (auto l : langs) {
            std::string cell = "-";
            for (const auto& e : entries) {
                if (e.language == l && e.dimension == dim && e.alpha) cell = fixed(*e.alpha, 3);
            }
            row += pad(cell, 10);
        }
        out += row + "\n";
    }
    return out;
}

HumanScores parse_human_scores(std::string_view content) {
    HumanScores out;
    auto lines = text::split(content, "\n");
    std::vector<std::string> header;
    std::string delim = ",";
    std::array<int, kMetricCount> column{};
    int id_column = -1;
    bool have_header = false;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        auto line = text::trim(lines[ln]);
        if (line.empty() || line[0] == '#') continue;
        if (!have_header) {
            if (line.find('\t') != std::string::npos) delim = "\t";
            header = text::split(line, delim);
            for (auto& h : header) h = text::trim(h);
            column.fill(-1);
            for (std::size_t c = 0; c < header.size(); ++c) {
                if (text::iequals(header[c], "trajectory_id")) id_column = static_cast<int>(c);
                for (auto m : kAllMetrics) {
                    if (text::iequals(header[c], short_name(m))) column[static_cast<std::size_t>(m)] = static_cast<int>(c);
                }
            }
            if (id_column < 0) throw Error(ErrorCode::MissingField, "human scores: trajectory_id column");
            for (auto m : kAllMetrics) {
                if (column[static_cast<std::size_t>(m)] < 0) {
                    throw Error(ErrorCode::MissingField, "human scores: " + std::string(short_name(m)) + " column");
                }
            }
            have_header = true;
            continue;
        }
        auto cells = text::split(line, delim);
        if (cells.size() < header.size()) {
            throw Error(ErrorCode::Parse, "human scores line " + std::to_string(ln + 1) + ": too few columns");
        }
        std::array<double, kMetricCount> values{};
        for (auto m : kAllMetrics) {
            const auto& cell = cells[static_cast<std::size_t>(column[static_cast<std::size_t>(m)])];
            try {
                std::size_t used = 0;
                auto t = text::trim(cell);
                values[static_cast<std::size_t>(m)] = std::stod(t, &used);
                if (used != t.size()) throw std::invalid_argument(t);
            } catch (const std::exception&) {
                throw Error(ErrorCode::Parse, "human scores line " + std::to_string(ln + 1) + ": bad number '" +
                                                  text::trim(cell) + "'");
            }
        }
        out[text::trim(cells[static_cast<std::size_t>(id_column)])] = values;
    }
    if (!have_header) throw Error(ErrorCode::Parse, "human scores: no header");
    return out;
}

std::vector<ValidityRow> validity_report(const std::vector<EvaluationRecord>& records, const HumanScores& human) {
    std::map<std::string, std::vector<const EvaluationRecord*>> by_judge;
    for (const auto& r : records) by_judge[r.judge].push_back(&r);
    std::vector<ValidityRow> out;
    for (const auto& [judge, list] : by_judge) {
        ValidityRow row;
        row.judge = judge;
        std::array<std::vector<double>, kMetricCount> auto_cols;
        std::array<std::vector<double>, kMetricCount> human_cols;
        std::vector<double> auto_overall;
        std::vector<double> human_overall;
        for (const auto* r : list) {
            auto it = human.find(r->trajectory_id);
            if (it == human.end()) continue;
            for (std::size_t i = 0; i < kMetricCount; ++i) {
                auto_cols[i].push_back(r->scores.values[i]);
                human_cols[i].push_back(it->second[i]);
            }
            auto_overall.push_back(r->scores.mean());
            human_overall.push_back(std::accumulate(it->second.begin(), it->second.end(), 0.0) /
                                    static_cast<double>(kMetricCount));
        }
        row.matched = static_cast<int>(auto_overall.size());
        if (row.matched < 2) {
            throw Error(ErrorCode::InsufficientData, "judge " + judge + ": " + std::to_string(row.matched) +
                                                         " trajectories matched the human scores, need 2");
        }
        for (std::size_t i = 0; i < kMetricCount; ++i) {
            try {
                row.metrics[i] = pearson(auto_cols[i], human_cols[i]);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::UndefinedStatistic) throw;
            }
        }
        try {
            row.overall = pearson(auto_overall, human_overall);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::UndefinedStatistic) throw;
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::string render_validity(const std::vector<ValidityRow>& rows) {
    std::size_t width = 7;
    for (const auto& r : rows) width = std::max(width, r.judge.size() + 2);
    std::string out = pad("Judge", width);
    for (auto m : kAllMetrics) out += pad(std::string(short_name(m)), 8);
    out += "Overall\n";
    auto cell = [](const std::optional<double>& v) { return v ? fixed(*v, 3) : std::string("-"); };
    for (const auto& r : rows) {
        std::string line = pad(r.judge, width);
        for (std::size_t i = 0; i < kMetricCount; ++i) line += pad(cell(r.metrics[i]), 8);
        line += cell(r.overall);
        out += line + "\n";
    }
    return out;
}

}  // namespace stagecraft
