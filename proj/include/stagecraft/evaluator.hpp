#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stagecraft/domain.hpp"
#include "stagecraft/engine.hpp"
#include "stagecraft/gateway.hpp"

namespace stagecraft {

struct EvaluationRecord {
    std::string trajectory_id;
    std::string scene_id;
    std::string character;
    std::string model_under_test;
    std::string judge;
    Language language = Language::en;
    MetricScores scores;

    bool operator==(const EvaluationRecord&) const = default;
};

Json to_json(const EvaluationRecord& r);
EvaluationRecord record_from_json(const Json& j);
std::string records_to_lines(const std::vector<EvaluationRecord>& records);
std::vector<EvaluationRecord> records_from_lines(std::string_view text);
std::vector<EvaluationRecord> load_records(const std::filesystem::path& path);

// Critique call, then a scoring call that embeds the critique. The returned
// scores carry the critique text. Throws Error(Precondition) for an empty
// trajectory and RepairExhausted(Evaluation) when no usable scores arrive.
MetricScores score_trajectory(Session& session, const Trajectory& trajectory, const std::string& title,
                              const std::string& judge, Language lang);

struct EvaluationFailure {
    std::string trajectory_id;
    std::string model_under_test;
    std::string error;
};

struct EvaluationRun {
    std::vector<EvaluationRecord> records;
    std::vector<EvaluationFailure> failures;
    UsageLedger ledger;
};

// Scores every non-empty trajectory of every completed run. Runs are scored
// independently, up to `parallelism` at a time; output order follows input.
EvaluationRun evaluate_runs(Gateway& gateway, const std::vector<StoredRun>& runs, const std::string& judge,
                            int parallelism = 1);

// --- aggregation -----------------------------------------------------------

enum class Dimension { CharacterFidelity, HumanLikeness, Consistency };
inline constexpr std::array<Dimension, 3> kAllDimensions = {Dimension::CharacterFidelity, Dimension::HumanLikeness,
                                                            Dimension::Consistency};
std::string_view to_string(Dimension d);
const std::vector<Metric>& dimension_metrics(Dimension d);

struct Stat {
    double mean = 0.0;
    double std = 0.0;  // sample std over scenes; 0 when n == 1
    int n = 0;
    bool single = false;  // std undefined, reported as 0
};

struct ModelAggregate {
    std::string model;
    Language language = Language::en;
    std::array<Stat, kMetricCount> metrics{};
    std::array<Stat, 3> dimensions{};
    Stat average;
    // scene id -> per-metric mean over that scene's trajectories
    std::map<std::string, std::array<double, kMetricCount>> scene_means;
};

struct AggregateReport {
    std::vector<ModelAggregate> models;  // sorted by (language, model)
    int excluded = 0;                    // trajectories without scores

    const ModelAggregate* find(const std::string& model, Language lang) const;
    Json to_json() const;
    // Aligned text table: one row per model, KA..BC then Average, "mean±std".
    std::string render() const;
};

AggregateReport aggregate(const std::vector<EvaluationRecord>& records, int excluded = 0);

// --- statistics -------------------------------------------------------------

// rows = observation units, columns = items. Sample variances.
double cronbach_alpha(const std::vector<std::vector<double>>& rows);
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

struct ReliabilityEntry {
    Language language = Language::en;
    Dimension dimension = Dimension::CharacterFidelity;
    std::optional<double> alpha;  // nullopt when undefined for the data
    int rows = 0;
    std::string note;
};

// Cronbach's alpha per dimension and language over (model, scene) rows.
std::vector<ReliabilityEntry> reliability_report(const std::vector<EvaluationRecord>& records);
std::string render_reliability(const std::vector<ReliabilityEntry>& entries);

using HumanScores = std::map<std::string, std::array<double, kMetricCount>>;
// Delimited text with header trajectory_id,KA,BA,EE,PT,IM,AD,BC. Comma or tab.
HumanScores parse_human_scores(std::string_view text);

struct ValidityRow {
    std::string judge;
    std::array<std::optional<double>, kMetricCount> metrics{};
    std::optional<double> overall;
    int matched = 0;
};

// One row per judge found in the records. Throws Error(InsufficientData) when
// a judge has fewer than two trajectories matched against the human file.
std::vector<ValidityRow> validity_report(const std::vector<EvaluationRecord>& records, const HumanScores& human);
std::string render_validity(const std::vector<ValidityRow>& rows);

}  // namespace stagecraft
