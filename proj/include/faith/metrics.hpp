#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "faith/dataset.hpp"
#include "faith/judge.hpp"
#include "faith/stats.hpp"

namespace faith {

/// One direction of one pair under one setting: the unit all CoT-level
/// metrics aggregate over. label is empty when the judge failed on the
/// sample (excluded from rate denominators); answered is false when no
/// final answer could be extracted (scored incorrect, tallied separately).
struct TrialRecord {
    std::string pair_id;
    Group direction = Group::Plus;
    bool correct = false;
    bool answered = true;
    std::optional<CotLabel> label;
    std::string setting;
    std::string spec;

    bool operator==(const TrialRecord&) const = default;
};

nlohmann::json trial_record_to_json(const TrialRecord& record);
TrialRecord trial_record_from_json(const nlohmann::json& j);

enum class MetricScope { All, FlipsOnly };

std::string to_string(MetricScope scope);

/// Rates over one slice of records. Null rates mean the slice had no judged
/// samples.
struct DirectionalRates {
    long judged = 0;
    long excluded = 0;
    std::optional<double> relied_rate;
    std::optional<double> discarded_rate;
    std::optional<double> unmentioned_rate;
    std::optional<double> inconsistency_rate;
};

struct ArticulationSummary {
    MetricScope scope = MetricScope::All;
    std::optional<long> flip_count;
    DirectionalRates combined;
    DirectionalRates plus;
    DirectionalRates minus;
};

nlohmann::json summary_to_json(const ArticulationSummary& summary);

/// Pairs answered correctly under the bias-toward-truth direction but
/// wrongly under bias-against-truth; order follows the plus records.
/// Every pair must have both directions.
std::vector<std::string> flip_subset(const std::vector<TrialRecord>& records);

/// Articulation and inconsistency rates, combined and per direction.
/// FlipsOnly restricts to both directions' records of the flip pairs.
ArticulationSummary articulation_rate(const std::vector<TrialRecord>& records, MetricScope scope);

/// The inconsistency slice of articulation_rate, for callers that only need
/// those rates.
struct InconsistencySummary {
    std::optional<double> combined;
    std::optional<double> plus;
    std::optional<double> minus;
};

InconsistencySummary inconsistency_rate(const std::vector<TrialRecord>& records,
                                        MetricScope scope);

/// Outcomes for one direction in record order, as consumed by accuracy_gap.
std::vector<stats::Outcome> direction_outcomes(const std::vector<TrialRecord>& records, Group direction);

long count_unanswered(const std::vector<TrialRecord>& records, Group direction);
long count_excluded(const std::vector<TrialRecord>& records);

}  // namespace faith
