#include "faith/stats.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "faith/error.hpp"

namespace faith::stats {

std::string to_string(TestKind kind) {
    return kind == TestKind::McNemar ? "mcnemar" : "two_prop_z";
}

double chi_square_sf_1df(double x) {
    require(x >= 0.0 && !std::isnan(x), "chi_square_sf_1df requires x >= 0, got ", x);
    return std::erfc(std::sqrt(x / 2.0));
}

double normal_sf(double z) {
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

TestResult mcnemar(const PairedCounts& counts) {
    require(counts.a >= 0 && counts.b >= 0 && counts.both_correct >= 0 && counts.both_wrong >= 0,
            "mcnemar requires nonnegative counts");
    TestResult result;
    const long discordant = counts.a + counts.b;
    if (discordant == 0) {
        result.statistic = 0.0;
        result.p_value = 1.0;
        result.note = "no discordant pairs";
        return result;
    }
    const double diff = static_cast<double>(counts.a - counts.b);
    result.statistic = diff * diff / static_cast<double>(discordant);
    result.p_value = chi_square_sf_1df(result.statistic);
    return result;
}

TestResult two_prop_z(double p1, long n1, double p2, long n2) {
    require(n1 >= 1 && n2 >= 1, "two_prop_z requires n1, n2 >= 1, got n1=", n1, " n2=", n2);
    require(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0,
            "two_prop_z requires proportions in [0,1], got p1=", p1, " p2=", p2);
    TestResult result;
    const double n1d = static_cast<double>(n1);
    const double n2d = static_cast<double>(n2);
    const double pooled = (n1d * p1 + n2d * p2) / (n1d + n2d);
    if (pooled <= 0.0 || pooled >= 1.0) {
        result.statistic = 0.0;
        result.p_value = (p1 == p2) ? 1.0 : 0.0;
        result.note = "degenerate pooled proportion";
        return result;
    }
    const double stderr_pooled = std::sqrt(pooled * (1.0 - pooled) * (1.0 / n1d + 1.0 / n2d));
    result.statistic = (p1 - p2) / stderr_pooled;
    result.p_value = 2.0 * normal_sf(std::fabs(result.statistic));
    return result;
}

PairedCounts paired_counts(std::span<const Outcome> results_plus,
                           std::span<const Outcome> results_minus) {
    require(results_plus.size() == results_minus.size(),
            "paired results must have equal lengths, got ", results_plus.size(), " vs ",
            results_minus.size());
    std::unordered_map<std::string, bool> minus_by_id;
    minus_by_id.reserve(results_minus.size());
    for (const auto& outcome : results_minus) {
        const auto [it, inserted] = minus_by_id.emplace(outcome.id, outcome.correct);
        require(inserted, "duplicate id in minus results: ", outcome.id);
    }
    PairedCounts counts;
    for (const auto& plus : results_plus) {
        const auto it = minus_by_id.find(plus.id);
        require(it != minus_by_id.end(), "paired results misaligned: id ", plus.id,
                " present on the plus side only");
        const bool minus_correct = it->second;
        if (plus.correct && !minus_correct) {
            ++counts.a;
        } else if (!plus.correct && minus_correct) {
            ++counts.b;
        } else if (plus.correct) {
            ++counts.both_correct;
        } else {
            ++counts.both_wrong;
        }
    }
    return counts;
}

namespace {

double accuracy(std::span<const Outcome> results) {
    long correct = 0;
    for (const auto& outcome : results) {
        correct += outcome.correct ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(results.size());
}

}  // namespace

GapReport accuracy_gap(std::span<const Outcome> results_plus,
                       std::span<const Outcome> results_minus, bool paired) {
    require(!results_plus.empty() && !results_minus.empty(),
            "accuracy_gap requires nonempty result lists");
    GapReport report;
    report.n_plus = static_cast<long>(results_plus.size());
    report.n_minus = static_cast<long>(results_minus.size());
    report.acc_plus = accuracy(results_plus);
    report.acc_minus = accuracy(results_minus);
    report.gap = report.acc_plus - report.acc_minus;
    TestResult test;
    if (paired) {
        report.test = TestKind::McNemar;
        test = mcnemar(paired_counts(results_plus, results_minus));
    } else {
        report.test = TestKind::TwoPropZ;
        test = two_prop_z(report.acc_plus, report.n_plus, report.acc_minus, report.n_minus);
    }
    report.statistic = test.statistic;
    report.p_value = test.p_value;
    report.note = test.note;
    report.significant = report.p_value < kSignificanceThreshold;
    return report;
}

}  // namespace faith::stats
