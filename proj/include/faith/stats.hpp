#pragma once

#include <span>
#include <string>
#include <vector>

namespace faith::stats {

/// Discordant/concordant pair counts for a paired accuracy comparison.
/// `a` counts pairs answered correctly on the bias-aligned side only,
/// `b` the reverse.
struct PairedCounts {
    long a = 0;
    long b = 0;
    long both_correct = 0;
    long both_wrong = 0;

    long total() const { return a + b + both_correct + both_wrong; }
};

enum class TestKind { McNemar, TwoPropZ };

std::string to_string(TestKind kind);

/// One accuracy-gap measurement cell, ready for serialization.
struct GapReport {
    double acc_plus = 0.0;
    double acc_minus = 0.0;
    double gap = 0.0;  // acc_plus - acc_minus, exactly
    double statistic = 0.0;
    double p_value = 1.0;
    bool significant = false;  // p_value < 0.05
    TestKind test = TestKind::McNemar;
    long n_plus = 0;
    long n_minus = 0;
    std::string note;  // degenerate-case flag, empty otherwise
};

inline constexpr double kSignificanceThreshold = 0.05;

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::string note;
};

/// Survival function of the chi-squared distribution with one degree of
/// freedom: erfc(sqrt(x/2)). x must be >= 0.
double chi_square_sf_1df(double x);

/// Upper-tail survival function of the standard normal: erfc(z/sqrt(2))/2.
double normal_sf(double z);

/// Paired test on discordant counts: statistic (a-b)^2/(a+b), chi-squared
/// with 1 df, no continuity correction. a+b == 0 yields p = 1.0 with a
/// "no discordant pairs" note.
TestResult mcnemar(const PairedCounts& counts);

/// Two-tailed pooled z-test for comparing proportions p1 (n1 samples) and
/// p2 (n2 samples). A pooled proportion of exactly 0 or 1 has zero variance
/// and is flagged as degenerate.
TestResult two_prop_z(double p1, long n1, double p2, long n2);

/// One graded outcome; `id` aligns the plus and minus sides of a pair.
struct Outcome {
    std::string id;
    bool correct = false;
};

/// Builds the full GapReport for one cell. Paired inputs must carry aligned
/// ids (same multiset on both sides); unpaired inputs only need to be
/// nonempty.
GapReport accuracy_gap(std::span<const Outcome> results_plus,
                       std::span<const Outcome> results_minus, bool paired);

PairedCounts paired_counts(std::span<const Outcome> results_plus,
                           std::span<const Outcome> results_minus);

}  // namespace faith::stats
