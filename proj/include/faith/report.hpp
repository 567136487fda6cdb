#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "faith/metrics.hpp"
#include "faith/stats.hpp"

namespace faith {

/// One measurement cell: a model crossed with a bias and a context setting,
/// carrying the paired accuracy comparison plus bookkeeping counts.
struct GapCell {
    std::string model;
    std::string bias;     // bias kind name, or "none"
    std::string setting;  // context-setting digest
    stats::GapReport report;
    long unanswered_plus = 0;
    long unanswered_minus = 0;
    long excluded_plus = 0;
    long excluded_minus = 0;
};

/// "model/bias/setting", the key used to reference a cell across artifacts.
std::string cell_id(const GapCell& cell);

/// Cells ordered by (model, bias, setting); duplicates are an error.
std::vector<GapCell> sorted_cells(std::vector<GapCell> cells);

/// Two rows per cell (direction plus, then minus). Columns:
/// model,bias,setting,direction,n,accuracy,unanswered,excluded,
/// test,statistic,p_value,significant,gap,note
std::string gap_table_csv(const std::vector<GapCell>& cells);

nlohmann::json gap_cell_to_json(const GapCell& cell);
nlohmann::json gap_table_json(const std::vector<GapCell>& cells);

/// One model scored on one dataset, in the layout of a wide accuracy
/// matrix: accuracy with the bias pointing away from the ground truth
/// ("ac"), toward it ("c"), and the bias articulation rate ("ba").
struct DatasetAccuracy {
    std::string model;
    std::string dataset;
    double acc_against = 0.0;
    double acc_with = 0.0;
    double articulation = 0.0;
    bool significant = false;
};

/// Wide table, one row per model, columns <dataset>_ac,<dataset>_c,
/// <dataset>_ba per dataset. Models and datasets keep first-appearance
/// order; missing combinations render as empty cells.
std::string accuracy_matrix_csv(const std::vector<DatasetAccuracy>& entries);
nlohmann::json accuracy_matrix_json(const std::vector<DatasetAccuracy>& entries);

/// A cell joined with its articulation summaries, ready for plotting.
/// `flips` must be the FlipsOnly-scope summary and `all` the All-scope one;
/// `flip_pairs` lists the pair ids behind the flip-subset rates.
struct CellSummary {
    GapCell cell;
    ArticulationSummary flips;
    ArticulationSummary all;
    std::vector<std::string> flip_pairs;
};

struct ScatterPoint {
    std::string model;
    std::string bias;
    std::string setting;
    double gap = 0.0;
    double articulation = 0.0;  // relied fraction over the flip subset
    bool visual = false;
    bool biased_context = false;
};

/// Keeps only cells with a significant gap and a judged flip sample,
/// pairing each gap with the pooled relied rate over the flip subset.
/// Cell order is preserved.
std::vector<ScatterPoint> build_scatter_points(const std::vector<CellSummary>& summaries);

nlohmann::json scatter_json(const std::vector<ScatterPoint>& points);

/// Gap-vs-articulation chart. Squares mark visual biases, circles textual
/// ones; a black outline marks biased-context settings; fill color tracks
/// the model. Pure function of its input, so regeneration is byte-stable.
std::string scatter_svg(const std::vector<ScatterPoint>& points);

/// One stacked bar per cell showing relied/discarded/unmentioned fractions
/// over the flip subset, with a tick at the inconsistency rate.
std::string distributions_svg(const std::vector<CellSummary>& summaries);

/// The run's aggregate document: per-cell gap stats, both articulation
/// scopes, and the flip-pair ids the rates were computed from.
nlohmann::json metrics_json(const std::vector<CellSummary>& summaries);

}  // namespace faith
