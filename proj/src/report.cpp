#include "faith/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <tuple>

#include "faith/dataset.hpp"
#include "faith/error.hpp"
#include "faith/util.hpp"

namespace faith {
namespace {

constexpr const char* kPalette[] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

constexpr const char* kReliedColor = "#d62728";
constexpr const char* kDiscardedColor = "#ff7f0e";
constexpr const char* kUnmentionedColor = "#1f77b4";

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string svg_escape(const std::string& text) {
    std::string escaped;
    for (char c : text) {
        switch (c) {
            case '&': escaped += "&amp;"; break;
            case '<': escaped += "&lt;"; break;
            case '>': escaped += "&gt;"; break;
            case '"': escaped += "&quot;"; break;
            default: escaped += c;
        }
    }
    return escaped;
}

// Pixel coordinates rounded to 1/100 so the markup stays compact.
std::string coord(double value) {
    double rounded = std::round(value * 100.0) / 100.0;
    if (rounded == 0.0) rounded = 0.0;  // flushes negative zero
    return format_double(rounded);
}

std::string tick_label(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.6g", value);
    return buffer;
}

bool cell_less(const GapCell& x, const GapCell& y) {
    return std::tie(x.model, x.bias, x.setting) < std::tie(y.model, y.bias, y.setting);
}

bool cell_same(const GapCell& x, const GapCell& y) {
    return std::tie(x.model, x.bias, x.setting) == std::tie(y.model, y.bias, y.setting);
}

void check_scopes(const CellSummary& summary) {
    if (summary.flips.scope != MetricScope::FlipsOnly ||
        summary.all.scope != MetricScope::All) {
        raise("cell summary for " + cell_id(summary.cell) +
              " has mismatched articulation scopes");
    }
}

std::vector<CellSummary> sorted_summaries(std::vector<CellSummary> summaries) {
    std::sort(summaries.begin(), summaries.end(),
              [](const CellSummary& x, const CellSummary& y) {
                  return cell_less(x.cell, y.cell);
              });
    for (std::size_t i = 0; i + 1 < summaries.size(); ++i) {
        if (cell_same(summaries[i].cell, summaries[i + 1].cell)) {
            raise("duplicate report cell " + cell_id(summaries[i].cell));
        }
    }
    for (const CellSummary& summary : summaries) check_scopes(summary);
    return summaries;
}

void append_direction_row(std::string& csv, const GapCell& cell, const char* direction,
                          long n, double accuracy, long unanswered, long excluded) {
    const stats::GapReport& r = cell.report;
    csv += csv_field(cell.model) + ',' + csv_field(cell.bias) + ',' +
           csv_field(cell.setting) + ',';
    csv += direction;
    csv += ',' + std::to_string(n) + ',' + format_double(accuracy) + ',' +
           std::to_string(unanswered) + ',' + std::to_string(excluded) + ',' +
           stats::to_string(r.test) + ',' + format_double(r.statistic) + ',' +
           format_double(r.p_value) + ',' + (r.significant ? "true" : "false") + ',' +
           format_double(r.gap) + ',' + csv_field(r.note) + '\n';
}

std::string svg_open(int width, int height) {
    std::string w = std::to_string(width);
    std::string h = std::to_string(height);
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + w + "\" height=\"" +
           h + "\" viewBox=\"0 0 " + w + " " + h + "\">\n<rect width=\"" + w +
           "\" height=\"" + h + "\" fill=\"#ffffff\"/>\n";
}

std::string svg_text(double x, double y, const std::string& anchor, int size,
                     const std::string& body, const std::string& extra = "") {
    return "<text x=\"" + coord(x) + "\" y=\"" + coord(y) +
           "\" font-family=\"sans-serif\" font-size=\"" + std::to_string(size) +
           "\" text-anchor=\"" + anchor + "\" fill=\"#333333\"" + extra + ">" +
           svg_escape(body) + "</text>\n";
}

std::string svg_line(double x1, double y1, double x2, double y2,
                     const std::string& stroke, double width) {
    return "<line x1=\"" + coord(x1) + "\" y1=\"" + coord(y1) + "\" x2=\"" + coord(x2) +
           "\" y2=\"" + coord(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
           format_double(width) + "\"/>\n";
}

std::string svg_rect(double x, double y, double w, double h, const std::string& fill,
                     const std::string& stroke = "none", double stroke_width = 1.0) {
    std::string rect = "<rect x=\"" + coord(x) + "\" y=\"" + coord(y) + "\" width=\"" +
                       coord(w) + "\" height=\"" + coord(h) + "\" fill=\"" + fill + "\"";
    if (stroke != "none") {
        rect += " stroke=\"" + stroke + "\" stroke-width=\"" + format_double(stroke_width) + "\"";
    }
    return rect + "/>\n";
}

double nice_step(double range, int target_ticks) {
    double raw = range / target_ticks;
    double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
    double normalized = raw / magnitude;
    double factor = normalized <= 1.0 ? 1.0
                    : normalized <= 2.0 ? 2.0
                    : normalized <= 5.0 ? 5.0
                                        : 10.0;
    return factor * magnitude;
}

std::string model_color(const std::vector<std::string>& models, const std::string& model) {
    auto it = std::find(models.begin(), models.end(), model);
    return kPalette[static_cast<std::size_t>(it - models.begin()) % kPaletteSize];
}

}  // namespace

std::string cell_id(const GapCell& cell) {
    return cell.model + "/" + cell.bias + "/" + cell.setting;
}

std::vector<GapCell> sorted_cells(std::vector<GapCell> cells) {
    std::sort(cells.begin(), cells.end(), cell_less);
    for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
        if (cell_same(cells[i], cells[i + 1])) {
            raise("duplicate report cell " + cell_id(cells[i]));
        }
    }
    return cells;
}

std::string gap_table_csv(const std::vector<GapCell>& cells) {
    std::string csv =
        "model,bias,setting,direction,n,accuracy,unanswered,excluded,"
        "test,statistic,p_value,significant,gap,note\n";
    for (const GapCell& cell : sorted_cells(cells)) {
        append_direction_row(csv, cell, "plus", cell.report.n_plus, cell.report.acc_plus,
                             cell.unanswered_plus, cell.excluded_plus);
        append_direction_row(csv, cell, "minus", cell.report.n_minus, cell.report.acc_minus,
                             cell.unanswered_minus, cell.excluded_minus);
    }
    return csv;
}

nlohmann::json gap_cell_to_json(const GapCell& cell) {
    const stats::GapReport& r = cell.report;
    return {
        {"model", cell.model},
        {"bias", cell.bias},
        {"setting", cell.setting},
        {"test", stats::to_string(r.test)},
        {"statistic", r.statistic},
        {"p_value", r.p_value},
        {"significant", r.significant},
        {"gap", r.gap},
        {"note", r.note},
        {"plus",
         {{"n", r.n_plus},
          {"accuracy", r.acc_plus},
          {"unanswered", cell.unanswered_plus},
          {"excluded", cell.excluded_plus}}},
        {"minus",
         {{"n", r.n_minus},
          {"accuracy", r.acc_minus},
          {"unanswered", cell.unanswered_minus},
          {"excluded", cell.excluded_minus}}},
    };
}

nlohmann::json gap_table_json(const std::vector<GapCell>& cells) {
    nlohmann::json rows = nlohmann::json::array();
    for (const GapCell& cell : sorted_cells(cells)) {
        rows.push_back(gap_cell_to_json(cell));
    }
    return rows;
}

std::string accuracy_matrix_csv(const std::vector<DatasetAccuracy>& entries) {
    std::vector<std::string> models;
    std::vector<std::string> datasets;
    std::map<std::pair<std::string, std::string>, const DatasetAccuracy*> by_key;
    for (const DatasetAccuracy& entry : entries) {
        if (!by_key.emplace(std::pair{entry.model, entry.dataset}, &entry).second) {
            raise("duplicate accuracy entry for " + entry.model + " on " + entry.dataset);
        }
        if (std::find(models.begin(), models.end(), entry.model) == models.end()) {
            models.push_back(entry.model);
        }
        if (std::find(datasets.begin(), datasets.end(), entry.dataset) == datasets.end()) {
            datasets.push_back(entry.dataset);
        }
    }
    std::string csv = "model";
    for (const std::string& dataset : datasets) {
        csv += ',' + csv_field(dataset + "_ac") + ',' + csv_field(dataset + "_c") + ',' +
               csv_field(dataset + "_ba");
    }
    csv += '\n';
    for (const std::string& model : models) {
        csv += csv_field(model);
        for (const std::string& dataset : datasets) {
            auto it = by_key.find({model, dataset});
            if (it == by_key.end()) {
                csv += ",,,";
                continue;
            }
            const DatasetAccuracy& entry = *it->second;
            csv += ',' + format_double(entry.acc_against) + ',' +
                   format_double(entry.acc_with) + ',' + format_double(entry.articulation);
        }
        csv += '\n';
    }
    return csv;
}

nlohmann::json accuracy_matrix_json(const std::vector<DatasetAccuracy>& entries) {
    nlohmann::json rows = nlohmann::json::array();
    for (const DatasetAccuracy& entry : entries) {
        rows.push_back({
            {"model", entry.model},
            {"dataset", entry.dataset},
            {"ac", entry.acc_against},
            {"c", entry.acc_with},
            {"ba", entry.articulation},
            {"significant", entry.significant},
        });
    }
    return rows;
}

std::vector<ScatterPoint> build_scatter_points(const std::vector<CellSummary>& summaries) {
    std::vector<ScatterPoint> points;
    for (const CellSummary& summary : summaries) {
        check_scopes(summary);
        const GapCell& cell = summary.cell;
        if (!cell.report.significant) continue;
        if (cell.bias == "none") continue;
        if (!summary.flips.combined.relied_rate.has_value()) continue;
        ScatterPoint point;
        point.model = cell.model;
        point.bias = cell.bias;
        point.setting = cell.setting;
        point.gap = cell.report.gap;
        point.articulation = *summary.flips.combined.relied_rate;
        point.visual = bias_is_visual(bias_kind_from_string(cell.bias));
        point.biased_context = cell.setting.rfind("biased_", 0) == 0;
        points.push_back(point);
    }
    return points;
}

nlohmann::json scatter_json(const std::vector<ScatterPoint>& points) {
    nlohmann::json rows = nlohmann::json::array();
    for (const ScatterPoint& point : points) {
        rows.push_back({
            {"model", point.model},
            {"bias", point.bias},
            {"setting", point.setting},
            {"gap", point.gap},
            {"articulation", point.articulation},
            {"visual", point.visual},
            {"biased_context", point.biased_context},
        });
    }
    return rows;
}

std::string scatter_svg(const std::vector<ScatterPoint>& points) {
    constexpr int kWidth = 720;
    constexpr int kHeight = 480;
    constexpr double kPlotLeft = 64;
    constexpr double kPlotRight = 500;
    constexpr double kPlotTop = 40;
    constexpr double kPlotBottom = 420;

    std::string svg = svg_open(kWidth, kHeight);
    svg += svg_text((kPlotLeft + kPlotRight) / 2, 22, "middle", 14,
                    "accuracy gap vs bias articulation");
    if (points.empty()) {
        svg += svg_text((kPlotLeft + kPlotRight) / 2, (kPlotTop + kPlotBottom) / 2,
                        "middle", 13, "no significant cells");
        svg += "</svg>\n";
        return svg;
    }

    double lo = 0.0;
    double hi = 0.0;
    for (const ScatterPoint& point : points) {
        lo = std::min(lo, point.gap);
        hi = std::max(hi, point.gap);
    }
    if (lo == hi) {
        lo -= 0.05;
        hi += 0.05;
    } else {
        double pad = (hi - lo) * 0.05;
        lo -= pad;
        hi += pad;
    }
    auto x_of = [&](double v) {
        return kPlotLeft + (v - lo) / (hi - lo) * (kPlotRight - kPlotLeft);
    };
    auto y_of = [&](double v) { return kPlotBottom - v * (kPlotBottom - kPlotTop); };

    svg += svg_line(kPlotLeft, kPlotBottom, kPlotRight, kPlotBottom, "#333333", 1);
    svg += svg_line(kPlotLeft, kPlotTop, kPlotLeft, kPlotBottom, "#333333", 1);
    double step = nice_step(hi - lo, 5);
    for (long k = static_cast<long>(std::ceil(lo / step));
         k <= static_cast<long>(std::floor(hi / step)); ++k) {
        double value = static_cast<double>(k) * step;
        double x = x_of(value);
        svg += svg_line(x, kPlotBottom, x, kPlotBottom + 5, "#333333", 1);
        svg += svg_text(x, kPlotBottom + 18, "middle", 11, tick_label(value));
    }
    for (int k = 0; k <= 4; ++k) {
        double value = k * 0.25;
        double y = y_of(value);
        svg += svg_line(kPlotLeft - 5, y, kPlotLeft, y, "#333333", 1);
        svg += svg_text(kPlotLeft - 8, y + 4, "end", 11, tick_label(value));
    }
    svg += svg_text((kPlotLeft + kPlotRight) / 2, kPlotBottom + 40, "middle", 12,
                    "accuracy gap");
    svg += svg_text(18, (kPlotTop + kPlotBottom) / 2, "middle", 12,
                    "bias articulation rate",
                    " transform=\"rotate(-90 18 " +
                        coord((kPlotTop + kPlotBottom) / 2) + ")\"");

    std::vector<std::string> models;
    for (const ScatterPoint& point : points) {
        if (std::find(models.begin(), models.end(), point.model) == models.end()) {
            models.push_back(point.model);
        }
    }
    std::sort(models.begin(), models.end());

    for (const ScatterPoint& point : points) {
        double cx = x_of(point.gap);
        double cy = y_of(point.articulation);
        std::string color = model_color(models, point.model);
        std::string stroke = point.biased_context ? "#000000" : "none";
        std::string title = "<title>" +
                            svg_escape(point.model + "/" + point.bias + "/" + point.setting) +
                            "</title>";
        if (point.visual) {
            svg += "<rect x=\"" + coord(cx - 5) + "\" y=\"" + coord(cy - 5) +
                   "\" width=\"10\" height=\"10\" fill=\"" + color +
                   "\" fill-opacity=\"0.85\" stroke=\"" + stroke +
                   "\" stroke-width=\"1.5\">" + title + "</rect>\n";
        } else {
            svg += "<circle cx=\"" + coord(cx) + "\" cy=\"" + coord(cy) +
                   "\" r=\"5.5\" fill=\"" + color + "\" fill-opacity=\"0.85\" stroke=\"" +
                   stroke + "\" stroke-width=\"1.5\">" + title + "</circle>\n";
        }
    }

    double legend_x = 520;
    double legend_y = 50;
    for (std::size_t i = 0; i < models.size(); ++i) {
        double y = legend_y + static_cast<double>(i) * 18;
        svg += svg_rect(legend_x, y - 9, 12, 12, model_color(models, models[i]));
        svg += svg_text(legend_x + 18, y + 1, "start", 11, models[i]);
    }
    double shapes_y = legend_y + static_cast<double>(models.size()) * 18 + 18;
    svg += svg_rect(legend_x + 1, shapes_y - 9, 10, 10, "#666666");
    svg += svg_text(legend_x + 18, shapes_y, "start", 11, "visual bias");
    svg += "<circle cx=\"" + coord(legend_x + 6) + "\" cy=\"" + coord(shapes_y + 14) +
           "\" r=\"5\" fill=\"#666666\"/>\n";
    svg += svg_text(legend_x + 18, shapes_y + 18, "start", 11, "textual bias");
    svg += "<circle cx=\"" + coord(legend_x + 6) + "\" cy=\"" + coord(shapes_y + 32) +
           "\" r=\"5\" fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
    svg += svg_text(legend_x + 18, shapes_y + 36, "start", 11, "biased context");
    svg += "</svg>\n";
    return svg;
}

std::string distributions_svg(const std::vector<CellSummary>& summaries) {
    constexpr double kLabelWidth = 300;
    constexpr double kBarWidth = 360;
    constexpr double kRowHeight = 26;
    constexpr double kBarHeight = 16;
    constexpr double kTop = 56;

    std::vector<CellSummary> ordered = sorted_summaries(summaries);
    int width = static_cast<int>(kLabelWidth + kBarWidth + 60);
    int height = static_cast<int>(kTop + static_cast<double>(ordered.size()) * kRowHeight + 16);
    std::string svg = svg_open(width, height);
    svg += svg_text(kLabelWidth, 20, "end", 14, "CoT types over the flip subset");

    const std::tuple<double, const char*, const char*> swatches[] = {
        {kLabelWidth, kReliedColor, "relied"},
        {kLabelWidth + 80, kDiscardedColor, "discarded"},
        {kLabelWidth + 180, kUnmentionedColor, "unmentioned"},
    };
    for (const auto& [x, color, label] : swatches) {
        svg += svg_rect(x, 30, 12, 12, color);
        svg += svg_text(x + 16, 40, "start", 11, label);
    }
    svg += svg_line(kLabelWidth + 290, 28, kLabelWidth + 290, 44, "#000000", 2);
    svg += svg_text(kLabelWidth + 298, 40, "start", 11, "inconsistency rate");

    for (std::size_t i = 0; i < ordered.size(); ++i) {
        const CellSummary& summary = ordered[i];
        const DirectionalRates& rates = summary.flips.combined;
        double y = kTop + static_cast<double>(i) * kRowHeight;
        svg += svg_text(kLabelWidth - 8, y + kBarHeight - 3, "end", 11,
                        cell_id(summary.cell));
        if (rates.judged == 0) {
            svg += svg_rect(kLabelWidth, y, kBarWidth, kBarHeight, "#f4f4f4", "#cccccc");
            svg += svg_text(kLabelWidth + kBarWidth / 2, y + kBarHeight - 3, "middle", 10,
                            "no judged flips");
            continue;
        }
        double x = kLabelWidth;
        const std::pair<double, const char*> segments[] = {
            {*rates.relied_rate, kReliedColor},
            {*rates.discarded_rate, kDiscardedColor},
            {*rates.unmentioned_rate, kUnmentionedColor},
        };
        for (const auto& [rate, color] : segments) {
            double w = rate * kBarWidth;
            if (w > 0) svg += svg_rect(x, y, w, kBarHeight, color);
            x += w;
        }
        double tick_x = kLabelWidth + *rates.inconsistency_rate * kBarWidth;
        svg += svg_line(tick_x, y - 2, tick_x, y + kBarHeight + 2, "#000000", 2);
        svg += svg_text(kLabelWidth + kBarWidth + 8, y + kBarHeight - 3, "start", 10,
                        "n=" + std::to_string(rates.judged));
    }
    svg += "</svg>\n";
    return svg;
}

nlohmann::json metrics_json(const std::vector<CellSummary>& summaries) {
    nlohmann::json cells = nlohmann::json::array();
    for (const CellSummary& summary : sorted_summaries(summaries)) {
        cells.push_back({
            {"id", cell_id(summary.cell)},
            {"gap", gap_cell_to_json(summary.cell)},
            {"articulation_flips", summary_to_json(summary.flips)},
            {"articulation_all", summary_to_json(summary.all)},
            {"flip_pairs", summary.flip_pairs},
        });
    }
    return {{"cells", cells}};
}

}  // namespace faith
