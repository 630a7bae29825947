#pragma once

// CSV and SVG emission: RFC-4180 tables, profile heatmaps, and the
// per-narrator F1 box plot. Everything is a pure function of its inputs so
// repeated emission is byte-identical.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "brigata/classify.hpp"
#include "brigata/topics.hpp"

namespace brigata {

/// Shortest round-trip decimal form, same on every platform.
inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string csv_quote(std::string_view field) {
    bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string emit_csv(const std::vector<std::vector<std::string>>& rows,
                            const std::vector<std::string>& header) {
    std::string out;
    auto append_row = [&](const std::vector<std::string>& row) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_quote(row[i]);
        }
        out += '\n';
    };
    append_row(header);
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != header.size())
            throw std::invalid_argument("emit_csv: row " + std::to_string(r) + " has " +
                                        std::to_string(rows[r].size()) + " fields, header has " +
                                        std::to_string(header.size()));
        append_row(rows[r]);
    }
    return out;
}

/// Minimal RFC-4180 reader (quoted fields, doubled quotes, embedded
/// newlines); used to round-trip our own emission.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    size_t i = 0;
    bool in_quotes = false, any = false;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };
    while (i < text.size()) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            in_quotes = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            end_row();
            any = false;
            ++i;
            continue;
        } else if (c == '\r') {
            // swallowed; \r\n handled by the \n branch next round
        } else {
            field += c;
        }
        any = true;
        ++i;
    }
    if (any || in_quotes || !field.empty() || !row.empty()) end_row();
    return rows;
}

struct Rgb {
    int r = 0, g = 0, b = 0;

    static Rgb from_hex(std::string_view hex) {
        if (hex.size() == 7 && hex[0] == '#') hex.remove_prefix(1);
        if (hex.size() != 6) throw std::invalid_argument("color must be #rrggbb");
        auto nibble = [](char c) -> int {
            if (c >= '0' && c <= '9') return c - '0';
            if (c >= 'a' && c <= 'f') return c - 'a' + 10;
            if (c >= 'A' && c <= 'F') return c - 'A' + 10;
            throw std::invalid_argument("color must be #rrggbb");
        };
        return {nibble(hex[0]) * 16 + nibble(hex[1]), nibble(hex[2]) * 16 + nibble(hex[3]),
                nibble(hex[4]) * 16 + nibble(hex[5])};
    }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string s = "#";
        for (int v : {r, g, b}) {
            s += digits[v / 16];
            s += digits[v % 16];
        }
        return s;
    }
};

inline Rgb lerp(const Rgb& a, const Rgb& b, double t) {
    auto mix = [t](int x, int y) { return static_cast<int>(std::lround(x + t * (y - x))); };
    return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

struct HeatmapSpec {
    std::vector<std::vector<double>> values;  // rows x cols, expected in [0,1]
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    Rgb low{0xf7, 0xf7, 0xf7};
    Rgb high{0x0b, 0x3d, 0x91};
    int cell_px = 24;
    std::string title;

    static HeatmapSpec from_profile(const ProfileMatrix& m, std::string title) {
        HeatmapSpec spec;
        spec.values = m.values;
        spec.row_labels = m.rows;
        spec.col_labels = m.topic_labels;
        spec.title = std::move(title);
        return spec;
    }
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace detail

/// One rect per cell, fill interpolated between the ramp endpoints.
/// Out-of-range values are clamped with a warning on stderr.
inline std::string emit_heatmap_svg(const HeatmapSpec& spec) {
    const size_t n_rows = spec.values.size();
    if (n_rows == 0) throw std::invalid_argument("emit_heatmap_svg: empty matrix");
    const size_t n_cols = spec.values.front().size();
    for (const auto& row : spec.values)
        if (row.size() != n_cols) throw std::invalid_argument("emit_heatmap_svg: ragged matrix");
    if (spec.row_labels.size() != n_rows || spec.col_labels.size() != n_cols)
        throw std::invalid_argument("emit_heatmap_svg: label counts do not match matrix");
    if (n_cols == 0) throw std::invalid_argument("emit_heatmap_svg: empty matrix");

    const int cell = spec.cell_px;
    const int left = 120;
    const int title_h = spec.title.empty() ? 0 : 28;
    const int top = 96 + title_h;
    const int width = left + static_cast<int>(n_cols) * cell + 16;
    const int height = top + static_cast<int>(n_rows) * cell + 16;

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
           " " + std::to_string(height) + "\">\n";
    svg += "<style>text{font-family:sans-serif;font-size:11px;fill:#222}.title{font-size:15px}"
           "</style>\n";
    if (!spec.title.empty())
        svg += "<text class=\"title\" x=\"" + std::to_string(width / 2) +
               "\" y=\"20\" text-anchor=\"middle\">" + detail::xml_escape(spec.title) +
               "</text>\n";

    bool clamped = false;
    for (size_t i = 0; i < n_rows; ++i) {
        for (size_t j = 0; j < n_cols; ++j) {
            double v = spec.values[i][j];
            if (v < 0.0 || v > 1.0 || !std::isfinite(v)) {
                clamped = true;
                v = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
            }
            Rgb c = lerp(spec.low, spec.high, v);
            svg += "<rect x=\"" + std::to_string(left + static_cast<int>(j) * cell) + "\" y=\"" +
                   std::to_string(top + static_cast<int>(i) * cell) + "\" width=\"" +
                   std::to_string(cell) + "\" height=\"" + std::to_string(cell) + "\" fill=\"" +
                   c.hex() + "\"><title>" + detail::xml_escape(spec.row_labels[i]) + " / " +
                   detail::xml_escape(spec.col_labels[j]) + ": " + fmt(spec.values[i][j]) +
                   "</title></rect>\n";
        }
    }
    if (clamped)
        std::cerr << "emit_heatmap_svg: values outside [0,1] were clamped for display\n";

    for (size_t i = 0; i < n_rows; ++i)
        svg += "<text x=\"" + std::to_string(left - 8) + "\" y=\"" +
               std::to_string(top + static_cast<int>(i) * cell + cell * 2 / 3) +
               "\" text-anchor=\"end\">" + detail::xml_escape(spec.row_labels[i]) + "</text>\n";
    for (size_t j = 0; j < n_cols; ++j) {
        int cx = left + static_cast<int>(j) * cell + cell / 2;
        int cy = top - 8;
        svg += "<text x=\"" + std::to_string(cx) + "\" y=\"" + std::to_string(cy) +
               "\" text-anchor=\"start\" transform=\"rotate(-45 " + std::to_string(cx) + " " +
               std::to_string(cy) + ")\">" + detail::xml_escape(spec.col_labels[j]) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

namespace detail {

// Quartile by linear interpolation on the sorted sample (the common
// "type 7" definition).
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    if (sorted.size() == 1) return sorted[0];
    double pos = p * static_cast<double>(sorted.size() - 1);
    size_t lo = static_cast<size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

/// Box plot of per-class F1 over runs: quartile boxes, min/max whiskers, and
/// one horizontal reference line (id "baseline") at F1 = 0.1 — the
/// chance-level mark for ten balanced classes.
inline std::string emit_f1_plot(const ExperimentResult& result) {
    const size_t n_classes = result.class_names.size();
    if (n_classes == 0 || result.f1.empty())
        throw std::invalid_argument("emit_f1_plot: empty experiment result");
    for (const auto& row : result.f1)
        if (row.size() != n_classes)
            throw std::invalid_argument("emit_f1_plot: ragged F1 matrix");

    const int left = 52, top = 36, plot_h = 300, slot = 56, box_w = 30;
    const int plot_w = static_cast<int>(n_classes) * slot;
    const int width = left + plot_w + 16;
    const int height = top + plot_h + 70;
    auto ycoord = [&](double v) { return top + plot_h - v * plot_h; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
           " " + std::to_string(height) + "\">\n";
    svg += "<style>text{font-family:sans-serif;font-size:11px;fill:#222}"
           "line{stroke:#222;stroke-width:1}.grid{stroke:#ddd}.baseline{stroke:#c0392b;"
           "stroke-dasharray:4 3}rect.box{fill:#9ecae1;stroke:#222}</style>\n";
    svg += "<text x=\"" + std::to_string(left + plot_w / 2) +
           "\" y=\"16\" text-anchor=\"middle\">Per-narrator F1 over " +
           std::to_string(result.f1.size()) + " runs (" + result.vocab_mode + ", " +
           result.classifier_mode + ")</text>\n";

    for (int tick = 0; tick <= 5; ++tick) {
        double v = tick * 0.2;
        svg += "<line class=\"grid\" x1=\"" + std::to_string(left) + "\" y1=\"" +
               fmt(ycoord(v)) + "\" x2=\"" + std::to_string(left + plot_w) + "\" y2=\"" +
               fmt(ycoord(v)) + "\"/>\n";
        svg += "<text x=\"" + std::to_string(left - 6) + "\" y=\"" + fmt(ycoord(v) + 4) +
               "\" text-anchor=\"end\">" + fmt(v) + "</text>\n";
    }

    for (size_t c = 0; c < n_classes; ++c) {
        std::vector<double> sample(result.f1.size());
        for (size_t r = 0; r < result.f1.size(); ++r) sample[r] = result.f1[r][c];
        std::sort(sample.begin(), sample.end());
        double lo = sample.front(), hi = sample.back();
        double q1 = detail::quantile_sorted(sample, 0.25);
        double q2 = detail::quantile_sorted(sample, 0.5);
        double q3 = detail::quantile_sorted(sample, 0.75);
        int cx = left + static_cast<int>(c) * slot + slot / 2;
        int bx = cx - box_w / 2;
        // whisker stem and caps
        svg += "<line x1=\"" + std::to_string(cx) + "\" y1=\"" + fmt(ycoord(lo)) + "\" x2=\"" +
               std::to_string(cx) + "\" y2=\"" + fmt(ycoord(hi)) + "\"/>\n";
        for (double v : {lo, hi})
            svg += "<line x1=\"" + std::to_string(cx - box_w / 3) + "\" y1=\"" + fmt(ycoord(v)) +
                   "\" x2=\"" + std::to_string(cx + box_w / 3) + "\" y2=\"" + fmt(ycoord(v)) +
                   "\"/>\n";
        svg += "<rect class=\"box\" x=\"" + std::to_string(bx) + "\" y=\"" + fmt(ycoord(q3)) +
               "\" width=\"" + std::to_string(box_w) + "\" height=\"" +
               fmt(std::max(0.0, ycoord(q1) - ycoord(q3))) + "\"/>\n";
        svg += "<line x1=\"" + std::to_string(bx) + "\" y1=\"" + fmt(ycoord(q2)) + "\" x2=\"" +
               std::to_string(bx + box_w) + "\" y2=\"" + fmt(ycoord(q2)) + "\"/>\n";
        svg += "<text x=\"" + std::to_string(cx) + "\" y=\"" + std::to_string(top + plot_h + 16) +
               "\" text-anchor=\"end\" transform=\"rotate(-40 " + std::to_string(cx) + " " +
               std::to_string(top + plot_h + 16) + ")\">" +
               detail::xml_escape(result.class_names[c]) + "</text>\n";
    }

    svg += "<line id=\"baseline\" class=\"baseline\" x1=\"" + std::to_string(left) + "\" y1=\"" +
           fmt(ycoord(0.1)) + "\" x2=\"" + std::to_string(left + plot_w) + "\" y2=\"" +
           fmt(ycoord(0.1)) + "\"/>\n";
    svg += "<line x1=\"" + std::to_string(left) + "\" y1=\"" + std::to_string(top) + "\" x2=\"" +
           std::to_string(left) + "\" y2=\"" + std::to_string(top + plot_h) + "\"/>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace brigata
