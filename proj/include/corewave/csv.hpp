#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "corewave/error.hpp"
#include "corewave/estimators.hpp"
#include "corewave/series.hpp"

namespace corewave::pipeline {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto next = line.find(sep, pos);
        out.push_back(trim(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

inline bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    // strtod accepts forms from_chars rejects (e.g. leading '+'); the text is small
    std::string buf(s);
    char* end = nullptr;
    out = std::strtod(buf.c_str(), &end);
    return end == buf.c_str() + buf.size() && std::isfinite(out);
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

inline std::string row_context(const std::filesystem::path& path, std::size_t lineno) {
    return path.filename().string() + " line " + std::to_string(lineno);
}

}  // namespace detail

/// `date,value` CSV with ISO YYYY-MM or YYYY-MM-DD dates on a gap-free monthly grid.
inline MonthlySeries load_series_csv(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    std::size_t i = 0;
    while (i < lines.size() && detail::trim(lines[i]).empty()) ++i;
    if (i == lines.size()) fail(ErrorCode::EmptyFile, path.string() + " is empty");
    {
        auto header = detail::split(lines[i], ',');
        if (header.size() != 2 || header[0] != "date" || header[1] != "value") {
            fail(ErrorCode::MalformedRow, detail::row_context(path, i + 1) + ": expected header 'date,value'");
        }
    }
    MonthlySeries out;
    bool first = true;
    for (++i; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        auto f = detail::split(lines[i], ',');
        double v = 0;
        auto ym = f.size() == 2 ? YearMonth::parse(f[0]) : std::nullopt;
        if (!ym || !detail::parse_double(f[1], v)) fail(ErrorCode::MalformedRow, detail::row_context(path, i + 1));
        if (first) {
            out.start = *ym;
            first = false;
        } else if (*ym != out.last().plus(1)) {
            fail(ErrorCode::NonContiguousDates, detail::row_context(path, i + 1) + ": expected " + out.last().plus(1).to_string() +
                                                    ", got " + ym->to_string());
        }
        out.values.push_back(v);
    }
    if (out.values.empty()) fail(ErrorCode::EmptyFile, path.string() + " has a header but no rows");
    return out;
}

inline constexpr double kPanelWeightSlack = 1e-3;

/**
 * Long-format panel `date,component,inflation,weight`. Components keep their
 * first-seen order; every month must list every component once. Monthly
 * weights summing within 1 +/- 0.001 are renormalised.
 */
inline estimators::ComponentPanel load_panel_csv(const std::filesystem::path& path) {
    const auto lines = detail::read_lines(path);
    std::size_t i = 0;
    while (i < lines.size() && detail::trim(lines[i]).empty()) ++i;
    if (i == lines.size()) fail(ErrorCode::EmptyFile, path.string() + " is empty");
    {
        auto header = detail::split(lines[i], ',');
        if (header.size() != 4 || header[0] != "date" || header[1] != "component" || header[2] != "inflation" || header[3] != "weight") {
            fail(ErrorCode::MalformedRow, detail::row_context(path, i + 1) + ": expected header 'date,component,inflation,weight'");
        }
    }
    struct Cell {
        double inflation;
        double weight;
    };
    std::map<int, std::map<std::string, Cell>> by_month;
    std::vector<std::string> ids;
    for (++i; i < lines.size(); ++i) {
        if (detail::trim(lines[i]).empty()) continue;
        auto f = detail::split(lines[i], ',');
        double infl = 0, w = 0;
        auto ym = f.size() == 4 ? YearMonth::parse(f[0]) : std::nullopt;
        if (!ym || f[1].empty() || !detail::parse_double(f[2], infl) || !detail::parse_double(f[3], w) || w < 0) {
            fail(ErrorCode::MalformedRow, detail::row_context(path, i + 1));
        }
        std::string id(f[1]);
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
        if (!by_month[ym->index()].emplace(id, Cell{infl, w}).second) {
            fail(ErrorCode::MalformedRow, detail::row_context(path, i + 1) + ": duplicate (" + ym->to_string() + ", " + id + ")");
        }
    }
    if (by_month.empty()) fail(ErrorCode::EmptyFile, path.string() + " has a header but no rows");

    estimators::ComponentPanel panel;
    panel.start = YearMonth::from_index(by_month.begin()->first);
    panel.component_ids = ids;
    int expected = by_month.begin()->first;
    for (const auto& [idx, cells] : by_month) {
        const YearMonth ym = YearMonth::from_index(idx);
        if (idx != expected) fail(ErrorCode::NonContiguousDates, path.filename().string() + ": month " + YearMonth::from_index(expected).to_string() + " missing");
        ++expected;
        if (cells.size() != ids.size()) {
            fail(ErrorCode::MalformedRow, path.filename().string() + ": " + ym.to_string() + " lists " + std::to_string(cells.size()) +
                                              " of " + std::to_string(ids.size()) + " components");
        }
        std::vector<double> infl, w;
        double sum = 0;
        for (const auto& id : ids) {
            const Cell& c = cells.at(id);
            infl.push_back(c.inflation);
            w.push_back(c.weight);
            sum += c.weight;
        }
        if (std::abs(sum - 1.0) > kPanelWeightSlack) {
            fail(ErrorCode::WeightSumOutOfRange, path.filename().string() + ": weights at " + ym.to_string() + " sum to " + std::to_string(sum));
        }
        for (double& v : w) v /= sum;
        panel.inflation.push_back(std::move(infl));
        panel.weights.push_back(std::move(w));
    }
    panel.validate();
    return panel;
}

inline void write_series_csv(const std::filesystem::path& path, const MonthlySeries& s) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out << "date,value\n";
    char buf[64];
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.10g", s.values[i]);
        out << s.start.plus(static_cast<int>(i)).to_string() << ',' << buf << '\n';
    }
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

inline void write_panel_csv(const std::filesystem::path& path, const estimators::ComponentPanel& p) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
    out << "date,component,inflation,weight\n";
    char buf[96];
    for (std::size_t t = 0; t < p.months(); ++t) {
        const std::string date = p.start.plus(static_cast<int>(t)).to_string();
        for (std::size_t k = 0; k < p.components(); ++k) {
            std::snprintf(buf, sizeof buf, ",%.10g,%.10g", p.inflation[t][k], p.weights[t][k]);
            out << date << ',' << p.component_ids[k] << buf << '\n';
        }
    }
    if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace corewave::pipeline
