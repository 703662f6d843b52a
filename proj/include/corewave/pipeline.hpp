#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include "corewave/config.hpp"
#include "corewave/csv.hpp"
#include "corewave/econometrics.hpp"
#include "corewave/error.hpp"
#include "corewave/estimators.hpp"
#include "corewave/series.hpp"
#include "corewave/stats.hpp"
#include "corewave/wavelet.hpp"

namespace corewave::pipeline {

inline std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        fail(ErrorCode::IoError, "SHA-256 computation failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

inline std::string file_sha256(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

/// A built measure: its full available history plus construction notes.
struct BuiltMeasure {
    MeasureSpec spec;
    MonthlySeries series;
    std::vector<std::pair<std::string, std::string>> notes;
};

struct AdfPair {
    econometrics::UnitRootResult no_intercept;
    econometrics::UnitRootResult intercept;
    Window window{};
};

struct CointPair {
    econometrics::CointegrationResult intercept;
    econometrics::CointegrationResult trend;
};

struct MeasureRows {
    std::string name;
    MeasureGroup group = MeasureGroup::cpi_based;
    stats::SummaryRatios ratios;
    CointPair coint_parent;
    AdfPair adf_difference;
};

struct HorizonRows {
    std::string name;
    MeasureGroup group = MeasureGroup::cpi_based;
    double pe_variance = 0;
    Window pe_window{};
    std::size_t pe_nobs = 0;
    CointPair coint_future;
    AdfPair adf_prediction_error;
    econometrics::PredictionTestResult regression;
};

struct HorizonBlock {
    int horizon = 0;
    std::vector<HorizonRows> rows;
};

struct EvaluationReport {
    Window window{};
    MonthlySeries parent;                 // parent over the evaluation window
    std::vector<BuiltMeasure> measures;   // cores over the evaluation window
    std::vector<MeasureRows> rows;
    std::vector<HorizonBlock> horizons;
    std::vector<std::pair<std::string, std::string>> metadata;
};

namespace detail {

template <class F>
auto tag_stage(const std::string& measure, const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        if (!e.stage().empty()) throw;
        throw e.tagged(measure, stage);
    }
}

inline MonthlySeries load_parent(const EvaluationConfig& cfg, std::vector<std::pair<std::string, std::string>>& inputs) {
    const std::string file = cfg.parent_index.empty() ? cfg.parent_series : cfg.parent_index;
    return tag_stage("parent", "ingestion", [&] {
        const auto path = cfg.resolve(file);
        auto raw = load_series_csv(path);
        inputs.emplace_back(file, file_sha256(path));
        return cfg.parent_index.empty() ? raw : estimators::yoy_log_inflation(raw);
    });
}

}  // namespace detail

/// The parent restricted to the requested sample window, for selection runs.
inline MonthlySeries load_sample_parent(const EvaluationConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> inputs;
    const auto parent = detail::load_parent(cfg, inputs);
    Window w = window_of(parent);
    if (cfg.sample_window) w = intersect(w, *cfg.sample_window);
    if (w.empty()) fail(ErrorCode::TooShort, "sample window does not overlap the parent");
    return parent.slice(w.first, w.last);
}

/// Every configured measure aligned on the common evaluation window.
struct MeasureSet {
    MonthlySeries parent_full;
    MonthlySeries parent;  // over `window`
    Window window{};
    std::vector<BuiltMeasure> measures;
    /// (file as configured, SHA-256) for every input read
    std::vector<std::pair<std::string, std::string>> inputs;
};

/**
 * Loads the inputs and builds every configured measure. The evaluation window
 * is the requested sample intersected with the availability of the parent and
 * every measure; ARMA is fitted from one month before it and wavelets are
 * decomposed over exactly that window.
 */
inline MeasureSet build_measures(const EvaluationConfig& cfg) {
    cfg.validate();
    using K = MeasureSpec::Kind;
    std::vector<std::pair<std::string, std::string>> inputs;

    const MonthlySeries parent_full = detail::load_parent(cfg, inputs);
    const auto specs = cfg.measures();

    std::optional<estimators::ComponentPanel> panel;
    for (const auto& m : specs) {
        if (!m.uses_panel() || panel) continue;
        panel = detail::tag_stage(m.name, "ingestion", [&] {
            if (cfg.panel.empty()) fail(ErrorCode::IoError, "no component panel configured");
            const auto path = cfg.resolve(cfg.panel);
            if (!std::filesystem::exists(path)) fail(ErrorCode::IoError, "component panel " + path.string() + " not found");
            auto p = load_panel_csv(path);
            inputs.emplace_back(cfg.panel, file_sha256(path));
            return p;
        });
    }

    // Pass 1: measures that do not depend on the evaluation window.
    std::vector<BuiltMeasure> built(specs.size());
    Window window = window_of(parent_full);
    if (cfg.sample_window) window = intersect(window, *cfg.sample_window);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& m = specs[i];
        built[i].spec = m;
        if (m.kind == K::arma || m.kind == K::wavelet) continue;
        built[i].series = detail::tag_stage(m.name, "ingestion", [&]() -> MonthlySeries {
            switch (m.kind) {
                case K::index: {
                    const auto path = cfg.resolve(m.argument);
                    auto s = estimators::yoy_log_inflation(load_series_csv(path));
                    inputs.emplace_back(m.argument, file_sha256(path));
                    return s;
                }
                case K::series: {
                    const auto path = cfg.resolve(m.argument);
                    auto s = load_series_csv(path);
                    inputs.emplace_back(m.argument, file_sha256(path));
                    return s;
                }
                default: return {};
            }
        });
        if (m.kind == K::index || m.kind == K::series) {
            window = intersect(window, window_of(built[i].series));
            continue;
        }
        built[i].series = detail::tag_stage(m.name, "construction", [&]() -> MonthlySeries {
            switch (m.kind) {
                case K::exclude: {
                    const auto ids = detail::split_list(m.argument, '|');
                    return estimators::aggregate_excluding(*panel, std::set<std::string>(ids.begin(), ids.end()));
                }
                case K::median: return estimators::weighted_median_core(*panel);
                case K::trim: return estimators::trimmed_mean_core(*panel, detail::to_double(m.name, m.argument));
                case K::ma: return estimators::moving_average_core(parent_full, detail::to_int(m.name, m.argument));
                case K::smoother: {
                    auto s = estimators::exp_smooth_core(parent_full, cfg.smoother);
                    if (static_cast<std::size_t>(cfg.smoother.burn_in) >= s.size()) {
                        fail(ErrorCode::TooShort, "burn-in of " + std::to_string(cfg.smoother.burn_in) + " months exceeds the parent");
                    }
                    return s.slice(s.start.plus(cfg.smoother.burn_in), s.last());
                }
                default: return {};
            }
        });
        if (m.kind == K::smoother) built[i].notes.emplace_back("burn_in_months", std::to_string(cfg.smoother.burn_in));
        window = intersect(window, window_of(built[i].series));
    }
    if (window.empty()) fail(ErrorCode::TooShort, "measures and parent share no common months");

    // Pass 2: ARMA fitted from one month before the window when the parent allows it.
    for (auto& b : built) {
        if (b.spec.kind != K::arma) continue;
        const YearMonth fit_first = parent_full.covers(window.first.plus(-1)) ? window.first.plus(-1) : window.first;
        const auto fit = detail::tag_stage(b.spec.name, "estimation",
                                           [&] { return estimators::arma11_core(parent_full.slice(fit_first, window.last)); });
        b.series = fit.fitted;
        char buf[160];
        std::snprintf(buf, sizeof buf, "c=%.6g phi=%.6g theta=%.6g sigma2=%.6g", fit.c, fit.phi, fit.theta, fit.sigma2);
        b.notes.emplace_back("fit", buf);
        b.notes.emplace_back("fit_window", Window{fit_first, window.last}.to_string());
        window = intersect(window, window_of(b.series));
    }
    // Pass 3: wavelets are two-sided, so they see exactly the evaluation window.
    const MonthlySeries parent = parent_full.slice(window.first, window.last);
    for (auto& b : built) {
        if (b.spec.kind != K::wavelet) continue;
        b.series = detail::tag_stage(b.spec.name, "construction", [&] {
            return estimators::wavelet_core(parent, wavelet::parse_spec(b.spec.argument, 1));
        });
        b.notes.emplace_back("decomposition_window", window.to_string());
    }
    for (auto& b : built) {
        b.notes.insert(b.notes.begin(), {"available", window_of(b.series).to_string()});
        b.series = b.series.slice(window.first, window.last);
    }

    std::sort(inputs.begin(), inputs.end());
    inputs.erase(std::unique(inputs.begin(), inputs.end()), inputs.end());
    return MeasureSet{parent_full, parent, window, std::move(built), std::move(inputs)};
}

/**
 * Builds every configured measure, aligns them on the common window and runs
 * the full battery at each horizon. Errors are re-thrown tagged with the
 * measure and stage that raised them.
 */
inline EvaluationReport run_evaluation(const EvaluationConfig& cfg) {
    MeasureSet set = build_measures(cfg);
    const Window window = set.window;
    const MonthlySeries& parent = set.parent;
    auto& built = set.measures;
    EvaluationReport report;
    report.window = window;
    report.parent = parent;

    const auto run_adf = [&](const std::string& name, const std::string& stage, const MonthlySeries& s) {
        return detail::tag_stage(name, stage, [&] {
            AdfPair p;
            p.no_intercept = econometrics::adf_test(s.values, econometrics::DeterministicSpec::no_intercept, cfg.adf);
            p.intercept = econometrics::adf_test(s.values, econometrics::DeterministicSpec::intercept, cfg.adf);
            p.window = window_of(s);
            return p;
        });
    };
    const auto run_coint = [&](const std::string& name, const std::string& stage, const MonthlySeries& core, const MonthlySeries& target) {
        return detail::tag_stage(name, stage, [&] {
            CointPair p;
            p.intercept = econometrics::cointegration_test(core, target, false, cfg.adf);
            p.trend = econometrics::cointegration_test(core, target, true, cfg.adf);
            return p;
        });
    };

    for (const auto& b : built) {
        MeasureRows r;
        r.name = b.spec.name;
        r.group = b.spec.group();
        r.ratios = detail::tag_stage(r.name, "summary_ratios", [&] { return stats::summary_ratios(b.series, parent); });
        r.coint_parent = run_coint(r.name, "cointegration_parent", b.series, parent);
        MonthlySeries diff{window.first, std::vector<double>(parent.size())};
        for (std::size_t t = 0; t < parent.size(); ++t) diff.values[t] = b.series.values[t] - parent.values[t];
        r.adf_difference = run_adf(r.name, "adf_difference", diff);
        report.rows.push_back(std::move(r));
    }

    for (int h : cfg.horizons) {
        HorizonBlock block;
        block.horizon = h;
        const std::string suffix = "_h" + std::to_string(h);
        if (h >= static_cast<int>(parent.size()) - 30) {
            fail(ErrorCode::HorizonTooLarge, "horizon " + std::to_string(h) + " leaves too few months in window " + window.to_string());
        }
        // future parent dated at t: pi_{t+H}
        const MonthlySeries future{window.first, std::vector<double>(parent.values.begin() + h, parent.values.end())};
        for (const auto& b : built) {
            HorizonRows r;
            r.name = b.spec.name;
            r.group = b.spec.group();
            const auto errors = detail::tag_stage(r.name, "prediction_error" + suffix,
                                                  [&] { return econometrics::prediction_errors(b.series, parent, h); });
            r.pe_variance = stats::variance(errors.values);
            r.pe_window = window_of(errors);
            r.pe_nobs = errors.size();
            r.coint_future = run_coint(r.name, "cointegration_future" + suffix, b.series, future);
            r.adf_prediction_error = run_adf(r.name, "adf_prediction_error" + suffix, errors);
            r.regression = detail::tag_stage(r.name, "prediction_regression" + suffix,
                                             [&] { return econometrics::cogley_regression(b.series, parent, h); });
            block.rows.push_back(std::move(r));
        }
        report.horizons.push_back(std::move(block));
    }
    report.measures = std::move(built);

    auto& md = report.metadata;
    md.emplace_back("evaluation_window", window.to_string());
    md.emplace_back("evaluation_months", std::to_string(window.length()));
    md.emplace_back("parent_available", window_of(set.parent_full).to_string());
    if (cfg.sample_window) md.emplace_back("requested_window", cfg.sample_window->to_string());
    md.emplace_back("config_sha256", sha256_hex(cfg.canonical_text()));
    for (const auto& [file, hash] : set.inputs) md.emplace_back("input_sha256." + file, hash);
    md.emplace_back("critical_values", "simulated null quantiles; see data/critical_values.txt");
    md.emplace_back("critical_values_sha256", sha256_hex(econometrics::default_critical_values_text()));
    md.emplace_back("notice.cointegration",
                    "residual-based Engle-Granger test substitutes for the Johansen trace test; p-values are for the no-cointegration null");
    md.emplace_back("notice.adf_lags", std::string(cfg.adf.mode == econometrics::LagRule::Mode::aic ? "AIC from " : "fixed ") +
                                           std::to_string(cfg.adf.max_lags));
    md.emplace_back("notice.prediction_regression", "Cochrane-Orcutt AR(1) errors; F-test of alpha=0, beta=-1 on the quasi-differenced regression");
    for (const auto& b : report.measures) {
        md.emplace_back("measure." + b.spec.name + ".group", group_name(b.spec.group()));
        md.emplace_back("measure." + b.spec.name + ".source", b.spec.source());
        for (const auto& [k, v] : b.notes) md.emplace_back("measure." + b.spec.name + "." + k, v);
    }
    for (const auto& blk : report.horizons) {
        for (const auto& r : blk.rows) {
            const std::string key = "window.h" + std::to_string(blk.horizon) + "." + r.name;
            md.emplace_back(key + ".prediction_error", r.pe_window.to_string());
            md.emplace_back(key + ".regression", r.regression.window.to_string());
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report emission

enum class ReportFormat { tsv, json_lines };

inline ReportFormat parse_report_format(std::string_view s) {
    if (s == "tsv") return ReportFormat::tsv;
    if (s == "json-lines" || s == "jsonl") return ReportFormat::json_lines;
    fail(ErrorCode::ConfigError, "unknown report format '" + std::string(s) + "'");
}

/// Six significant digits; non-finite values print as NA.
inline std::string format_number(double v) {
    if (!std::isfinite(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    if (std::string_view(buf) == "-0") return "0";
    return buf;
}

/// The value a reader of the emitted table sees.
inline double emitted_value(double v) { return std::isfinite(v) ? std::strtod(format_number(v).c_str(), nullptr) : v; }

/**
 * Ranks 1..M from emitted (rounded) values; ties go to the alphabetically
 * earlier measure. NaN ranks last.
 */
inline std::vector<int> rank_values(const std::vector<std::string>& names, const std::vector<double>& values, bool ascending) {
    std::vector<std::size_t> order(names.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = emitted_value(values[a]), vb = emitted_value(values[b]);
        const bool na = std::isnan(va), nb = std::isnan(vb);
        if (na != nb) return nb;
        if (!na && va != vb) return ascending ? va < vb : va > vb;
        return names[a] < names[b];
    });
    std::vector<int> rank(names.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = static_cast<int>(pos) + 1;
    return rank;
}

/// One output table: ordered columns, rows of already-formatted cells.
struct Table {
    std::string stem;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    /// Columns whose cells are numeric (emitted unquoted in JSON lines).
    std::set<std::string> numeric;
};

namespace detail {

inline std::string json_escape(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

inline std::string render(const Table& t, ReportFormat f) {
    std::ostringstream o;
    if (f == ReportFormat::tsv) {
        for (std::size_t c = 0; c < t.columns.size(); ++c) o << (c ? "\t" : "") << t.columns[c];
        o << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) o << (c ? "\t" : "") << row[c];
            o << '\n';
        }
        return o.str();
    }
    for (const auto& row : t.rows) {
        o << '{';
        for (std::size_t c = 0; c < row.size(); ++c) {
            o << (c ? "," : "") << json_escape(t.columns[c]) << ':';
            const bool num = t.numeric.contains(t.columns[c]);
            if (num && row[c] == "NA") o << "null";
            else if (num) o << row[c];
            else o << json_escape(row[c]);
        }
        o << "}\n";
    }
    return o.str();
}

inline std::string yes_no(bool b) { return b ? "yes" : "no"; }

inline void add_coint_cells(std::vector<std::string>& row, const CointPair& p) {
    for (const auto* c : {&p.intercept, &p.trend}) {
        row.push_back(format_number(c->unit_root.statistic));
        row.push_back(std::to_string(c->unit_root.lags_used));
        row.push_back(format_number(c->p_value()));
        row.push_back(yes_no(c->rejects_no_cointegration(0.05)));
    }
}

inline void add_adf_cells(std::vector<std::string>& row, const AdfPair& p) {
    for (const auto* u : {&p.no_intercept, &p.intercept}) {
        row.push_back(format_number(u->statistic));
        row.push_back(std::to_string(u->lags_used));
        row.push_back(format_number(u->p_value));
        row.push_back(yes_no(u->rejects(0.01)));
    }
}

inline const std::vector<std::string> kCointColumns{"stat_intercept", "lags_intercept", "p_intercept", "reject5_intercept",
                                                    "stat_trend",     "lags_trend",     "p_trend",     "reject5_trend"};
inline const std::vector<std::string> kAdfColumns{"stat_no_intercept", "lags_no_intercept", "p_no_intercept", "reject1_no_intercept",
                                                  "stat_intercept",    "lags_intercept",    "p_intercept",    "reject1_intercept"};

inline std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace detail

/// Every table of the report, in emission order.
inline std::vector<Table> report_tables(const EvaluationReport& r) {
    std::vector<Table> out;
    const std::string win = r.window.to_string();
    const std::string nobs = std::to_string(r.window.length());
    const std::set<std::string> num_common{"nobs"};

    Table t1{"table1", {"measure", "mean_ratio", "variance_ratio", "turning_point_ratio"}, {}, {"mean_ratio", "variance_ratio", "turning_point_ratio"}};
    for (const auto& m : r.rows) {
        t1.rows.push_back({m.name, format_number(m.ratios.mean_ratio), format_number(m.ratios.variance_ratio),
                           format_number(m.ratios.turning_point_ratio)});
    }
    out.push_back(std::move(t1));

    Table t2{"table2", detail::concat({"measure", "group", "window", "nobs"}, detail::kCointColumns), {}, num_common};
    for (const auto& c : detail::kCointColumns) {
        if (!c.starts_with("reject")) t2.numeric.insert(c);
    }
    for (const auto& m : r.rows) {
        std::vector<std::string> row{m.name, group_name(m.group), m.coint_parent.intercept.window.to_string(),
                                     std::to_string(m.coint_parent.intercept.unit_root.nobs)};
        detail::add_coint_cells(row, m.coint_parent);
        t2.rows.push_back(std::move(row));
    }
    const auto t2_numeric = t2.numeric;
    out.push_back(std::move(t2));

    Table t3{"table3", detail::concat({"measure", "group", "window", "nobs"}, detail::kAdfColumns), {}, num_common};
    for (const auto& c : detail::kAdfColumns) {
        if (!c.starts_with("reject")) t3.numeric.insert(c);
    }
    for (const auto& m : r.rows) {
        std::vector<std::string> row{m.name, group_name(m.group), m.adf_difference.window.to_string(),
                                     std::to_string(m.adf_difference.no_intercept.nobs)};
        detail::add_adf_cells(row, m.adf_difference);
        t3.rows.push_back(std::move(row));
    }
    const auto t3_numeric = t3.numeric;
    out.push_back(std::move(t3));

    for (const auto& blk : r.horizons) {
        const std::string h = "_h" + std::to_string(blk.horizon);
        std::vector<std::string> names;
        std::vector<double> variances, r2;
        for (const auto& row : blk.rows) {
            names.push_back(row.name);
            variances.push_back(row.pe_variance);
            r2.push_back(row.regression.r_squared);
        }
        const auto var_rank = rank_values(names, variances, true);
        const auto r2_rank = rank_values(names, r2, false);

        Table t4{"table4" + h, {"measure", "group", "window", "nobs", "variance", "rank"}, {}, {"nobs", "variance", "rank"}};
        Table t5{"table5" + h, detail::concat({"measure", "group", "window", "nobs"}, detail::kCointColumns), {}, t2_numeric};
        Table t6{"table6" + h, detail::concat({"measure", "group", "window", "nobs"}, detail::kAdfColumns), {}, t3_numeric};
        Table t7{"table7" + h,
                 {"measure", "group", "window", "nobs", "alpha", "alpha_se", "beta", "beta_se", "rho", "f_statistic", "f_test_prob",
                  "r_squared", "rank"},
                 {},
                 {"nobs", "alpha", "alpha_se", "beta", "beta_se", "rho", "f_statistic", "f_test_prob", "r_squared", "rank"}};
        for (std::size_t i = 0; i < blk.rows.size(); ++i) {
            const auto& row = blk.rows[i];
            const std::string g = group_name(row.group);
            t4.rows.push_back({row.name, g, row.pe_window.to_string(), std::to_string(row.pe_nobs), format_number(row.pe_variance),
                               std::to_string(var_rank[i])});
            std::vector<std::string> c5{row.name, g, row.coint_future.intercept.window.to_string(),
                                        std::to_string(row.coint_future.intercept.unit_root.nobs)};
            detail::add_coint_cells(c5, row.coint_future);
            t5.rows.push_back(std::move(c5));
            std::vector<std::string> c6{row.name, g, row.adf_prediction_error.window.to_string(),
                                        std::to_string(row.adf_prediction_error.no_intercept.nobs)};
            detail::add_adf_cells(c6, row.adf_prediction_error);
            t6.rows.push_back(std::move(c6));
            const auto& e = row.regression;
            t7.rows.push_back({row.name, g, e.window.to_string(), std::to_string(e.nobs), format_number(e.alpha), format_number(e.alpha_se),
                               format_number(e.beta), format_number(e.beta_se), format_number(e.rho), format_number(e.f_statistic),
                               format_number(e.f_test_prob), format_number(e.r_squared), std::to_string(r2_rank[i])});
        }
        out.push_back(std::move(t4));
        out.push_back(std::move(t5));
        out.push_back(std::move(t6));
        out.push_back(std::move(t7));
    }

    Table plot{"plot_data", {"date", "parent"}, {}, {"parent"}};
    for (const auto& m : r.measures) {
        plot.columns.push_back(m.spec.name);
        plot.numeric.insert(m.spec.name);
    }
    for (std::size_t t = 0; t < r.parent.size(); ++t) {
        std::vector<std::string> row{r.parent.start.plus(static_cast<int>(t)).to_string(), format_number(r.parent.values[t])};
        for (const auto& m : r.measures) row.push_back(format_number(m.series.values[t]));
        plot.rows.push_back(std::move(row));
    }
    out.push_back(std::move(plot));

    Table meta{"metadata", {"key", "value"}, {}, {}};
    meta.rows.push_back({"window.table1", win});
    meta.rows.push_back({"nobs.table1", nobs});
    for (const auto& [k, v] : r.metadata) meta.rows.push_back({k, v});
    out.push_back(std::move(meta));
    return out;
}

/// Writes one file per table (`<stem>.tsv` or `<stem>.jsonl`); returns the paths written.
inline std::vector<std::filesystem::path> emit_report(const EvaluationReport& report, ReportFormat format,
                                                      const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) fail(ErrorCode::IoError, "cannot create output directory " + out_dir.string());
    std::vector<std::filesystem::path> written;
    for (const auto& t : report_tables(report)) {
        const auto path = out_dir / (t.stem + (format == ReportFormat::tsv ? ".tsv" : ".jsonl"));
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
        out << detail::render(t, format);
        out.close();
        if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
        written.push_back(path);
    }
    return written;
}

}  // namespace corewave::pipeline
