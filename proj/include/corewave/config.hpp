#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "corewave/econometrics.hpp"
#include "corewave/error.hpp"
#include "corewave/estimators.hpp"
#include "corewave/selection.hpp"
#include "corewave/series.hpp"
#include "corewave/wavelet.hpp"

namespace corewave::pipeline {

enum class MeasureGroup { cpi_based, regression_based, wavelet_based };

inline std::string group_name(MeasureGroup g) {
    switch (g) {
        case MeasureGroup::cpi_based: return "cpi_based";
        case MeasureGroup::regression_based: return "regression_based";
        case MeasureGroup::wavelet_based: return "wavelet_based";
    }
    return "?";
}

/**
 * How a measure is built. Source strings:
 *   index:<file>          published price index, converted to year-on-year inflation
 *   series:<file>         published core inflation series (percent)
 *   exclude:<id>|<id>...  panel aggregate without the listed components
 *   median                weighted median of the panel
 *   trim:<percent>        weighted trimmed mean of the panel
 *   ma:<months>           trailing moving average of the parent
 *   smoother              exponential smoother of the parent
 *   arma                  ARMA(1,1) one-step fitted values of the parent
 *   wavelet:<spec>        wavelet approximation, e.g. wavelet:db10-L4
 */
struct MeasureSpec {
    enum class Kind { index, series, exclude, median, trim, ma, smoother, arma, wavelet };
    std::string name;
    Kind kind = Kind::median;
    std::string argument;

    MeasureGroup group() const {
        switch (kind) {
            case Kind::ma:
            case Kind::smoother:
            case Kind::arma: return MeasureGroup::regression_based;
            case Kind::wavelet: return MeasureGroup::wavelet_based;
            default: return MeasureGroup::cpi_based;
        }
    }
    bool uses_panel() const { return kind == Kind::exclude || kind == Kind::median || kind == Kind::trim; }
    std::string source() const {
        static const char* names[] = {"index", "series", "exclude", "median", "trim", "ma", "smoother", "arma", "wavelet"};
        std::string s = names[static_cast<int>(kind)];
        return argument.empty() ? s : s + ":" + argument;
    }
};

namespace detail {

inline std::string strip(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

/// Drops a trailing `; comment` or `# comment` (the marker must follow whitespace), then strips.
inline std::string value_text(std::string s) {
    for (std::size_t i = 1; i < s.size(); ++i) {
        if ((s[i] == ';' || s[i] == '#') && (s[i - 1] == ' ' || s[i - 1] == '\t')) {
            s.resize(i);
            break;
        }
    }
    return strip(std::move(s));
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) {
        item = strip(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) fail(ErrorCode::ConfigError, key + ": not a number: '" + v + "'");
    return d;
}

inline int to_int(const std::string& key, const std::string& v) {
    const double d = to_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 1e9) fail(ErrorCode::ConfigError, key + ": not an integer: '" + v + "'");
    return static_cast<int>(d);
}

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline MeasureSpec parse_measure(const std::string& name, const std::string& source) {
    using K = MeasureSpec::Kind;
    MeasureSpec m;
    m.name = name;
    const auto colon = source.find(':');
    const std::string kind = detail::strip(source.substr(0, colon));
    m.argument = colon == std::string::npos ? "" : detail::strip(source.substr(colon + 1));
    struct Entry {
        const char* key;
        K kind;
        bool needs_arg;
    };
    static const Entry table[] = {{"index", K::index, true},    {"series", K::series, true}, {"exclude", K::exclude, true},
                                  {"median", K::median, false}, {"trim", K::trim, true},     {"ma", K::ma, true},
                                  {"smoother", K::smoother, false}, {"arma", K::arma, false}, {"wavelet", K::wavelet, true}};
    for (const auto& e : table) {
        if (kind != e.key) continue;
        if (e.needs_arg == m.argument.empty()) {
            fail(ErrorCode::ConfigError, "measure " + name + ": source '" + source + (e.needs_arg ? "' needs an argument" : "' takes no argument"));
        }
        m.kind = e.kind;
        if (m.kind == K::trim) {
            const double a = detail::to_double("measure " + name, m.argument);
            if (!(a >= 0 && a < 50)) fail(ErrorCode::ConfigError, "measure " + name + ": trim must lie in [0, 50)");
        } else if (m.kind == K::ma) {
            if (detail::to_int("measure " + name, m.argument) < 1) fail(ErrorCode::ConfigError, "measure " + name + ": window must be positive");
        } else if (m.kind == K::wavelet) {
            try {
                const auto spec = wavelet::parse_spec(m.argument, 1);
                (void)wavelet::build_filter_bank(spec);
                if (spec.level < 1 || spec.level > wavelet::kMaxLevel) fail(ErrorCode::LevelOutOfRange, "level must lie in 1..10");
            } catch (const Error& err) {
                fail(ErrorCode::ConfigError, "measure " + name + ": " + err.what());
            }
        }
        return m;
    }
    fail(ErrorCode::ConfigError, "measure " + name + ": unknown source '" + source + "'");
}

struct EvaluationConfig {
    std::filesystem::path data_dir = "data/archive";
    /// Exactly one of these names the parent: a price index or an inflation series.
    std::string parent_index = "cpi.csv";
    std::string parent_series;
    std::string panel = "panel.csv";

    std::vector<int> horizons{12, 18, 24};
    std::vector<double> trim_levels{9, 18};
    std::vector<int> ma_windows{37, 19};
    std::vector<std::string> wavelets{"db10-L4", "sym5-L5", "db2-L3", "db3-L5", "haar-L2", "sym1-L4"};
    std::vector<std::pair<std::string, std::string>> published_indices{{"cpi_less_food_energy", "cpi_less_food_energy.csv"},
                                                                       {"cpi_less_energy", "cpi_less_energy.csv"},
                                                                       {"cpi_less_food", "cpi_less_food.csv"}};
    /// Explicit measure list; when empty the default list is derived from the fields above.
    std::vector<MeasureSpec> explicit_measures;

    estimators::SmootherConfig smoother{};
    econometrics::LagRule adf = econometrics::LagRule::aic(12);
    std::optional<Window> sample_window;
    selection::SelectionConfig selection{};

    /// Resolves a data file against the archive directory (COREWAVE_DATA_DIR wins).
    std::filesystem::path resolve(const std::string& file) const {
        std::filesystem::path p(file);
        if (p.is_absolute()) return p;
        if (const char* env = std::getenv("COREWAVE_DATA_DIR"); env && *env) return std::filesystem::path(env) / p;
        return data_dir / p;
    }

    std::vector<MeasureSpec> measures() const {
        if (!explicit_measures.empty()) return explicit_measures;
        std::vector<MeasureSpec> out;
        for (const auto& [name, file] : published_indices) out.push_back(parse_measure(name, "index:" + file));
        out.push_back(parse_measure("median_cpi", "median"));
        for (double t : trim_levels) {
            out.push_back(parse_measure("trimmed_mean_" + detail::strip(detail::fmt_g(t)), "trim:" + detail::fmt_g(t)));
        }
        for (int w : ma_windows) out.push_back(parse_measure("ma_" + std::to_string(w), "ma:" + std::to_string(w)));
        out.push_back(parse_measure("exp_smooth", "smoother"));
        out.push_back(parse_measure("arma11", "arma"));
        for (const auto& w : wavelets) out.push_back(parse_measure(w, "wavelet:" + w));
        return out;
    }

    void validate() const {
        if (horizons.empty()) fail(ErrorCode::ConfigError, "at least one horizon is required");
        for (int h : horizons) {
            if (h < 1) fail(ErrorCode::ConfigError, "horizons must be >= 1");
        }
        if (parent_index.empty() == parent_series.empty()) {
            fail(ErrorCode::ConfigError, "set exactly one of data.parent_index and data.parent_series");
        }
        if (sample_window && sample_window->empty()) fail(ErrorCode::ConfigError, "sample window is empty");
        std::set<std::string> names;
        for (const auto& m : measures()) {
            if (!names.insert(m.name).second) fail(ErrorCode::ConfigError, "duplicate measure name " + m.name);
        }
        if (names.empty()) fail(ErrorCode::ConfigError, "no measures configured");
    }

    /// Every effective setting, one `key = value` per line, in a fixed order.
    std::string canonical_text() const {
        std::ostringstream o;
        o << "data.parent_index = " << parent_index << "\n";
        o << "data.parent_series = " << parent_series << "\n";
        o << "data.panel = " << panel << "\n";
        o << "evaluation.horizons =";
        for (int h : horizons) o << ' ' << h;
        o << "\n";
        if (sample_window) o << "evaluation.sample = " << sample_window->to_string() << "\n";
        o << "evaluation.adf_lags = " << (adf.mode == econometrics::LagRule::Mode::aic ? "aic:" : "fixed:") << adf.max_lags << "\n";
        o << "smoother.gain = " << detail::fmt_g(smoother.gain) << "\n";
        o << "smoother.init = " << static_cast<int>(smoother.init) << "\n";
        o << "smoother.presample_months = " << smoother.presample_months << "\n";
        o << "smoother.init_value = " << detail::fmt_g(smoother.init_value) << "\n";
        o << "smoother.burn_in = " << smoother.burn_in << "\n";
        for (const auto& m : measures()) o << "measure." << m.name << " = " << m.source() << "\n";
        return o.str();
    }
};

namespace detail {

inline std::optional<YearMonth> parse_month(const std::string& key, const std::string& v) {
    if (v.empty()) return std::nullopt;
    auto ym = YearMonth::parse(v);
    if (!ym) fail(ErrorCode::ConfigError, key + ": expected YYYY-MM, got '" + v + "'");
    return ym;
}

inline selection::FamilyRange parse_family_range(const std::string& item) {
    const auto colon = item.find(':');
    const auto fam = wavelet::parse_family(item.substr(0, colon));
    int max_order = fam == wavelet::Family::haar ? 1 : 10;
    if (colon != std::string::npos) max_order = to_int("selection.families", item.substr(colon + 1));
    if (max_order < 1 || max_order > wavelet::kMaxOrder) fail(ErrorCode::ConfigError, "selection.families: order out of range in '" + item + "'");
    return {fam, max_order};
}

}  // namespace detail

/**
 * Reads an INI-style file (`[section]` headers, `key = value` lines, `;` or
 * `#` comments on their own line or after a value). Unknown sections or keys are configuration errors, so
 * typos do not silently fall back to defaults.
 */
inline EvaluationConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        fail(ErrorCode::ConfigError, std::string("config: ") + e.what());
    }
    EvaluationConfig cfg;
    const std::map<std::string, std::set<std::string>> known{
        {"data", {"dir", "parent_index", "parent_series", "panel"}},
        {"evaluation", {"horizons", "sample_start", "sample_end", "adf_lags", "trim_levels", "ma_windows", "wavelets", "published_indices"}},
        {"smoother", {"gain", "init", "presample_months", "init_value", "burn_in"}},
        {"selection", {"families", "max_level", "min_p", "jb_rule", "entropy_kind", "entropy_tolerance", "similarity", "plateau_fraction",
                       "pointed_ratio"}},
        {"measures", {}},
    };
    for (const auto& [section, body] : tree) {
        auto it = known.find(section);
        if (it == known.end()) fail(ErrorCode::ConfigError, "config: unknown section [" + section + "]");
        if (section == "measures") continue;
        for (const auto& [key, value] : body) {
            if (!it->second.contains(key)) fail(ErrorCode::ConfigError, "config: unknown key " + section + "." + key);
        }
    }
    auto get = [&](const std::string& path) -> std::optional<std::string> {
        auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'));
        if (!v) return std::nullopt;
        return detail::value_text(*v);
    };

    if (auto v = get("data.dir")) cfg.data_dir = *v;
    if (auto v = get("data.parent_series")) {
        cfg.parent_series = *v;
        cfg.parent_index.clear();
    }
    if (auto v = get("data.parent_index")) cfg.parent_index = *v;
    if (auto v = get("data.panel")) cfg.panel = *v;

    if (auto v = get("evaluation.horizons")) {
        cfg.horizons.clear();
        for (const auto& s : detail::split_list(*v)) cfg.horizons.push_back(detail::to_int("evaluation.horizons", s));
    }
    if (auto v = get("evaluation.trim_levels")) {
        cfg.trim_levels.clear();
        for (const auto& s : detail::split_list(*v)) cfg.trim_levels.push_back(detail::to_double("evaluation.trim_levels", s));
    }
    if (auto v = get("evaluation.ma_windows")) {
        cfg.ma_windows.clear();
        for (const auto& s : detail::split_list(*v)) cfg.ma_windows.push_back(detail::to_int("evaluation.ma_windows", s));
    }
    if (auto v = get("evaluation.wavelets")) cfg.wavelets = detail::split_list(*v);
    if (auto v = get("evaluation.published_indices")) {
        cfg.published_indices.clear();
        for (const auto& item : detail::split_list(*v)) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) fail(ErrorCode::ConfigError, "evaluation.published_indices: expected name:file, got '" + item + "'");
            cfg.published_indices.emplace_back(detail::strip(item.substr(0, colon)), detail::strip(item.substr(colon + 1)));
        }
    }
    {
        auto first = detail::parse_month("evaluation.sample_start", get("evaluation.sample_start").value_or(""));
        auto last = detail::parse_month("evaluation.sample_end", get("evaluation.sample_end").value_or(""));
        if (first || last) {
            cfg.sample_window = Window{first.value_or(YearMonth{1, 1}), last.value_or(YearMonth{9999, 12})};
        }
    }
    if (auto v = get("evaluation.adf_lags")) {
        const auto parts = detail::split_list(*v, ':');
        if (parts.size() != 2 || (parts[0] != "aic" && parts[0] != "fixed")) {
            fail(ErrorCode::ConfigError, "evaluation.adf_lags: expected aic:<max> or fixed:<lags>");
        }
        const int n = detail::to_int("evaluation.adf_lags", parts[1]);
        if (n < 0) fail(ErrorCode::ConfigError, "evaluation.adf_lags: lags must be >= 0");
        cfg.adf = parts[0] == "aic" ? econometrics::LagRule::aic(n) : econometrics::LagRule::fixed(n);
    }

    if (auto v = get("smoother.gain")) cfg.smoother.gain = detail::to_double("smoother.gain", *v);
    if (auto v = get("smoother.init")) {
        using I = estimators::SmootherConfig::Init;
        if (*v == "first_observation") cfg.smoother.init = I::first_observation;
        else if (*v == "presample_mean") cfg.smoother.init = I::presample_mean;
        else if (*v == "value") cfg.smoother.init = I::value;
        else fail(ErrorCode::ConfigError, "smoother.init: expected first_observation, presample_mean or value");
    }
    if (auto v = get("smoother.presample_months")) cfg.smoother.presample_months = detail::to_int("smoother.presample_months", *v);
    if (auto v = get("smoother.init_value")) cfg.smoother.init_value = detail::to_double("smoother.init_value", *v);
    if (auto v = get("smoother.burn_in")) cfg.smoother.burn_in = detail::to_int("smoother.burn_in", *v);
    if (!(cfg.smoother.gain > 0 && cfg.smoother.gain <= 1)) fail(ErrorCode::ConfigError, "smoother.gain must lie in (0, 1]");
    if (cfg.smoother.burn_in < 0) fail(ErrorCode::ConfigError, "smoother.burn_in must be >= 0");

    auto& sel = cfg.selection;
    if (auto v = get("selection.families")) {
        sel.families.clear();
        try {
            for (const auto& item : detail::split_list(*v)) sel.families.push_back(detail::parse_family_range(item));
        } catch (const Error& e) {
            fail(ErrorCode::ConfigError, std::string("selection.families: ") + e.what());
        }
    }
    if (auto v = get("selection.max_level")) sel.max_level = detail::to_int("selection.max_level", *v);
    if (sel.max_level < 1 || sel.max_level > wavelet::kMaxLevel) fail(ErrorCode::ConfigError, "selection.max_level must lie in 1..10");
    if (auto v = get("selection.min_p")) sel.jb.min_p = detail::to_double("selection.min_p", *v);
    if (!(sel.jb.min_p > 0 && sel.jb.min_p < 1)) fail(ErrorCode::ConfigError, "selection.min_p must lie in (0, 1)");
    if (auto v = get("selection.jb_rule")) {
        if (*v == "own_level_normal") sel.jb.rule = selection::JbRule::own_level_normal;
        else if (*v == "stop_before_normal") sel.jb.rule = selection::JbRule::stop_before_normal;
        else fail(ErrorCode::ConfigError, "selection.jb_rule: expected own_level_normal or stop_before_normal");
    }
    if (auto v = get("selection.entropy_kind")) {
        if (*v == "shannon") sel.entropy.kind = wavelet::EntropyKind::shannon;
        else if (*v == "log_energy") sel.entropy.kind = wavelet::EntropyKind::log_energy;
        else fail(ErrorCode::ConfigError, "selection.entropy_kind: expected shannon or log_energy");
    }
    if (auto v = get("selection.entropy_tolerance")) sel.entropy.tolerance = detail::to_double("selection.entropy_tolerance", *v);
    if (auto v = get("selection.similarity")) sel.similarity_threshold = detail::to_double("selection.similarity", *v);
    if (!(sel.similarity_threshold > 0 && sel.similarity_threshold < 1)) fail(ErrorCode::ConfigError, "selection.similarity must lie in (0, 1)");
    if (auto v = get("selection.plateau_fraction")) sel.shape.plateau_fraction = detail::to_double("selection.plateau_fraction", *v);
    if (auto v = get("selection.pointed_ratio")) sel.shape.pointed_ratio = detail::to_double("selection.pointed_ratio", *v);

    if (auto m = tree.get_child_optional("measures")) {
        for (const auto& [name, value] : *m) cfg.explicit_measures.push_back(parse_measure(name, detail::value_text(value.data())));
    }
    cfg.validate();
    return cfg;
}

inline EvaluationConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ConfigError, "cannot open config " + path.string());
    return parse_config(in);
}

}  // namespace corewave::pipeline
