#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "corewave/error.hpp"
#include "corewave/random.hpp"

namespace corewave::econometrics {

/// Null distributions tabulated for the lower-tail unit-root statistics.
enum class TableKind {
    df_no_intercept,  // Dickey-Fuller, no deterministic terms
    df_intercept,     // Dickey-Fuller with intercept
    eg_intercept,     // Engle-Granger residuals, 2 variables, intercept in the first stage
    eg_trend,         // Engle-Granger residuals, 2 variables, intercept + trend
};

inline constexpr std::array<TableKind, 4> kAllTableKinds{TableKind::df_no_intercept, TableKind::df_intercept,
                                                         TableKind::eg_intercept, TableKind::eg_trend};

inline std::string_view table_kind_name(TableKind k) {
    switch (k) {
        case TableKind::df_no_intercept: return "df_no_intercept";
        case TableKind::df_intercept: return "df_intercept";
        case TableKind::eg_intercept: return "eg_intercept";
        case TableKind::eg_trend: return "eg_trend";
    }
    return "?";
}

inline TableKind parse_table_kind(std::string_view s) {
    for (TableKind k : kAllTableKinds) {
        if (table_kind_name(k) == s) return k;
    }
    fail(ErrorCode::ConfigError, "unknown critical-value table kind '" + std::string(s) + "'");
}

/// Lower-tail probabilities at which quantiles are stored.
inline constexpr std::array<double, 12> kTableLevels{0.001, 0.005, 0.01, 0.025, 0.05, 0.10,
                                                     0.20,  0.50,  0.80, 0.90,  0.95, 0.99};
/// Regression sample sizes at which the null distribution is simulated.
inline constexpr std::array<int, 6> kTableSizes{25, 50, 100, 250, 500, 1000};

/**
 * Quantile table indexed by (kind, regression sample size, level). Between
 * simulated sizes, quantiles are interpolated linearly in 1/n; outside the
 * simulated range the nearest size is used.
 */
class CriticalValueTable {
public:
    void set(TableKind kind, int nobs, double level, double value) { data_[kind][nobs][level_key(level)] = value; }

    bool has(TableKind kind) const { return data_.contains(kind); }

    double quantile(TableKind kind, int nobs, double level) const {
        const auto& by_n = brackets(kind);
        const long key = level_key(level);
        auto value_at = [&](const std::map<long, double>& row) {
            auto it = row.find(key);
            if (it == row.end()) fail(ErrorCode::ConfigError, "level " + std::to_string(level) + " not tabulated");
            return it->second;
        };
        if (nobs <= by_n.begin()->first) return value_at(by_n.begin()->second);
        if (nobs >= by_n.rbegin()->first) return value_at(by_n.rbegin()->second);
        auto hi = by_n.lower_bound(nobs);
        if (hi->first == nobs) return value_at(hi->second);
        auto lo = std::prev(hi);
        const double w = (1.0 / nobs - 1.0 / hi->first) / (1.0 / lo->first - 1.0 / hi->first);
        return w * value_at(lo->second) + (1 - w) * value_at(hi->second);
    }

    /// Lower-tail probability of `statistic`, interpolated between tabulated levels
    /// and clamped to [0.001, 0.99].
    double p_value(TableKind kind, int nobs, double statistic) const {
        std::vector<double> q;
        for (double lvl : kTableLevels) q.push_back(quantile(kind, nobs, lvl));
        if (statistic <= q.front()) return kTableLevels.front();
        if (statistic >= q.back()) return kTableLevels.back();
        for (std::size_t i = 1; i < q.size(); ++i) {
            if (statistic <= q[i]) {
                const double t = (statistic - q[i - 1]) / (q[i] - q[i - 1]);
                return kTableLevels[i - 1] + t * (kTableLevels[i] - kTableLevels[i - 1]);
            }
        }
        return kTableLevels.back();
    }

    /// Plain-text form: one `kind n level value` record per line.
    std::string to_text(std::string_view header) const {
        std::ostringstream out;
        out << "# " << header << "\n# kind nobs level value\n";
        for (const auto& [kind, by_n] : data_) {
            for (const auto& [n, row] : by_n) {
                for (const auto& [key, value] : row) {
                    char buf[96];
                    std::snprintf(buf, sizeof buf, "%s %d %.3f %.4f\n", std::string(table_kind_name(kind)).c_str(), n,
                                  static_cast<double>(key) / 1e6, value);
                    out << buf;
                }
            }
        }
        return out.str();
    }

    static CriticalValueTable parse(std::string_view text) {
        CriticalValueTable t;
        std::istringstream in{std::string(text)};
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::istringstream fields(line);
            std::string kind;
            int n = 0;
            double level = 0, value = 0;
            if (!(fields >> kind >> n >> level >> value)) {
                fail(ErrorCode::MalformedRow, "critical-value line " + std::to_string(lineno));
            }
            t.set(parse_table_kind(kind), n, level, value);
        }
        return t;
    }

private:
    static long level_key(double level) { return std::lround(level * 1e6); }

    const std::map<int, std::map<long, double>>& brackets(TableKind kind) const {
        auto it = data_.find(kind);
        if (it == data_.end() || it->second.empty()) {
            fail(ErrorCode::ConfigError, "no critical values for " + std::string(table_kind_name(kind)));
        }
        return it->second;
    }

    std::map<TableKind, std::map<int, std::map<long, double>>> data_;
};

namespace detail {

// t-ratio of the lag coefficient in dy_t = [c +] r * z_t + e_t, closed form.
inline double df_t_ratio(const std::vector<double>& z, const std::vector<double>& dy, bool intercept) {
    const auto n = static_cast<double>(z.size());
    double mz = 0, my = 0;
    if (intercept) {
        for (std::size_t i = 0; i < z.size(); ++i) {
            mz += z[i];
            my += dy[i];
        }
        mz /= n;
        my /= n;
    }
    double szz = 0, szy = 0, syy = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double a = z[i] - mz, b = dy[i] - my;
        szz += a * a;
        szy += a * b;
        syy += b * b;
    }
    const double r = szy / szz;
    const double ssr = std::max(syy - r * szy, 0.0);
    const double dof = n - (intercept ? 2.0 : 1.0);
    return r / std::sqrt(ssr / dof / szz);
}

// Residuals of y on [1, (t), x]; demeaning removes the intercept, trend is partialled out.
inline std::vector<double> eg_residuals(const std::vector<double>& y, const std::vector<double>& x, bool trend) {
    const std::size_t n = y.size();
    std::vector<std::vector<double>> cols;
    cols.push_back(x);
    if (trend) {
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i);
        cols.push_back(std::move(t));
    }
    auto demean = [](std::vector<double>& v) {
        double m = 0;
        for (double a : v) m += a;
        m /= static_cast<double>(v.size());
        for (double& a : v) a -= m;
    };
    std::vector<double> r = y;
    demean(r);
    for (auto& c : cols) demean(c);
    // Gram-Schmidt on the (at most two) demeaned regressors.
    for (std::size_t k = 0; k < cols.size(); ++k) {
        for (std::size_t j = 0; j < k; ++j) {
            double num = 0, den = 0;
            for (std::size_t i = 0; i < n; ++i) {
                num += cols[k][i] * cols[j][i];
                den += cols[j][i] * cols[j][i];
            }
            for (std::size_t i = 0; i < n; ++i) cols[k][i] -= num / den * cols[j][i];
        }
        double num = 0, den = 0;
        for (std::size_t i = 0; i < n; ++i) {
            num += r[i] * cols[k][i];
            den += cols[k][i] * cols[k][i];
        }
        for (std::size_t i = 0; i < n; ++i) r[i] -= num / den * cols[k][i];
    }
    return r;
}

}  // namespace detail

/// One draw of the lag-0 null statistic for `kind` with `nobs` regression observations.
inline double simulate_null_statistic(TableKind kind, int nobs, NormalSampler& rng) {
    const std::size_t len = static_cast<std::size_t>(nobs) + 1;
    auto random_walk = [&] {
        std::vector<double> w(len);
        double acc = 0;
        for (double& v : w) {
            acc += rng();
            v = acc;
        }
        return w;
    };
    std::vector<double> series;
    bool intercept = false;
    switch (kind) {
        case TableKind::df_no_intercept:
            series = random_walk();
            break;
        case TableKind::df_intercept:
            series = random_walk();
            intercept = true;
            break;
        case TableKind::eg_intercept:
        case TableKind::eg_trend: {
            auto y = random_walk();
            auto x = random_walk();
            series = detail::eg_residuals(y, x, kind == TableKind::eg_trend);
            break;
        }
    }
    std::vector<double> z(len - 1), dy(len - 1);
    for (std::size_t t = 1; t < len; ++t) {
        z[t - 1] = series[t - 1];
        dy[t - 1] = series[t] - series[t - 1];
    }
    return detail::df_t_ratio(z, dy, intercept);
}

/**
 * Monte Carlo table of the null distributions. Each (kind, size) cell uses
 * its own stream derived from `seed`, so cells can be regenerated alone.
 */
inline CriticalValueTable simulate_critical_values(int replications, std::uint64_t seed,
                                                   const std::vector<TableKind>& kinds = {kAllTableKinds.begin(), kAllTableKinds.end()},
                                                   const std::vector<int>& sizes = {kTableSizes.begin(), kTableSizes.end()}) {
    CriticalValueTable table;
    for (TableKind kind : kinds) {
        for (int n : sizes) {
            NormalSampler rng(seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(kind) + 1)) ^
                              (static_cast<std::uint64_t>(n) << 32));
            std::vector<double> draws(static_cast<std::size_t>(replications));
            for (double& d : draws) d = simulate_null_statistic(kind, n, rng);
            std::sort(draws.begin(), draws.end());
            for (double level : kTableLevels) {
                // type-7 quantile (linear between order statistics)
                const double h = (static_cast<double>(draws.size()) - 1) * level;
                const auto lo = static_cast<std::size_t>(std::floor(h));
                const auto hi = std::min(lo + 1, draws.size() - 1);
                table.set(kind, n, level, draws[lo] + (h - static_cast<double>(lo)) * (draws[hi] - draws[lo]));
            }
        }
    }
    return table;
}

}  // namespace corewave::econometrics
