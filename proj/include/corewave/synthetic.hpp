#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "corewave/csv.hpp"
#include "corewave/estimators.hpp"
#include "corewave/random.hpp"
#include "corewave/series.hpp"

namespace corewave::synthetic {

/// AR(1) around a level that shifts at fixed regime boundaries; annual percent.
inline std::vector<double> ar1_with_shifts(std::size_t n, double phi, double sigma, const std::vector<std::pair<double, double>>& regimes,
                                           NormalSampler& rng) {
    std::vector<double> out(n);
    double dev = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double frac = static_cast<double>(t) / static_cast<double>(n);
        double level = regimes.front().second;
        for (const auto& [from, value] : regimes) {
            if (frac >= from) level = value;
        }
        dev = phi * dev + sigma * rng();
        out[t] = level + dev;
    }
    return out;
}

struct ArchiveOptions {
    YearMonth index_start{1960, 1};
    int months = 505;  // through 2002-01
    std::uint64_t seed = 20061010;
};

struct Component {
    std::string id;
    double weight;
    double noise_sd;  // annualised percent, monthly innovation
};

inline const std::vector<Component>& default_components() {
    static const std::vector<Component> c{{"food", 0.15, 9.0},    {"energy", 0.08, 30.0},  {"shelter", 0.30, 3.0},
                                          {"apparel", 0.05, 6.0}, {"medical", 0.08, 2.5},  {"transport", 0.12, 5.0},
                                          {"education", 0.07, 2.0}, {"other", 0.15, 4.0}};
    return c;
}

/**
 * Price indices and a component panel with the layout of the archive: the
 * headline index, three exclusion indices and the long-format panel of
 * year-on-year component inflation with fixed relative importance weights.
 */
struct Archive {
    MonthlySeries cpi;
    std::map<std::string, MonthlySeries> exclusion_indices;
    estimators::ComponentPanel panel;
};

inline Archive make_archive(const ArchiveOptions& opt = {}) {
    NormalSampler rng(opt.seed);
    const auto n = static_cast<std::size_t>(opt.months);
    const auto trend = ar1_with_shifts(n, 0.985, 0.35, {{0.0, 2.0}, {0.2, 5.5}, {0.4, 8.5}, {0.55, 4.5}, {0.75, 2.8}}, rng);
    const auto& comps = default_components();
    const std::size_t k = comps.size();

    // monthly log price changes in percent: (trend + transitory component shock) / 12
    std::vector<std::vector<double>> dlog(n, std::vector<double>(k));
    std::vector<double> shock_state(k, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t j = 0; j < k; ++j) {
            // occasional large relative-price shocks give the component distribution fat tails
            double e = rng();
            if (rng.uniform() < 0.03) e *= 4.0;
            shock_state[j] = 0.3 * shock_state[j] + comps[j].noise_sd * e;
            dlog[t][j] = (trend[t] + shock_state[j]) / 12.0;
        }
    }
    auto index_from = [&](const std::set<std::string>& excluded) {
        MonthlySeries s{opt.index_start, std::vector<double>(n)};
        double wsum = 0;
        for (const auto& c : comps) {
            if (!excluded.contains(c.id)) wsum += c.weight;
        }
        double logp = std::log(100.0);
        for (std::size_t t = 0; t < n; ++t) {
            double step = 0;
            for (std::size_t j = 0; j < k; ++j) {
                if (!excluded.contains(comps[j].id)) step += comps[j].weight / wsum * dlog[t][j];
            }
            logp += step / 100.0;
            s.values[t] = std::exp(logp);
        }
        return s;
    };

    Archive a;
    a.cpi = index_from({});
    a.exclusion_indices["cpi_less_food_energy"] = index_from({"food", "energy"});
    a.exclusion_indices["cpi_less_energy"] = index_from({"energy"});
    a.exclusion_indices["cpi_less_food"] = index_from({"food"});

    a.panel.start = opt.index_start.plus(12);
    for (const auto& c : comps) a.panel.component_ids.push_back(c.id);
    for (std::size_t t = 12; t < n; ++t) {
        std::vector<double> infl(k), w(k);
        for (std::size_t j = 0; j < k; ++j) {
            double acc = 0;
            for (std::size_t s = t - 11; s <= t; ++s) acc += dlog[s][j];
            infl[j] = acc;
            w[j] = comps[j].weight;
        }
        a.panel.inflation.push_back(std::move(infl));
        a.panel.weights.push_back(std::move(w));
    }
    a.panel.validate();
    return a;
}

/// Writes cpi.csv, the exclusion indices and panel.csv into `dir`.
inline void write_archive(const std::filesystem::path& dir, const Archive& a) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string());
    pipeline::write_series_csv(dir / "cpi.csv", a.cpi);
    for (const auto& [name, s] : a.exclusion_indices) pipeline::write_series_csv(dir / (name + ".csv"), s);
    pipeline::write_panel_csv(dir / "panel.csv", a.panel);
}

}  // namespace corewave::synthetic
