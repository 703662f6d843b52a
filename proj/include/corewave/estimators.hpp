#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "corewave/error.hpp"
#include "corewave/series.hpp"
#include "corewave/stats.hpp"
#include "corewave/wavelet.hpp"

namespace corewave::estimators {

/// Per-month component inflation (percent) and weights; rows are months.
struct ComponentPanel {
    YearMonth start;
    std::vector<std::string> component_ids;
    std::vector<std::vector<double>> inflation;
    std::vector<std::vector<double>> weights;

    std::size_t months() const { return inflation.size(); }
    std::size_t components() const { return component_ids.size(); }

    void validate() const {
        if (inflation.empty()) fail(ErrorCode::InvalidPanel, "panel has no months");
        if (component_ids.empty()) fail(ErrorCode::InvalidPanel, "panel has no components");
        if (weights.size() != inflation.size()) fail(ErrorCode::InvalidPanel, "weights/inflation row count mismatch");
        for (std::size_t t = 0; t < inflation.size(); ++t) {
            if (inflation[t].size() != components() || weights[t].size() != components()) {
                fail(ErrorCode::InvalidPanel, "row " + std::to_string(t) + " has the wrong number of components");
            }
            double sum = 0;
            for (std::size_t k = 0; k < components(); ++k) {
                if (!(weights[t][k] >= 0) || !std::isfinite(inflation[t][k])) {
                    fail(ErrorCode::InvalidPanel, "invalid weight or inflation at " + start.plus(static_cast<int>(t)).to_string());
                }
                sum += weights[t][k];
            }
            if (std::abs(sum - 1.0) > 1e-9) {
                fail(ErrorCode::InvalidPanel, "weights at " + start.plus(static_cast<int>(t)).to_string() + " sum to " + std::to_string(sum));
            }
        }
    }
};

/// pi_t = 100 (ln P_t - ln P_{t-12}); starts twelve months after the index.
inline MonthlySeries yoy_log_inflation(const MonthlySeries& index) {
    if (index.size() < 13) fail(ErrorCode::TooShort, "need at least 13 index values, got " + std::to_string(index.size()));
    for (double p : index.values) {
        if (!(p > 0)) fail(ErrorCode::NonPositiveIndex, "price index values must be positive");
    }
    MonthlySeries out{index.start.plus(12), std::vector<double>(index.size() - 12)};
    for (std::size_t t = 12; t < index.size(); ++t) {
        out.values[t - 12] = 100.0 * (std::log(index.values[t]) - std::log(index.values[t - 12]));
    }
    return out;
}

/// Weighted mean of the included components, weights renormalised per month.
inline MonthlySeries aggregate_excluding(const ComponentPanel& panel, const std::set<std::string>& excluded) {
    panel.validate();
    for (const auto& id : excluded) {
        if (std::find(panel.component_ids.begin(), panel.component_ids.end(), id) == panel.component_ids.end()) {
            fail(ErrorCode::UnknownComponent, "component '" + id + "' not in panel");
        }
    }
    std::vector<bool> keep(panel.components());
    for (std::size_t k = 0; k < keep.size(); ++k) keep[k] = !excluded.contains(panel.component_ids[k]);
    if (std::none_of(keep.begin(), keep.end(), [](bool b) { return b; })) {
        fail(ErrorCode::AllExcluded, "every component is excluded");
    }
    MonthlySeries out{panel.start, std::vector<double>(panel.months())};
    for (std::size_t t = 0; t < panel.months(); ++t) {
        double num = 0, den = 0;
        for (std::size_t k = 0; k < keep.size(); ++k) {
            if (!keep[k]) continue;
            num += panel.weights[t][k] * panel.inflation[t][k];
            den += panel.weights[t][k];
        }
        if (den <= 0) fail(ErrorCode::AllExcluded, "included components carry no weight at " + panel.start.plus(static_cast<int>(t)).to_string());
        out.values[t] = num / den;
    }
    return out;
}

namespace detail {

inline std::vector<std::size_t> ascending_order(std::span<const double> values) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    return idx;
}

// Cumulative weights are compared with this slack so that weights such as
// 0.1 + 0.2 + 0.2 still reach one half.
inline constexpr double kCumulativeSlack = 1e-12;

inline double weighted_median(std::span<const double> x, std::span<const double> w) {
    const auto order = ascending_order(x);
    double cum = 0;
    for (std::size_t k : order) {
        cum += w[k];
        if (cum >= 0.5 - kCumulativeSlack) return x[k];
    }
    return x[order.back()];
}

inline double weighted_mean(std::span<const double> x, std::span<const double> w) {
    double num = 0, den = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        num += w[k] * x[k];
        den += w[k];
    }
    return num / den;
}

// Drops `tail` weight from each end of the ordered distribution, pro-rating the
// component that straddles a cut.
inline double trimmed_mean(std::span<const double> x, std::span<const double> w, double tail) {
    if (tail == 0) return weighted_mean(x, w);
    const auto order = ascending_order(x);
    double total = 0;
    for (double v : w) total += v;
    const double lo = tail * total;
    const double hi = (1.0 - tail) * total;
    double cum = 0, num = 0, kept = 0;
    for (std::size_t k : order) {
        const double c0 = cum;
        const double c1 = cum + w[k];
        cum = c1;
        const double mass = std::min(c1, hi) - std::max(c0, lo);
        if (mass > 0) {
            num += mass * x[k];
            kept += mass;
        }
    }
    return num / kept;
}

}  // namespace detail

/// Lower weighted median: first component (ascending, stable) whose cumulative weight reaches 1/2.
inline MonthlySeries weighted_median_core(const ComponentPanel& panel) {
    panel.validate();
    MonthlySeries out{panel.start, std::vector<double>(panel.months())};
    for (std::size_t t = 0; t < panel.months(); ++t) {
        out.values[t] = detail::weighted_median(panel.inflation[t], panel.weights[t]);
    }
    return out;
}

/// Trimmed mean dropping `trim_percent` of weight from each tail.
inline MonthlySeries trimmed_mean_core(const ComponentPanel& panel, double trim_percent) {
    if (!(trim_percent >= 0 && trim_percent < 50)) {
        fail(ErrorCode::InvalidTrim, "trim must be in [0, 50), got " + std::to_string(trim_percent));
    }
    panel.validate();
    MonthlySeries out{panel.start, std::vector<double>(panel.months())};
    for (std::size_t t = 0; t < panel.months(); ++t) {
        out.values[t] = detail::trimmed_mean(panel.inflation[t], panel.weights[t], trim_percent / 100.0);
    }
    return out;
}

/// Trailing mean over `window` months; the first window-1 months are dropped.
inline MonthlySeries moving_average_core(const MonthlySeries& parent, int window) {
    if (window < 1) fail(ErrorCode::WindowTooLarge, "window must be positive");
    if (parent.size() < static_cast<std::size_t>(window)) {
        fail(ErrorCode::WindowTooLarge, "window " + std::to_string(window) + " exceeds series length " + std::to_string(parent.size()));
    }
    const auto w = static_cast<std::size_t>(window);
    MonthlySeries out{parent.start.plus(window - 1), std::vector<double>(parent.size() - w + 1)};
    for (std::size_t t = w - 1; t < parent.size(); ++t) {
        double s = 0;
        for (std::size_t k = t + 1 - w; k <= t; ++k) s += parent.values[k];
        out.values[t + 1 - w] = s / static_cast<double>(w);
    }
    return out;
}

struct SmootherConfig {
    enum class Init { first_observation, presample_mean, value };

    /// Cogley's monthly gain: 0.125 per quarter.
    double gain = 0.125 / 3.0;
    Init init = Init::first_observation;
    int presample_months = 12;  // used by presample_mean
    double init_value = 0;      // used by value
    int burn_in = 60;
};

/**
 * core_t = core_{t-1} + gain (pi_t - core_{t-1}) over the whole parent; the
 * state before the first month comes from `cfg.init`. Burn-in is left to the
 * caller, which knows the evaluation window.
 */
inline MonthlySeries exp_smooth_core(const MonthlySeries& parent, const SmootherConfig& cfg) {
    if (!(cfg.gain > 0 && cfg.gain <= 1)) fail(ErrorCode::InvalidGain, "gain must lie in (0, 1], got " + std::to_string(cfg.gain));
    if (parent.empty()) fail(ErrorCode::TooShort, "empty parent");
    double state = 0;
    switch (cfg.init) {
        case SmootherConfig::Init::first_observation:
            state = parent.values.front();
            break;
        case SmootherConfig::Init::presample_mean: {
            const auto k = std::min<std::size_t>(parent.size(), static_cast<std::size_t>(std::max(1, cfg.presample_months)));
            state = stats::mean(std::span<const double>(parent.values).first(k));
            break;
        }
        case SmootherConfig::Init::value:
            state = cfg.init_value;
            break;
    }
    MonthlySeries out{parent.start, std::vector<double>(parent.size())};
    for (std::size_t t = 0; t < parent.size(); ++t) {
        state += cfg.gain * (parent.values[t] - state);
        out.values[t] = state;
    }
    return out;
}

struct Arma11Fit {
    /// One-step-ahead fitted values, starting one month after the parent.
    MonthlySeries fitted;
    double c = 0;
    double phi = 0;
    double theta = 0;
    double sigma2 = 0;
    /// Innovations e_2..e_n (e_1 = 0 is not included).
    std::vector<double> residuals;
    int iterations = 0;
    double objective = 0;
};

namespace detail {

struct CssEval {
    double value = 0;
    std::array<double, 3> grad{};  // w.r.t. (c, phi, theta)
};

// Mean of squared innovations e_t = x_t - c - phi x_{t-1} - theta e_{t-1}, e_1 = 0,
// with the gradient carried along the same recursion.
inline CssEval css_objective(std::span<const double> x, double c, double phi, double theta) {
    double e_prev = 0, dc = 0, dphi = 0, dtheta = 0;
    CssEval out;
    for (std::size_t t = 1; t < x.size(); ++t) {
        const double e = x[t] - c - phi * x[t - 1] - theta * e_prev;
        const double nc = -1.0 - theta * dc;
        const double nphi = -x[t - 1] - theta * dphi;
        const double ntheta = -e_prev - theta * dtheta;
        out.value += e * e;
        out.grad[0] += 2 * e * nc;
        out.grad[1] += 2 * e * nphi;
        out.grad[2] += 2 * e * ntheta;
        e_prev = e;
        dc = nc;
        dphi = nphi;
        dtheta = ntheta;
    }
    const double m = static_cast<double>(x.size() - 1);
    out.value /= m;
    for (double& g : out.grad) g /= m;
    return out;
}

}  // namespace detail

inline constexpr int kArmaMaxIterations = 500;
inline constexpr double kArmaObjectiveTolerance = 1e-8;

/**
 * ARMA(1,1) by conditional sum of squares. BFGS over (c, atanh phi, atanh theta)
 * so that |phi|, |theta| < 1 hold throughout. Starts at (mean/2, 0.5, 0).
 */
inline Arma11Fit arma11_core(const MonthlySeries& parent) {
    if (parent.size() < 50) fail(ErrorCode::TooShort, "ARMA(1,1) needs at least 50 observations, got " + std::to_string(parent.size()));
    require_finite(parent.values, "parent");
    const std::span<const double> x = parent.values;

    using Vec = std::array<double, 3>;
    auto to_model = [](const Vec& p) { return Vec{p[0], std::tanh(p[1]), std::tanh(p[2])}; };
    auto evaluate = [&](const Vec& p, Vec& grad) {
        const Vec m = to_model(p);
        auto e = detail::css_objective(x, m[0], m[1], m[2]);
        grad = {e.grad[0], e.grad[1] * (1 - m[1] * m[1]), e.grad[2] * (1 - m[2] * m[2])};
        return e.value;
    };

    Vec p{stats::mean(x) * 0.5, std::atanh(0.5), 0.0};
    Vec g{};
    double f = evaluate(p, g);
    std::array<std::array<double, 3>, 3> hinv{};  // inverse Hessian approximation
    for (int i = 0; i < 3; ++i) hinv[i][i] = 1.0;

    int iter = 0;
    int quiet = 0;
    bool converged = false;
    for (; iter < kArmaMaxIterations; ++iter) {
        Vec dir{};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) dir[i] -= hinv[i][j] * g[j];
        double slope = 0;
        for (int i = 0; i < 3; ++i) slope += dir[i] * g[i];
        if (slope >= 0) {  // not a descent direction: restart from steepest descent
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) hinv[i][j] = i == j ? 1.0 : 0.0;
                dir[i] = -g[i];
            }
            slope = 0;
            for (int i = 0; i < 3; ++i) slope -= g[i] * g[i];
        }
        if (slope == 0) {
            converged = true;
            break;
        }
        double step = 1.0;
        Vec p_new{}, g_new{};
        double f_new = f;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (int i = 0; i < 3; ++i) p_new[i] = p[i] + step * dir[i];
            // keep |phi|, |theta| away from the unit boundary
            if (std::abs(p_new[1]) < 18 && std::abs(p_new[2]) < 18) {
                f_new = evaluate(p_new, g_new);
                if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) {
            converged = true;  // no further decrease representable along the search direction
            break;
        }
        Vec s{}, y{};
        for (int i = 0; i < 3; ++i) {
            s[i] = p_new[i] - p[i];
            y[i] = g_new[i] - g[i];
        }
        const double change = std::abs(f - f_new);
        p = p_new;
        g = g_new;
        f = f_new;

        double sy = 0;
        for (int i = 0; i < 3; ++i) sy += s[i] * y[i];
        if (sy > 1e-300) {
            Vec hy{};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) hy[i] += hinv[i][j] * y[j];
            double yhy = 0;
            for (int i = 0; i < 3; ++i) yhy += y[i] * hy[i];
            const double rho = 1.0 / sy;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    hinv[i][j] += (1 + rho * yhy) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }

        double gnorm = 0;
        for (double v : g) gnorm = std::max(gnorm, std::abs(v));
        quiet = change <= kArmaObjectiveTolerance * (std::abs(f) + kArmaObjectiveTolerance) ? quiet + 1 : 0;
        if (quiet >= 2 || gnorm < 1e-12) {
            converged = true;
            ++iter;
            break;
        }
    }
    const Vec m = to_model(p);
    if (!converged) {
        std::ostringstream msg;
        msg << "CSS search stopped after " << iter << " iterations at c=" << m[0] << " phi=" << m[1]
            << " theta=" << m[2] << " objective=" << f;
        fail(ErrorCode::NonConvergence, msg.str());
    }

    Arma11Fit fit;
    fit.c = m[0];
    fit.phi = m[1];
    fit.theta = m[2];
    fit.iterations = iter;
    fit.objective = f;
    fit.fitted = MonthlySeries{parent.start.plus(1), std::vector<double>(x.size() - 1)};
    fit.residuals.resize(x.size() - 1);
    double e_prev = 0, ss = 0;
    for (std::size_t t = 1; t < x.size(); ++t) {
        const double yhat = fit.c + fit.phi * x[t - 1] + fit.theta * e_prev;
        const double e = x[t] - yhat;
        fit.fitted.values[t - 1] = yhat;
        fit.residuals[t - 1] = e;
        ss += e * e;
        e_prev = e;
    }
    fit.sigma2 = ss / static_cast<double>(x.size() - 1);
    return fit;
}

/// Level-`spec.level` approximation of the parent, same dates as the parent.
inline MonthlySeries wavelet_core(const MonthlySeries& parent, const wavelet::WaveletSpec& spec) {
    const auto d = wavelet::decompose(parent.values, spec);
    return MonthlySeries{parent.start, wavelet::reconstruct_approximation(d, spec.level)};
}

}  // namespace corewave::estimators
