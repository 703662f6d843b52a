#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "corewave/error.hpp"
#include "corewave/series.hpp"

namespace corewave::stats {

inline double mean(std::span<const double> x) {
    if (x.empty()) fail(ErrorCode::EmptyInput, "mean of an empty series");
    double s = 0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

/// Sample variance, denominator n - 1.
inline double variance(std::span<const double> x) {
    if (x.size() < 2) fail(ErrorCode::TooFewObservations, "variance needs at least 2 observations");
    const double m = mean(x);
    double ss = 0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

inline double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::DimensionMismatch, "correlation needs equal lengths >= 2");
    const double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return sxx == syy ? 1.0 : 0.0;
    return sxy / std::sqrt(sxx * syy);
}

struct JBResult {
    double statistic = 0;
    double p_value = 1;
    std::size_t n = 0;
    double skewness = 0;
    double kurtosis = 3;
};

/// Upper tail of chi-square with 2 degrees of freedom.
inline double chi2_2_survival(double x) { return x <= 0 ? 1.0 : std::exp(-0.5 * x); }

/// JB = n/6 (S^2 + (K-3)^2/4) with moment estimators (denominator n).
inline JBResult jarque_bera(std::span<const double> x) {
    if (x.size() < 8) fail(ErrorCode::TooFewObservations, "Jarque-Bera needs n >= 8, got " + std::to_string(x.size()));
    const double n = static_cast<double>(x.size());
    const double m = mean(x);
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : x) {
        const double d = v - m;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    // Relative floor: a "constant" series built in floating point can carry round-off.
    if (!(m2 > 1e-28 * (1.0 + m * m))) fail(ErrorCode::DegenerateSeries, "zero variance");
    JBResult r;
    r.n = x.size();
    r.skewness = m3 / std::pow(m2, 1.5);
    r.kurtosis = m4 / (m2 * m2);
    const double ek = r.kurtosis - 3.0;
    r.statistic = n / 6.0 * (r.skewness * r.skewness + ek * ek / 4.0);
    r.p_value = chi2_2_survival(r.statistic);
    return r;
}

/**
 * Strict local extrema after run compression: consecutive equal values are
 * merged, so a flat top counts once and a flat step in a monotone stretch
 * counts zero times.
 */
inline std::size_t count_turning_points(std::span<const double> x) {
    if (x.size() < 3) fail(ErrorCode::TooFewObservations, "turning points need n >= 3");
    int prev_sign = 0;
    std::size_t count = 0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double d = x[i] - x[i - 1];
        if (d == 0) continue;
        const int sign = d > 0 ? 1 : -1;
        if (prev_sign != 0 && sign != prev_sign) ++count;
        prev_sign = sign;
    }
    return count;
}

struct SummaryRatios {
    double mean_ratio = 1;
    double variance_ratio = 1;
    double turning_point_ratio = 1;
};

/// Core over parent: means, sample variances, turning-point counts.
inline SummaryRatios summary_ratios(const MonthlySeries& core, const MonthlySeries& parent) {
    if (core.start != parent.start || core.size() != parent.size()) {
        fail(ErrorCode::Misaligned, "core and parent must share start and length");
    }
    const double pm = mean(parent.values);
    const double pv = variance(parent.values);
    const auto ptp = count_turning_points(parent.values);
    if (pm == 0) fail(ErrorCode::ZeroDenominator, "parent mean is zero");
    if (pv == 0) fail(ErrorCode::ZeroDenominator, "parent variance is zero");
    if (ptp == 0) fail(ErrorCode::ZeroDenominator, "parent has no turning points");
    SummaryRatios r;
    r.mean_ratio = mean(core.values) / pm;
    r.variance_ratio = variance(core.values) / pv;
    r.turning_point_ratio = static_cast<double>(count_turning_points(core.values)) / static_cast<double>(ptp);
    return r;
}

}  // namespace corewave::stats
