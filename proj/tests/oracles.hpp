#pragma once

// Independent reference implementations the library is checked against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "corewave/estimators.hpp"
#include "corewave/random.hpp"
#include "corewave/wavelet.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Weight replication: with weights that are whole multiples of 1/units, the
// weighted median and trimmed mean of a month equal the ordinary median and
// trimmed mean of the list in which each component appears `count` times.

/// A month of 8 components whose weights are whole multiples of 1/units.
struct IntegerMonth {
    std::vector<double> inflation;
    std::vector<int> counts;
};

// No ascending prefix may carry exactly half the weight: there the lower and
// ordinary medians differ, and a near-50% trim straddles two values.
inline bool has_prefix_at_half(const IntegerMonth& m, int units, int margin) {
    std::vector<std::size_t> order(m.inflation.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return m.inflation[a] < m.inflation[b]; });
    int cum = 0;
    for (auto k : order) {
        cum += m.counts[k];
        if (std::abs(2 * cum - units) <= 2 * margin) return true;
    }
    return false;
}

inline IntegerMonth random_month(std::mt19937_64& eng, corewave::NormalSampler& rng, int units, int margin) {
    for (;;) {
        IntegerMonth m;
        std::vector<int> cuts{0, units};
        std::uniform_int_distribution<int> cut(1, units - 1);
        while (cuts.size() < 9) cuts.push_back(cut(eng));
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t k = 1; k < cuts.size(); ++k) m.counts.push_back(cuts[k] - cuts[k - 1]);
        for (int k = 0; k < 8; ++k) m.inflation.push_back(rng(3.0, 4.0));
        if (!has_prefix_at_half(m, units, margin)) return m;
    }
}

inline corewave::estimators::ComponentPanel to_panel(const std::vector<IntegerMonth>& months, int units,
                                                     corewave::YearMonth start = {1967, 2}) {
    corewave::estimators::ComponentPanel p;
    p.start = start;
    for (int k = 0; k < 8; ++k) p.component_ids.push_back("c" + std::to_string(k));
    for (const auto& m : months) {
        p.inflation.push_back(m.inflation);
        std::vector<double> w;
        for (int c : m.counts) w.push_back(static_cast<double>(c) / units);
        // Summing integer counts over `units` in floating point can miss 1 by an ulp.
        const double s = std::accumulate(w.begin(), w.end(), 0.0);
        for (double& v : w) v /= s;
        p.weights.push_back(std::move(w));
    }
    return p;
}

inline std::vector<double> replicate(const IntegerMonth& m) {
    std::vector<double> out;
    for (std::size_t k = 0; k < m.counts.size(); ++k) out.insert(out.end(), static_cast<std::size_t>(m.counts[k]), m.inflation[k]);
    std::sort(out.begin(), out.end());
    return out;
}

inline double ordinary_median(const std::vector<double>& sorted) {
    const std::size_t n = sorted.size();
    return n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

inline double replicated_trimmed_mean(const std::vector<double>& sorted, double tail) {
    const auto cut = static_cast<std::size_t>(std::llround(tail * static_cast<double>(sorted.size())));
    double s = 0;
    for (std::size_t i = cut; i < sorted.size() - cut; ++i) s += sorted[i];
    return s / static_cast<double>(sorted.size() - 2 * cut);
}

// ---------------------------------------------------------------------------
// Wavelets.

/// One analysis step as explicit matrices: half-point symmetric extension, then filter and keep odd samples.
inline corewave::wavelet::StepOutput convolution_matrix_step(const std::vector<double>& x, const corewave::wavelet::FilterBank& b) {
    const std::size_t n = x.size();
    const std::size_t L = b.length();
    const std::size_t ext_len = n + 2 * (L - 1);
    std::vector<std::vector<double>> E(ext_len, std::vector<double>(n, 0.0));
    for (std::size_t t = 0; t < ext_len; ++t) {
        // ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} x_{n-2} ...
        auto i = static_cast<std::ptrdiff_t>(t) - static_cast<std::ptrdiff_t>(L - 1);
        while (i < 0 || i >= static_cast<std::ptrdiff_t>(n)) i = i < 0 ? -1 - i : 2 * static_cast<std::ptrdiff_t>(n) - 1 - i;
        E[t][static_cast<std::size_t>(i)] = 1.0;
    }
    corewave::wavelet::StepOutput out;
    const std::size_t out_len = (n + L - 1) / 2;
    for (std::size_t j = 0; j < out_len; ++j) {
        double a = 0, d = 0;
        for (std::size_t m = 0; m < L; ++m) {
            const auto& row = E[2 * j + 1 + m];
            double xe = 0;
            for (std::size_t c = 0; c < n; ++c) xe += row[c] * x[c];
            a += b.dec_low[m] * xe;
            d += b.dec_high[m] * xe;
        }
        out.approx.push_back(a);
        out.detail.push_back(d);
    }
    return out;
}

/**
 * Largest violation of the orthonormal filter-bank identities: unit norm and
 * double-shift orthogonality of both filters, mutual orthogonality, sum of the
 * low-pass equal to sqrt(2), zero-sum high-pass, the alternating-flip relation
 * and time reversal between analysis and synthesis filters.
 */
inline double filter_bank_violation(const corewave::wavelet::FilterBank& b) {
    const std::size_t L = b.length();
    double worst = 0;
    auto note = [&](double v) { worst = std::max(worst, std::abs(v)); };
    note(std::accumulate(b.dec_low.begin(), b.dec_low.end(), 0.0) - std::sqrt(2.0));
    note(std::accumulate(b.dec_high.begin(), b.dec_high.end(), 0.0));
    for (std::size_t shift = 0; shift < L; shift += 2) {
        double ll = 0, hh = 0, lh = 0, hl = 0;
        for (std::size_t k = 0; k + shift < L; ++k) {
            ll += b.dec_low[k] * b.dec_low[k + shift];
            hh += b.dec_high[k] * b.dec_high[k + shift];
            lh += b.dec_low[k] * b.dec_high[k + shift];
            hl += b.dec_high[k] * b.dec_low[k + shift];
        }
        note(ll - (shift == 0 ? 1.0 : 0.0));
        note(hh - (shift == 0 ? 1.0 : 0.0));
        note(lh);
        note(hl);
    }
    for (std::size_t k = 0; k < L; ++k) {
        note(b.dec_high[k] - (k % 2 ? -1.0 : 1.0) * b.dec_low[L - 1 - k]);
        note(b.rec_low[k] - b.dec_low[L - 1 - k]);
        note(b.rec_high[k] - b.dec_high[L - 1 - k]);
    }
    return worst;
}

/**
 * Largest interior detail coefficient, relative to the signal scale, when a
 * degree-`degree` polynomial of length n is decomposed one level. Interior
 * coefficients are those whose filter support avoids the extended edges.
 */
inline double interior_polynomial_detail(const corewave::wavelet::FilterBank& b, int degree, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double u = static_cast<double>(t) - 0.5 * static_cast<double>(n);
        double v = 0;
        for (int p = degree; p >= 0; --p) v = v * u + (1.0 + 0.5 * p);
        x[t] = v;
    }
    double scale = 1.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    const auto step = corewave::wavelet::dwt_step(x, b);
    const std::size_t L = b.length();
    double worst = 0;
    for (std::size_t j = 0; j < step.detail.size(); ++j) {
        // Output j reads extended samples 2j+1 .. 2j+L, i.e. x[2j+2-L .. 2j+1].
        const auto lo = static_cast<std::ptrdiff_t>(2 * j + 2) - static_cast<std::ptrdiff_t>(L);
        if (lo < 0 || 2 * j + 1 >= n) continue;
        worst = std::max(worst, std::abs(step.detail[j]) / scale);
    }
    return worst;
}

}  // namespace oracle
