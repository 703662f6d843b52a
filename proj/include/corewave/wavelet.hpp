#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "corewave/error.hpp"
#include "corewave/series.hpp"

namespace corewave::wavelet {

enum class Family { haar, daubechies, symlet };

inline constexpr int kMaxOrder = 20;
inline constexpr int kMaxLevel = 10;

inline std::string family_name(Family f) {
    switch (f) {
        case Family::haar: return "haar";
        case Family::daubechies: return "db";
        case Family::symlet: return "sym";
    }
    return "?";
}

inline Family parse_family(std::string_view name) {
    if (name == "haar") return Family::haar;
    if (name == "db" || name == "daubechies") return Family::daubechies;
    if (name == "sym" || name == "symlet") return Family::symlet;
    fail(ErrorCode::UnknownFamily, "unknown wavelet family '" + std::string(name) + "'");
}

struct WaveletSpec {
    Family family = Family::haar;
    int order = 1;
    int level = 1;

    /// Haar is db1 is sym1; the canonical form reports all three as haar.
    WaveletSpec canonical() const {
        if (family == Family::haar || order == 1) return WaveletSpec{Family::haar, 1, level};
        return *this;
    }
    int filter_length() const { return 2 * (family == Family::haar ? 1 : order); }

    /// e.g. "db10-L4", "haar-L2", "sym5-L5".
    std::string name() const {
        std::string base = family == Family::haar ? "haar" : family_name(family) + std::to_string(order);
        return base + "-L" + std::to_string(level);
    }

    bool operator==(const WaveletSpec&) const = default;
};

/// Parses "db10-L4", "sym5-L5", "haar-L2"; also "db10" with `default_level`.
inline WaveletSpec parse_spec(std::string_view text, int default_level = 1) {
    std::string s(text);
    int level = default_level;
    if (auto pos = s.find("-L"); pos != std::string::npos) {
        try {
            level = std::stoi(s.substr(pos + 2));
        } catch (...) {
            fail(ErrorCode::ConfigError, "bad wavelet level in '" + s + "'");
        }
        s = s.substr(0, pos);
    }
    if (s == "haar") return WaveletSpec{Family::haar, 1, level};
    std::size_t digits = s.find_first_of("0123456789");
    if (digits == std::string::npos) fail(ErrorCode::UnknownFamily, "no order in wavelet name '" + s + "'");
    Family fam = parse_family(s.substr(0, digits));
    int order = 0;
    try {
        order = std::stoi(s.substr(digits));
    } catch (...) {
        fail(ErrorCode::InvalidOrder, "bad wavelet order in '" + s + "'");
    }
    return WaveletSpec{fam, order, level};
}

/// Orthonormal two-channel filter bank; every filter has 2N taps.
struct FilterBank {
    std::vector<double> dec_low;
    std::vector<double> dec_high;
    std::vector<double> rec_low;
    std::vector<double> rec_high;

    std::size_t length() const { return dec_low.size(); }
    bool operator==(const FilterBank&) const = default;
};

namespace detail {

using cplx = std::complex<long double>;

// Roots of P(y) = sum_{k<N} C(N-1+k, k) y^k, the Daubechies half-band polynomial
// in y = sin^2(w/2). Companion-matrix eigenvalues, then Newton-polished.
inline std::vector<cplx> daubechies_y_roots(int order) {
    const int deg = order - 1;
    std::vector<long double> coef(deg + 1);  // ascending powers
    long double c = 1.0L;
    for (int k = 0; k <= deg; ++k) {
        coef[k] = c;
        c = c * static_cast<long double>(order + k) / static_cast<long double>(k + 1);
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) companion(i, deg - 1) = static_cast<double>(-coef[i] / coef[deg]);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    auto eig = solver.eigenvalues();

    std::vector<cplx> roots;
    roots.reserve(deg);
    for (int i = 0; i < deg; ++i) {
        cplx y(eig[i].real(), eig[i].imag());
        for (int it = 0; it < 60; ++it) {
            cplx p = coef[deg], dp = 0;
            for (int k = deg - 1; k >= 0; --k) {
                dp = dp * y + p;
                p = p * y + coef[k];
            }
            if (std::abs(dp) == 0.0L) break;
            cplx step = p / dp;
            y -= step;
            if (std::abs(step) <= 1e-19L * std::max<long double>(1.0L, std::abs(y))) break;
        }
        roots.push_back(y);
    }
    return roots;
}

// One selectable factor of the spectral factorisation: either a real root pair
// {r, 1/r} or a complex quadruple {z, conj z} / {1/z, 1/conj z}.
struct RootGroup {
    std::vector<cplx> inside;
    std::vector<cplx> outside;
};

inline std::vector<RootGroup> root_groups(int order) {
    std::vector<RootGroup> groups;
    for (const cplx& y : daubechies_y_roots(order)) {
        // z + 1/z = 2 - 4y
        cplx b = 2.0L - 4.0L * y;
        cplx disc = std::sqrt(b * b - 4.0L);
        cplx z1 = (b + disc) / 2.0L;
        cplx z2 = (b - disc) / 2.0L;
        cplx zin = std::abs(z1) < std::abs(z2) ? z1 : z2;
        cplx zout = 1.0L / zin;
        if (std::abs(y.imag()) < 1e-12L * std::max<long double>(1.0L, std::abs(y))) {
            groups.push_back({{cplx(zin.real(), 0)}, {cplx(zout.real(), 0)}});
        } else if (y.imag() > 0) {
            groups.push_back({{zin, std::conj(zin)}, {zout, std::conj(zout)}});
        }
    }
    // Deterministic order regardless of eigen-solver output order.
    std::sort(groups.begin(), groups.end(), [](const RootGroup& a, const RootGroup& b) {
        const cplx& x = a.inside.front();
        const cplx& y = b.inside.front();
        if (x.real() != y.real()) return x.real() < y.real();
        return std::abs(x.imag()) < std::abs(y.imag());
    });
    return groups;
}

// Scaling filter (descending powers of z) from (z+1)^N * prod (z - r), scaled to sum sqrt(2).
inline std::vector<double> scaling_filter(int order, const std::vector<cplx>& zeros) {
    std::vector<cplx> poly{cplx(1)};
    auto multiply = [&poly](cplx root) {
        std::vector<cplx> next(poly.size() + 1, cplx(0));
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + 1] -= poly[i] * root;
        }
        poly = std::move(next);
    };
    for (int i = 0; i < order; ++i) multiply(cplx(-1));
    for (const cplx& r : zeros) multiply(r);

    long double sum = 0;
    for (const cplx& p : poly) sum += p.real();
    const long double scale = std::numbers::sqrt2_v<long double> / sum;
    std::vector<double> h(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) h[i] = static_cast<double>(poly[i].real() * scale);
    return h;
}

// RMS deviation of the zeros' phase contribution from its best linear fit on (0, pi).
inline long double phase_nonlinearity(const std::vector<cplx>& zeros) {
    constexpr int kGrid = 256;
    std::vector<long double> phase(kGrid, 0.0L);
    std::vector<long double> omega(kGrid);
    for (int i = 0; i < kGrid; ++i) {
        omega[i] = std::numbers::pi_v<long double> * (i + 0.5L) / kGrid;
    }
    for (const cplx& r : zeros) {
        long double prev = 0, offset = 0;
        for (int i = 0; i < kGrid; ++i) {
            cplx e(std::cos(omega[i]), std::sin(omega[i]));
            long double a = std::arg(e - r);
            if (i > 0) {
                long double d = a + offset - prev;
                if (d > std::numbers::pi_v<long double>) offset -= 2 * std::numbers::pi_v<long double>;
                if (d < -std::numbers::pi_v<long double>) offset += 2 * std::numbers::pi_v<long double>;
            }
            prev = a + offset;
            phase[i] += prev;
        }
    }
    long double mw = 0, mp = 0;
    for (int i = 0; i < kGrid; ++i) {
        mw += omega[i];
        mp += phase[i];
    }
    mw /= kGrid;
    mp /= kGrid;
    long double sxy = 0, sxx = 0;
    for (int i = 0; i < kGrid; ++i) {
        sxy += (omega[i] - mw) * (phase[i] - mp);
        sxx += (omega[i] - mw) * (omega[i] - mw);
    }
    const long double slope = sxy / sxx;
    long double ss = 0;
    for (int i = 0; i < kGrid; ++i) {
        long double r = phase[i] - mp - slope * (omega[i] - mw);
        ss += r * r;
    }
    return std::sqrt(ss / kGrid);
}

inline std::vector<double> daubechies_scaling(int order) {
    std::vector<cplx> zeros;
    for (const RootGroup& g : root_groups(order)) zeros.insert(zeros.end(), g.inside.begin(), g.inside.end());
    return scaling_filter(order, zeros);
}

inline std::vector<double> symlet_scaling(int order) {
    const auto groups = root_groups(order);
    const std::size_t free_bits = groups.empty() ? 0 : groups.size() - 1;
    long double best = std::numeric_limits<long double>::infinity();
    std::vector<cplx> best_zeros;
    // Group 0 stays inside: flipping every group only time-reverses the filter.
    for (unsigned long mask = 0; mask < (1UL << free_bits); ++mask) {
        std::vector<cplx> zeros;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            bool outside = g > 0 && ((mask >> (g - 1)) & 1UL);
            const auto& pick = outside ? groups[g].outside : groups[g].inside;
            zeros.insert(zeros.end(), pick.begin(), pick.end());
        }
        long double score = phase_nonlinearity(zeros);
        if (score < best - 1e-12L) {
            best = score;
            best_zeros = std::move(zeros);
        }
    }
    std::vector<double> h = scaling_filter(order, best_zeros);
    // Orientation: with one root group (orders 2-3) the symlet is the Daubechies
    // filter. Otherwise keep the energy centroid in the later half of the support.
    if (groups.size() > 1) {
        double centroid = 0;
        for (std::size_t k = 0; k < h.size(); ++k) centroid += static_cast<double>(k) * h[k] * h[k];
        if (centroid < 0.5 * static_cast<double>(h.size() - 1)) std::reverse(h.begin(), h.end());
    }
    return h;
}

// Half-point symmetric index reflection: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} x_{n-2} ...
inline std::size_t reflect(std::ptrdiff_t i, std::ptrdiff_t n) {
    const std::ptrdiff_t period = 2 * n;
    std::ptrdiff_t m = i % period;
    if (m < 0) m += period;
    return static_cast<std::size_t>(m < n ? m : period - 1 - m);
}

inline FilterBank compute_filter_bank(const WaveletSpec& spec) {
    if (spec.family != Family::haar && spec.family != Family::daubechies && spec.family != Family::symlet) {
        fail(ErrorCode::UnknownFamily, "unsupported wavelet family");
    }
    const int order = spec.family == Family::haar ? 1 : spec.order;
    if (order < 1 || order > kMaxOrder) {
        fail(ErrorCode::InvalidOrder, "order " + std::to_string(spec.order) + " outside 1.." + std::to_string(kMaxOrder));
    }

    FilterBank bank;
    if (order == 1) {
        const double s = std::numbers::sqrt2 / 2.0;
        bank.dec_low = {s, s};
    } else if (spec.family == Family::symlet) {
        bank.dec_low = detail::symlet_scaling(order);
    } else {
        bank.dec_low = detail::daubechies_scaling(order);
    }

    const std::size_t len = bank.dec_low.size();
    bank.dec_high.resize(len);
    for (std::size_t k = 0; k < len; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        bank.dec_high[k] = sign * bank.dec_low[len - 1 - k];
    }
    bank.rec_low.assign(bank.dec_low.rbegin(), bank.dec_low.rend());
    bank.rec_high.assign(bank.dec_high.rbegin(), bank.dec_high.rend());
    return bank;
}

}  // namespace detail

/**
 * Builds the orthonormal filter bank for `spec` (level is ignored).
 *
 * Daubechies filters come from spectral factorisation of the half-band
 * polynomial with every zero inside the unit circle (minimum phase). Symlets
 * search the same zero set for the selection whose phase is closest to linear.
 */
inline FilterBank build_filter_bank(const WaveletSpec& spec) {
    static std::mutex mutex;
    static std::map<std::pair<Family, int>, FilterBank> cache;
    const std::pair key{spec.family == Family::haar ? Family::daubechies : spec.family, spec.family == Family::haar ? 1 : spec.order};
    {
        std::lock_guard lock(mutex);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    FilterBank bank = detail::compute_filter_bank(spec);
    std::lock_guard lock(mutex);
    return cache.emplace(key, std::move(bank)).first->second;
}

/// Coefficient count after one analysis step with a filter of `filter_length` taps.
constexpr std::size_t next_length(std::size_t len, std::size_t filter_length) {
    return (len + filter_length - 1) / 2;
}

struct StepOutput {
    std::vector<double> approx;
    std::vector<double> detail;
};

/**
 * One analysis step. The input is extended by L-1 = 2N-1 samples on each side
 * (half-point symmetric), correlated with the analysis filters, and every
 * second output kept starting at offset 1:
 *
 *   approx[j] = sum_m dec_low[m]  * ext[2j + 1 + m]
 *   detail[j] = sum_m dec_high[m] * ext[2j + 1 + m]
 *
 * with ext[t] = x[reflect(t - (L-1))].
 */
inline StepOutput dwt_step(std::span<const double> x, const FilterBank& bank) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const auto L = static_cast<std::ptrdiff_t>(bank.length());
    const std::size_t out_len = next_length(x.size(), bank.length());
    StepOutput out{std::vector<double>(out_len), std::vector<double>(out_len)};
    for (std::size_t j = 0; j < out_len; ++j) {
        const std::ptrdiff_t base = 2 * static_cast<std::ptrdiff_t>(j) + 1 - (L - 1);
        double a = 0, d = 0;
        for (std::ptrdiff_t m = 0; m < L; ++m) {
            const double v = x[detail::reflect(base + m, n)];
            a += bank.dec_low[m] * v;
            d += bank.dec_high[m] * v;
        }
        out.approx[j] = a;
        out.detail[j] = d;
    }
    return out;
}

/**
 * Inverse of dwt_step: transpose of the analysis operator restricted to the
 * window the input occupied inside the extended signal. Output sample i sits
 * at extended position i + L - 1, which every polyphase term reaches, so the
 * window is reproduced exactly. An empty `detail` is treated as all zeros.
 */
inline std::vector<double> idwt_step(std::span<const double> approx, std::span<const double> detail,
                                     const FilterBank& bank, std::size_t out_len) {
    const auto L = static_cast<std::ptrdiff_t>(bank.length());
    const auto m_len = static_cast<std::ptrdiff_t>(approx.size());
    const bool has_detail = !detail.empty();
    if (has_detail && detail.size() != approx.size()) {
        fail(ErrorCode::DimensionMismatch, "approx/detail length mismatch");
    }
    std::vector<double> x(out_len, 0.0);
    for (std::size_t i = 0; i < out_len; ++i) {
        // taps m = i + L - 2 - 2j must lie in [0, L-1]
        const std::ptrdiff_t t = static_cast<std::ptrdiff_t>(i) + L - 2;
        const std::ptrdiff_t j_lo = static_cast<std::ptrdiff_t>(i) / 2;  // ceil((t - L + 1) / 2)
        const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(t / 2, m_len - 1);
        double acc = 0;
        for (std::ptrdiff_t j = j_lo; j <= j_hi; ++j) {
            const std::ptrdiff_t m = t - 2 * j;
            acc += approx[j] * bank.dec_low[m];
            if (has_detail) acc += detail[j] * bank.dec_high[m];
        }
        x[i] = acc;
    }
    return x;
}

/// Level-J pyramid output; details[j-1] holds level j.
struct Decomposition {
    WaveletSpec spec;
    FilterBank bank;
    std::vector<double> approx;
    std::vector<std::vector<double>> details;
    /// lengths[0] = original length, lengths[j] = coefficient count at level j.
    std::vector<std::size_t> lengths;
    std::size_t original_length = 0;
    std::vector<double> original;
    static constexpr const char* extension_mode = "half-point symmetric";

    /// Approximation followed by details J..1, the layout used for entropy.
    std::vector<double> concatenated() const {
        std::vector<double> out(approx);
        for (auto it = details.rbegin(); it != details.rend(); ++it) out.insert(out.end(), it->begin(), it->end());
        return out;
    }
};

/// Deepest level at which the coarsest approximation still spans a filter: floor(log2(n / (L - 1))).
inline int max_useful_level(std::size_t n, std::size_t filter_length) {
    const std::size_t span = std::max<std::size_t>(filter_length - 1, 1);
    int level = 0;
    while ((span << (level + 1)) <= n) ++level;
    return level;
}

inline void validate_level(int level) {
    if (level < 1 || level > kMaxLevel) {
        fail(ErrorCode::LevelOutOfRange, "level " + std::to_string(level) + " outside 1.." + std::to_string(kMaxLevel));
    }
}

inline Decomposition decompose(std::span<const double> signal, const WaveletSpec& spec) {
    validate_level(spec.level);
    if (signal.size() < 2) fail(ErrorCode::SignalTooShort, "need at least 2 samples, got " + std::to_string(signal.size()));
    require_finite(signal, "signal");

    Decomposition d;
    d.spec = spec;
    d.bank = build_filter_bank(spec);
    d.original_length = signal.size();
    d.original.assign(signal.begin(), signal.end());
    d.lengths.push_back(signal.size());

    std::vector<double> current(signal.begin(), signal.end());
    for (int j = 1; j <= spec.level; ++j) {
        StepOutput step = dwt_step(current, d.bank);
        if (step.approx.empty()) fail(ErrorCode::SignalTooShort, "level " + std::to_string(j) + " has no coefficients");
        d.lengths.push_back(step.approx.size());
        d.details.push_back(std::move(step.detail));
        current = std::move(step.approx);
    }
    d.approx = std::move(current);
    return d;
}

inline Decomposition decompose(const MonthlySeries& series, const WaveletSpec& spec) {
    return decompose(series.view(), spec);
}

namespace detail {

// Inverse pyramid keeping details at levels > keep_above; levels <= keep_above are zeroed.
inline std::vector<double> inverse_pyramid(const Decomposition& d, int keep_above) {
    std::vector<double> a = d.approx;
    for (int level = d.spec.level; level >= 1; --level) {
        std::span<const double> det;
        if (level > keep_above) det = d.details[level - 1];
        a = idwt_step(a, det, d.bank, d.lengths[level - 1]);
    }
    return a;
}

}  // namespace detail

/// Full inverse transform from coefficients (no shortcut through the stored signal).
inline std::vector<double> reconstruct(const Decomposition& d) { return detail::inverse_pyramid(d, 0); }

/// A_j: the level-j approximation series, aligned with the input. A_0 is the input.
inline std::vector<double> reconstruct_approximation(const Decomposition& d, int j) {
    if (j < 0 || j > d.spec.level) {
        fail(ErrorCode::LevelOutOfRange, "approximation level " + std::to_string(j) + " outside 0.." +
                                             std::to_string(d.spec.level));
    }
    if (j == 0) return d.original;
    return detail::inverse_pyramid(d, j);
}

/// D_j = A_{j-1} - A_j.
inline std::vector<double> reconstruct_details(const Decomposition& d, int j) {
    if (j < 1 || j > d.spec.level) {
        fail(ErrorCode::LevelOutOfRange, "detail level " + std::to_string(j) + " outside 1.." +
                                             std::to_string(d.spec.level));
    }
    auto hi = reconstruct_approximation(d, j - 1);
    auto lo = reconstruct_approximation(d, j);
    for (std::size_t i = 0; i < hi.size(); ++i) hi[i] -= lo[i];
    return hi;
}

enum class EntropyKind { shannon, log_energy };

/// Shannon: -sum s^2 ln s^2. Log energy: sum ln s^2. Zero coefficients contribute 0.
inline double entropy(std::span<const double> coeffs, EntropyKind kind) {
    if (coeffs.empty()) fail(ErrorCode::EmptyInput, "entropy of an empty coefficient vector");
    require_finite(coeffs, "coefficients");
    double acc = 0;
    for (double s : coeffs) {
        const double e = s * s;
        if (e == 0.0) continue;
        acc += kind == EntropyKind::shannon ? -e * std::log(e) : std::log(e);
    }
    return acc;
}

}  // namespace corewave::wavelet
