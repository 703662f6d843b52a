#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "corewave/error.hpp"
#include "corewave/estimators.hpp"
#include "corewave/series.hpp"
#include "corewave/stats.hpp"
#include "corewave/wavelet.hpp"

namespace corewave::selection {

using wavelet::Family;
using wavelet::WaveletSpec;

enum class Status { kept, failed_jb, failed_entropy, pruned_similar };
enum class Shape { smooth, pointed, plateaued };

inline std::string status_name(Status s) {
    switch (s) {
        case Status::kept: return "kept";
        case Status::failed_jb: return "failed_jb";
        case Status::failed_entropy: return "failed_entropy";
        case Status::pruned_similar: return "pruned_similar";
    }
    return "?";
}

inline std::string shape_name(Shape s) {
    switch (s) {
        case Shape::smooth: return "smooth";
        case Shape::pointed: return "pointed";
        case Shape::plateaued: return "plateaued";
    }
    return "?";
}

/// Per-wavelet diagnostics over levels 1..J (index j-1 holds level j).
struct LevelProfile {
    std::vector<double> jb_pvalues;  // NaN where JB is not computable
    std::vector<double> shannon;
    std::vector<double> log_energy;
};

struct SelectionCandidate {
    WaveletSpec spec;
    LevelProfile profile;
    Status status = Status::kept;
    std::optional<Shape> shape;

    int level() const { return spec.level; }
};

/// Orders candidates by (family, order, level).
inline bool candidate_order(const SelectionCandidate& a, const SelectionCandidate& b) {
    return std::tuple(static_cast<int>(a.spec.family), a.spec.order, a.spec.level) <
           std::tuple(static_cast<int>(b.spec.family), b.spec.order, b.spec.level);
}

struct FamilyRange {
    Family family;
    int max_order = 1;
};

/// family x order x level, haar/db1/sym1 collapsed to a single haar entry per level.
inline std::vector<SelectionCandidate> enumerate_candidates(const std::vector<FamilyRange>& families, int max_level) {
    if (max_level > wavelet::kMaxLevel) {
        fail(ErrorCode::LevelCapExceeded, "max level " + std::to_string(max_level) + " exceeds " + std::to_string(wavelet::kMaxLevel));
    }
    if (max_level < 1) fail(ErrorCode::LevelOutOfRange, "max level must be at least 1");
    std::vector<SelectionCandidate> out;
    std::set<std::tuple<int, int, int>> seen;
    for (const auto& fr : families) {
        const int top = fr.family == Family::haar ? 1 : fr.max_order;
        if (top < 1 || top > wavelet::kMaxOrder) fail(ErrorCode::InvalidOrder, "max order " + std::to_string(fr.max_order) + " out of range");
        for (int order = 1; order <= top; ++order) {
            for (int level = 1; level <= max_level; ++level) {
                const WaveletSpec spec = WaveletSpec{fr.family, order, level}.canonical();
                if (seen.insert({static_cast<int>(spec.family), spec.order, spec.level}).second) {
                    out.push_back(SelectionCandidate{spec, {}, Status::kept, std::nullopt});
                }
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), candidate_order);
    return out;
}

/// Raw cross-product size before collapsing haar/db1/sym1.
inline std::size_t cross_product_size(const std::vector<FamilyRange>& families, int max_level) {
    std::size_t n = 0;
    for (const auto& fr : families) n += static_cast<std::size_t>(fr.family == Family::haar ? 1 : fr.max_order);
    return n * static_cast<std::size_t>(max_level);
}

/**
 * JB p-values of the reconstructed details D_1..D_J and entropies of the full
 * coefficient vector (A_j followed by D_j..D_1 coefficients) at each level j.
 * Levels deeper than wavelet::max_useful_level are not computable and hold NaN.
 */
inline LevelProfile compute_profile(const MonthlySeries& parent, const WaveletSpec& base, int max_level) {
    WaveletSpec spec = base;
    spec.level = max_level;
    const auto d = wavelet::decompose(parent.values, spec);
    LevelProfile p;
    const int usable = wavelet::max_useful_level(parent.size(), d.bank.length());
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    for (int j = 1; j <= max_level; ++j) {
        double pv = nan;
        if (j > usable) {
            p.jb_pvalues.push_back(pv);
            continue;
        }
        const auto det = wavelet::reconstruct_details(d, j);
        try {
            pv = stats::jarque_bera(det).p_value;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DegenerateSeries && e.code() != ErrorCode::TooFewObservations) throw;
        }
        p.jb_pvalues.push_back(pv);
    }
    // Level-j coefficients: the intermediate approximation plus details 1..j.
    std::vector<double> approx = d.original;
    std::vector<double> details_so_far;
    for (int j = 1; j <= max_level; ++j) {
        auto step = wavelet::dwt_step(approx, d.bank);
        details_so_far.insert(details_so_far.begin(), step.detail.begin(), step.detail.end());
        approx = std::move(step.approx);
        if (j > usable) {
            p.shannon.push_back(nan);
            p.log_energy.push_back(nan);
            continue;
        }
        std::vector<double> all(approx);
        all.insert(all.end(), details_so_far.begin(), details_so_far.end());
        p.shannon.push_back(wavelet::entropy(all, wavelet::EntropyKind::shannon));
        p.log_energy.push_back(wavelet::entropy(all, wavelet::EntropyKind::log_energy));
    }
    return p;
}

/// How a level's detail normality bears on keeping that level.
enum class JbRule {
    /// Keep level i when its own details D_i look normal: p(D_i) > min_p.
    own_level_normal,
    /// Keep level i while no D_k, k <= i, looks normal yet (stop before normal).
    stop_before_normal,
};

struct JbScreen {
    double min_p = 0.01;
    JbRule rule = JbRule::own_level_normal;
};

inline bool jb_level_passes(const LevelProfile& p, int level, const JbScreen& screen) {
    auto normal = [&](int j) {
        const double v = p.jb_pvalues[static_cast<std::size_t>(j - 1)];
        return std::isfinite(v) && v > screen.min_p;
    };
    if (screen.rule == JbRule::own_level_normal) return normal(level);
    for (int j = 1; j <= level; ++j) {
        if (normal(j)) return false;
    }
    return true;
}

/**
 * Fills the profile (up to `max_level`, at least the candidate's level) if it
 * is missing and marks the candidate failed_jb when its level does not pass.
 */
inline SelectionCandidate screen_by_jb(const MonthlySeries& parent, SelectionCandidate c, const JbScreen& screen, int max_level = 0) {
    if (!(screen.min_p > 0 && screen.min_p < 1)) fail(ErrorCode::InvalidThreshold, "min_p must lie in (0, 1)");
    const int depth = std::max(max_level, c.spec.level);
    if (static_cast<int>(c.profile.jb_pvalues.size()) < depth) c.profile = compute_profile(parent, c.spec, depth);
    if (c.status == Status::kept && !jb_level_passes(c.profile, c.spec.level, screen)) c.status = Status::failed_jb;
    return c;
}

inline SelectionCandidate screen_by_jb(const MonthlySeries& parent, SelectionCandidate c, double min_p = 0.01) {
    return screen_by_jb(parent, std::move(c), JbScreen{min_p, JbRule::own_level_normal});
}

struct EntropyRule {
    wavelet::EntropyKind kind = wavelet::EntropyKind::shannon;
    /// Permissible: entropy <= min + tolerance * (max - min) over the profile.
    double tolerance = 0.10;
};

/// Levels (1-based) within `tolerance` of the entropy range above the minimum; NaN levels never qualify.
inline std::vector<int> permissible_levels(const std::vector<double>& entropies, double tolerance) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double e : entropies) {
        if (!std::isfinite(e)) continue;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    std::vector<int> levels;
    if (!std::isfinite(lo)) return levels;
    const double cut = lo + tolerance * (hi - lo);
    for (std::size_t i = 0; i < entropies.size(); ++i) {
        if (std::isfinite(entropies[i]) && entropies[i] <= cut) levels.push_back(static_cast<int>(i) + 1);
    }
    return levels;
}

/// Requires a computed profile (see screen_by_jb / compute_profile).
inline SelectionCandidate screen_by_entropy(SelectionCandidate c, const EntropyRule& rule = {}) {
    const auto& e = rule.kind == wavelet::EntropyKind::shannon ? c.profile.shannon : c.profile.log_energy;
    if (e.empty()) fail(ErrorCode::EmptyInput, "candidate " + c.spec.name() + " has no entropy profile");
    const auto ok = permissible_levels(e, rule.tolerance);
    if (c.status == Status::kept && std::find(ok.begin(), ok.end(), c.spec.level) == ok.end()) c.status = Status::failed_entropy;
    return c;
}

/**
 * Greedy near-duplicate pruning in (family, order, level) order: a candidate
 * whose core series correlates above `threshold` with an already retained one
 * is marked pruned_similar. Returns the retained candidates.
 */
inline std::vector<SelectionCandidate> prune_similar(std::vector<SelectionCandidate>& candidates, const MonthlySeries& parent,
                                                     double threshold = 0.995) {
    if (!(threshold > 0 && threshold < 1)) fail(ErrorCode::InvalidThreshold, "similarity threshold must lie in (0, 1)");
    std::stable_sort(candidates.begin(), candidates.end(), candidate_order);
    std::vector<SelectionCandidate> retained;
    std::vector<std::vector<double>> retained_cores;
    for (auto& c : candidates) {
        if (c.status != Status::kept) continue;
        auto core = estimators::wavelet_core(parent, c.spec).values;
        bool similar = false;
        for (const auto& other : retained_cores) {
            if (stats::pearson_correlation(core, other) > threshold) {
                similar = true;
                break;
            }
        }
        if (similar) {
            c.status = Status::pruned_similar;
        } else {
            retained.push_back(c);
            retained_cores.push_back(std::move(core));
        }
    }
    return retained;
}

struct ShapeThresholds {
    /// Plateaued when more than this share of first differences is zero.
    double plateau_fraction = 0.30;
    /// Pointed when mean |second difference| exceeds this multiple of mean |first difference|.
    double pointed_ratio = 0.50;
};

struct ShapeStats {
    double zero_diff_fraction = 0;
    double curvature_ratio = 0;
};

inline ShapeStats shape_stats(std::span<const double> x) {
    if (x.size() < 24) fail(ErrorCode::TooShort, "shape classification needs at least 24 months");
    double scale = 0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    // Differences below this floor are round-off inside a flat run.
    const double floor = 1e-12 * std::max(scale, 1.0);
    std::size_t zeros = 0;
    double d1 = 0, d2 = 0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double d = x[i] - x[i - 1];
        if (std::abs(d) <= floor) ++zeros;
        d1 += std::abs(d);
        if (i >= 2) d2 += std::abs(x[i] - 2 * x[i - 1] + x[i - 2]);
    }
    ShapeStats s;
    s.zero_diff_fraction = static_cast<double>(zeros) / static_cast<double>(x.size() - 1);
    d1 /= static_cast<double>(x.size() - 1);
    d2 /= static_cast<double>(x.size() - 2);
    s.curvature_ratio = d1 > 0 ? d2 / d1 : 0.0;
    return s;
}

inline Shape classify_shape(const MonthlySeries& core, const ShapeThresholds& th = {}) {
    const auto s = shape_stats(core.values);
    if (s.zero_diff_fraction > th.plateau_fraction) return Shape::plateaued;
    if (s.curvature_ratio > th.pointed_ratio) return Shape::pointed;
    return Shape::smooth;
}

struct SelectionConfig {
    std::vector<FamilyRange> families{{Family::haar, 1}, {Family::daubechies, 10}, {Family::symlet, 8}};
    int max_level = wavelet::kMaxLevel;
    JbScreen jb{};
    EntropyRule entropy{};
    double similarity_threshold = 0.995;
    ShapeThresholds shape{};
};

struct SelectionOutcome {
    std::vector<SelectionCandidate> candidates;  // every candidate with its final status
    std::vector<SelectionCandidate> retained;
};

/// enumerate -> JB screen -> entropy screen -> prune -> classify the survivors.
inline SelectionOutcome run_selection(const MonthlySeries& parent, const SelectionConfig& cfg) {
    SelectionOutcome out;
    out.candidates = enumerate_candidates(cfg.families, cfg.max_level);
    std::map<std::pair<int, int>, LevelProfile> profiles;
    for (auto& c : out.candidates) {
        const auto key = std::pair(static_cast<int>(c.spec.family), c.spec.order);
        auto it = profiles.find(key);
        if (it == profiles.end()) it = profiles.emplace(key, compute_profile(parent, c.spec, cfg.max_level)).first;
        c.profile = it->second;
        c = screen_by_jb(parent, std::move(c), cfg.jb, cfg.max_level);
        c = screen_by_entropy(std::move(c), cfg.entropy);
    }
    out.retained = prune_similar(out.candidates, parent, cfg.similarity_threshold);
    for (auto& c : out.candidates) {
        c.shape = classify_shape(estimators::wavelet_core(parent, c.spec), cfg.shape);
    }
    for (auto& r : out.retained) {
        for (const auto& c : out.candidates) {
            if (c.spec == r.spec) r.shape = c.shape;
        }
    }
    return out;
}

/// One tab-separated audit line: spec, JB p-values, entropies, status, shape.
inline std::string audit_line(const SelectionCandidate& c) {
    auto join = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g", v[i]);
            if (i) s += ',';
            s += buf;
        }
        return s;
    };
    return c.spec.name() + "\t" + join(c.profile.jb_pvalues) + "\t" + join(c.profile.shannon) + "\t" +
           join(c.profile.log_energy) + "\t" + status_name(c.status) + "\t" + (c.shape ? shape_name(*c.shape) : "-");
}

inline constexpr const char* kAuditHeader = "spec\tjb_pvalues\tshannon\tlog_energy\tstatus\tshape";

}  // namespace corewave::selection
