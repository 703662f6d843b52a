#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "corewave/random.hpp"
#include "corewave/selection.hpp"
#include "corewave/synthetic.hpp"
#include "test_util.hpp"

using namespace corewave;
using namespace corewave::selection;
using wavelet::Family;
using wavelet::WaveletSpec;

namespace {

constexpr YearMonth kStart{1967, 1};

MonthlySeries white_noise(std::size_t n, std::uint64_t seed, double mean = 0) {
    NormalSampler rng(seed);
    MonthlySeries s{kStart, std::vector<double>(n)};
    for (double& v : s.values) v = mean + rng();
    return s;
}

/// Year-on-year inflation of the synthetic archive over 1967-01..2002-01 (421 months).
const MonthlySeries& synthetic_parent() {
    static const MonthlySeries p = [] {
        const auto a = synthetic::make_archive();
        return estimators::yoy_log_inflation(a.cpi).slice(YearMonth{1967, 1}, YearMonth{2002, 1});
    }();
    return p;
}

SelectionCandidate candidate(Family f, int order, int level) { return SelectionCandidate{WaveletSpec{f, order, level}.canonical(), {}, Status::kept, {}}; }

const std::vector<FamilyRange> kFullGrid{{Family::haar, 1}, {Family::daubechies, 10}, {Family::symlet, 8}};

}  // namespace

TEST(Enumerate, HaarOnly) {
    const auto c = enumerate_candidates({{Family::haar, 1}}, 2);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[0].spec.name(), "haar-L1");
    EXPECT_EQ(c[1].spec.name(), "haar-L2");
}

TEST(Enumerate, FullGridCollapsesHaarAliases) {
    EXPECT_EQ(cross_product_size(kFullGrid, 10), 190u);
    const auto c = enumerate_candidates(kFullGrid, 10);
    EXPECT_EQ(c.size(), 170u);
    EXPECT_EQ(std::count_if(c.begin(), c.end(), [](const auto& x) { return x.spec.family == Family::haar; }), 10);
    EXPECT_TRUE(std::is_sorted(c.begin(), c.end(), candidate_order));
    for (const auto& x : c) {
        EXPECT_FALSE(x.spec.family != Family::haar && x.spec.order == 1) << x.spec.name();
    }
}

TEST(Enumerate, Errors) {
    EXPECT_CODE(LevelCapExceeded, enumerate_candidates(kFullGrid, 11));
    EXPECT_CODE(LevelOutOfRange, enumerate_candidates(kFullGrid, 0));
    EXPECT_CODE(InvalidOrder, enumerate_candidates({{Family::daubechies, 21}}, 3));
}

TEST(Profile, DeepLevelsBeyondUsefulDepthAreNotComputable) {
    const auto& parent = synthetic_parent();
    ASSERT_EQ(parent.size(), 421u);
    const auto p = compute_profile(parent, WaveletSpec{Family::daubechies, 10, 1}, 10);
    ASSERT_EQ(p.jb_pvalues.size(), 10u);
    const auto usable = wavelet::max_useful_level(421, 20);
    EXPECT_EQ(usable, 4);
    for (int j = 1; j <= 10; ++j) {
        const bool finite = std::isfinite(p.shannon[static_cast<std::size_t>(j - 1)]);
        EXPECT_EQ(finite, j <= usable) << "level " << j;
        EXPECT_EQ(std::isfinite(p.log_energy[static_cast<std::size_t>(j - 1)]), j <= usable);
        if (j > usable) EXPECT_TRUE(std::isnan(p.jb_pvalues[static_cast<std::size_t>(j - 1)]));
    }
}

TEST(JbScreen, InvalidThreshold) {
    const auto parent = white_noise(200, 1);
    EXPECT_CODE(InvalidThreshold, screen_by_jb(parent, candidate(Family::daubechies, 4, 2), 0.0));
    EXPECT_CODE(InvalidThreshold, screen_by_jb(parent, candidate(Family::daubechies, 4, 2), 1.0));
}

TEST(JbScreen, RaisingMinPNeverAddsCandidates) {
    const auto& parent = synthetic_parent();
    auto survivors = [&](double min_p, JbRule rule) {
        std::vector<std::string> kept;
        for (auto c : enumerate_candidates(kFullGrid, 10)) {
            c = screen_by_jb(parent, std::move(c), JbScreen{min_p, rule}, 10);
            if (c.status == Status::kept) kept.push_back(c.spec.name());
        }
        return kept;
    };
    auto subset = [](const std::vector<std::string>& small, const std::vector<std::string>& big) {
        return std::all_of(small.begin(), small.end(), [&](const auto& n) { return std::find(big.begin(), big.end(), n) != big.end(); });
    };
    const auto own_loose = survivors(1e-12, JbRule::own_level_normal);
    const auto own_strict = survivors(0.2, JbRule::own_level_normal);
    EXPECT_TRUE(subset(own_strict, own_loose));
    EXPECT_LT(own_strict.size(), own_loose.size());
    // Under stop-before-normal a higher threshold makes "normal" rarer, so survivors can only grow.
    EXPECT_TRUE(subset(survivors(1e-12, JbRule::stop_before_normal), survivors(0.2, JbRule::stop_before_normal)));
    // With a vanishing threshold every level with a computable JB passes the own-level rule.
    std::size_t computable = 0;
    for (auto c : enumerate_candidates(kFullGrid, 10)) {
        c = screen_by_jb(parent, std::move(c), JbScreen{1e-300, JbRule::own_level_normal}, 10);
        const double p = c.profile.jb_pvalues[static_cast<std::size_t>(c.spec.level - 1)];
        if (std::isfinite(p) && p > 1e-300) {
            ++computable;
            EXPECT_EQ(c.status, Status::kept) << c.spec.name();
        }
    }
    EXPECT_GT(computable, 50u);
}

TEST(JbScreen, WhiteNoiseFailsStopBeforeNormal) {
    const auto parent = white_noise(421, 2, 3.0);
    std::size_t failed = 0, total = 0;
    for (auto c : enumerate_candidates(kFullGrid, 5)) {
        c = screen_by_jb(parent, std::move(c), JbScreen{0.01, JbRule::stop_before_normal}, 5);
        ++total;
        if (c.status == Status::failed_jb) ++failed;
    }
    EXPECT_GT(failed * 2, total);
}

TEST(JbScreen, RulesReadTheProfile) {
    LevelProfile p;
    p.jb_pvalues = {0.001, 0.5, 0.002, std::nan("")};
    const JbScreen own{0.01, JbRule::own_level_normal}, stop{0.01, JbRule::stop_before_normal};
    EXPECT_FALSE(jb_level_passes(p, 1, own));
    EXPECT_TRUE(jb_level_passes(p, 2, own));
    EXPECT_FALSE(jb_level_passes(p, 3, own));
    EXPECT_FALSE(jb_level_passes(p, 4, own));
    EXPECT_TRUE(jb_level_passes(p, 1, stop));
    EXPECT_FALSE(jb_level_passes(p, 2, stop));
    EXPECT_FALSE(jb_level_passes(p, 3, stop));
}

TEST(EntropyScreen, PermissibleLevels) {
    EXPECT_EQ(permissible_levels({1, 2, 3, 4}, 0.0), (std::vector<int>{1}));
    EXPECT_EQ(permissible_levels({5, 5, 5, 5}, 0.0), (std::vector<int>{1, 2, 3, 4}));
    EXPECT_EQ(permissible_levels({10, 4, 3, 9}, 0.2), (std::vector<int>{2, 3}));
    EXPECT_EQ(permissible_levels({10, 4, std::nan(""), 9}, 0.0), (std::vector<int>{2}));
    EXPECT_TRUE(permissible_levels({std::nan(""), std::nan("")}, 0.1).empty());
}

TEST(EntropyScreen, MarksCandidatesOutsideThePermissibleSet) {
    auto c = candidate(Family::daubechies, 3, 3);
    c.profile.shannon = {1, 2, 3};
    c.profile.log_energy = {3, 2, 1};
    EXPECT_EQ(screen_by_entropy(c, EntropyRule{wavelet::EntropyKind::shannon, 0.0}).status, Status::failed_entropy);
    EXPECT_EQ(screen_by_entropy(c, EntropyRule{wavelet::EntropyKind::log_energy, 0.0}).status, Status::kept);
    auto failed = c;
    failed.status = Status::failed_jb;
    EXPECT_EQ(screen_by_entropy(failed, EntropyRule{wavelet::EntropyKind::log_energy, 0.0}).status, Status::failed_jb);
    EXPECT_CODE(EmptyInput, screen_by_entropy(candidate(Family::haar, 1, 1)));
}

TEST(Prune, DuplicatesArePrunedDistinctCoresKept) {
    const auto parent = white_noise(421, 3, 3.0);
    std::vector<SelectionCandidate> cs{candidate(Family::daubechies, 4, 3), candidate(Family::daubechies, 4, 3)};
    const auto kept = prune_similar(cs, parent, 0.995);
    EXPECT_EQ(kept.size(), 1u);
    EXPECT_EQ(std::count_if(cs.begin(), cs.end(), [](const auto& c) { return c.status == Status::pruned_similar; }), 1);

    std::vector<SelectionCandidate> distinct{candidate(Family::haar, 1, 1), candidate(Family::daubechies, 10, 4)};
    const double corr = stats::pearson_correlation(estimators::wavelet_core(parent, distinct[0].spec).values,
                                                   estimators::wavelet_core(parent, distinct[1].spec).values);
    ASSERT_LT(corr, 0.995);
    EXPECT_EQ(prune_similar(distinct, parent, 0.995).size(), 2u);
    EXPECT_CODE(InvalidThreshold, prune_similar(distinct, parent, 1.0));
}

TEST(Prune, SkipsCandidatesThatAlreadyFailed) {
    const auto parent = white_noise(200, 4);
    std::vector<SelectionCandidate> cs{candidate(Family::daubechies, 2, 2), candidate(Family::symlet, 4, 2)};
    cs[0].status = Status::failed_entropy;
    const auto kept = prune_similar(cs, parent);
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_EQ(kept[0].spec.name(), "sym4-L2");
    EXPECT_EQ(cs[0].status, Status::failed_entropy);
}

TEST(Shape, StepSmoothAndNoise) {
    const auto& parent = synthetic_parent();
    EXPECT_EQ(classify_shape(estimators::wavelet_core(parent, wavelet::parse_spec("haar-L2"))), Shape::plateaued);
    EXPECT_EQ(classify_shape(estimators::wavelet_core(parent, wavelet::parse_spec("db10-L4"))), Shape::smooth);
    EXPECT_EQ(classify_shape(white_noise(421, 5)), Shape::pointed);
    EXPECT_CODE(TooShort, classify_shape(white_noise(10, 6)));
}

TEST(Shape, ThresholdsAreConfigurable) {
    const auto core = estimators::wavelet_core(synthetic_parent(), wavelet::parse_spec("haar-L2"));
    const auto s = shape_stats(core.values);
    EXPECT_NEAR(s.zero_diff_fraction, 0.75, 0.01);
    ShapeThresholds th;
    th.plateau_fraction = 0.9;
    th.pointed_ratio = 100;
    EXPECT_EQ(classify_shape(core, th), Shape::smooth);
}

TEST(RunSelection, SyntheticParentIsDeterministicAndConsistent) {
    const auto& parent = synthetic_parent();
    SelectionConfig cfg;
    const auto a = run_selection(parent, cfg);
    const auto b = run_selection(parent, cfg);
    ASSERT_EQ(a.candidates.size(), 170u);
    ASSERT_EQ(a.retained.size(), b.retained.size());
    for (std::size_t i = 0; i < a.candidates.size(); ++i) EXPECT_EQ(audit_line(a.candidates[i]), audit_line(b.candidates[i]));

    EXPECT_FALSE(a.retained.empty());
    for (const auto& r : a.retained) {
        ASSERT_TRUE(r.shape.has_value());
        EXPECT_LE(r.spec.level, wavelet::max_useful_level(parent.size(), static_cast<std::size_t>(r.spec.filter_length())));
        const auto it = std::find_if(a.candidates.begin(), a.candidates.end(), [&](const auto& c) { return c.spec == r.spec; });
        ASSERT_NE(it, a.candidates.end());
        EXPECT_EQ(it->status, Status::kept);
    }
    const auto kept = std::count_if(a.candidates.begin(), a.candidates.end(), [](const auto& c) { return c.status == Status::kept; });
    EXPECT_EQ(static_cast<std::size_t>(kept), a.retained.size());
    // Retained cores are pairwise below the similarity threshold.
    for (std::size_t i = 0; i < a.retained.size(); ++i) {
        for (std::size_t j = i + 1; j < a.retained.size(); ++j) {
            EXPECT_LE(stats::pearson_correlation(estimators::wavelet_core(parent, a.retained[i].spec).values,
                                                 estimators::wavelet_core(parent, a.retained[j].spec).values),
                      cfg.similarity_threshold);
        }
    }
}

TEST(Audit, LineLayout) {
    auto c = candidate(Family::symlet, 5, 2);
    c.profile.jb_pvalues = {0.5, 0.25};
    c.profile.shannon = {1, 2};
    c.profile.log_energy = {-1, std::nan("")};
    c.status = Status::failed_entropy;
    c.shape = Shape::smooth;
    EXPECT_EQ(audit_line(c), "sym5-L2\t0.5,0.25\t1,2\t-1,nan\tfailed_entropy\tsmooth");
    EXPECT_EQ(std::string(kAuditHeader), "spec\tjb_pvalues\tshannon\tlog_energy\tstatus\tshape");
}
