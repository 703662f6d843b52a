#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "corewave/estimators.hpp"
#include "corewave/random.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace corewave;
using namespace corewave::estimators;
using namespace oracle;

namespace {

constexpr YearMonth kStart{1967, 2};

ComponentPanel one_month(std::vector<double> inflation, std::vector<double> weights) {
    ComponentPanel p;
    p.start = kStart;
    for (std::size_t k = 0; k < inflation.size(); ++k) p.component_ids.push_back("c" + std::to_string(k));
    p.inflation.push_back(std::move(inflation));
    p.weights.push_back(std::move(weights));
    return p;
}

MonthlySeries ramp(std::size_t n) {
    MonthlySeries s{kStart, std::vector<double>(n)};
    for (std::size_t t = 0; t < n; ++t) s.values[t] = static_cast<double>(t);
    return s;
}

}  // namespace

TEST(YoyInflation, ExponentialGrowthGivesConstantRate) {
    MonthlySeries idx{YearMonth{1960, 1}, std::vector<double>(60)};
    for (std::size_t t = 0; t < idx.size(); ++t) idx.values[t] = 100.0 * std::exp(0.002 * static_cast<double>(t));
    const auto pi = yoy_log_inflation(idx);
    EXPECT_EQ(pi.start, (YearMonth{1961, 1}));
    ASSERT_EQ(pi.size(), 48u);
    for (double v : pi.values) EXPECT_NEAR(v, 2.4, 1e-10);
}

TEST(YoyInflation, ConstantIndexAndErrors) {
    const auto pi = yoy_log_inflation(MonthlySeries{kStart, std::vector<double>(20, 150.0)});
    for (double v : pi.values) EXPECT_EQ(v, 0.0);
    std::vector<double> with_zero(20, 100.0);
    with_zero[5] = 0;
    EXPECT_CODE(NonPositiveIndex, yoy_log_inflation(MonthlySeries{kStart, with_zero}));
    EXPECT_CODE(TooShort, yoy_log_inflation(MonthlySeries{kStart, std::vector<double>(12, 100.0)}));
}

TEST(AggregateExcluding, Examples) {
    const auto p = one_month({2.0, 4.0}, {0.5, 0.5});
    EXPECT_DOUBLE_EQ(aggregate_excluding(p, {}).values[0], 3.0);
    EXPECT_DOUBLE_EQ(aggregate_excluding(p, {"c1"}).values[0], 2.0);
    EXPECT_CODE(AllExcluded, aggregate_excluding(p, {"c0", "c1"}));
    EXPECT_CODE(UnknownComponent, aggregate_excluding(p, {"energy"}));
}

TEST(AggregateExcluding, RenormalisesRemainingWeights) {
    const auto p = one_month({1.0, 2.0, 10.0}, {0.2, 0.6, 0.2});
    EXPECT_NEAR(aggregate_excluding(p, {"c2"}).values[0], (0.2 * 1.0 + 0.6 * 2.0) / 0.8, 1e-15);
}

TEST(PanelValidation, RejectsBadPanels) {
    EXPECT_CODE(InvalidPanel, weighted_median_core(one_month({1, 2}, {0.5, 0.4})));
    EXPECT_CODE(InvalidPanel, weighted_median_core(one_month({1, 2}, {1.5, -0.5})));
    auto p = one_month({1, 2}, {0.5, 0.5});
    p.inflation[0].push_back(3);
    EXPECT_CODE(InvalidPanel, weighted_median_core(p));
}

TEST(WeightedMedian, Examples) {
    EXPECT_DOUBLE_EQ(weighted_median_core(one_month({1, 2, 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3})).values[0], 2.0);
    EXPECT_DOUBLE_EQ(weighted_median_core(one_month({5.0, 1.0}, {0.6, 0.4})).values[0], 5.0);
    EXPECT_DOUBLE_EQ(weighted_median_core(one_month({3, 7, -1, 2}, {0, 1, 0, 0})).values[0], 7.0);
}

TEST(WeightedMedian, LowerMedianOnExactHalf) {
    EXPECT_DOUBLE_EQ(weighted_median_core(one_month({1.0, 2.0, 3.0, 4.0}, {0.25, 0.25, 0.25, 0.25})).values[0], 2.0);
    EXPECT_DOUBLE_EQ(weighted_median_core(one_month({1.0, 2.0, 3.0}, {0.1, 0.4, 0.5})).values[0], 2.0);
}

TEST(ReplicationOracle, MedianAndTrimmedMeansOnRandomPanels) {
    constexpr int kUnits = 10000;
    std::mt19937_64 eng(20061010);
    NormalSampler rng(77);
    double worst_median = 0, worst_trim9 = 0, worst_trim18 = 0;
    for (int panel = 0; panel < 1000; ++panel) {
        std::vector<IntegerMonth> months;
        for (int t = 0; t < 3; ++t) months.push_back(random_month(eng, rng, kUnits, 0));
        const auto p = to_panel(months, kUnits);
        const auto med = weighted_median_core(p);
        const auto t9 = trimmed_mean_core(p, 9);
        const auto t18 = trimmed_mean_core(p, 18);
        for (std::size_t t = 0; t < months.size(); ++t) {
            const auto rep = replicate(months[t]);
            worst_median = std::max(worst_median, std::abs(med.values[t] - ordinary_median(rep)));
            worst_trim9 = std::max(worst_trim9, std::abs(t9.values[t] - replicated_trimmed_mean(rep, 0.09)));
            worst_trim18 = std::max(worst_trim18, std::abs(t18.values[t] - replicated_trimmed_mean(rep, 0.18)));
        }
    }
    EXPECT_LT(worst_median, 1e-6);
    EXPECT_LT(worst_trim9, 1e-6);
    EXPECT_LT(worst_trim18, 1e-6);
}

TEST(TrimmedMean, ZeroTrimIsHeadlineMean) {
    std::mt19937_64 eng(5);
    NormalSampler rng(6);
    std::vector<IntegerMonth> months;
    for (int t = 0; t < 50; ++t) months.push_back(random_month(eng, rng, 10000, 0));
    const auto p = to_panel(months, 10000);
    const auto headline = aggregate_excluding(p, {});
    for (double a : {0.0, 1e-9}) {
        const auto tm = trimmed_mean_core(p, a);
        for (std::size_t t = 0; t < p.months(); ++t) EXPECT_NEAR(tm.values[t], headline.values[t], 1e-9);
    }
}

TEST(TrimmedMean, NearHalfTrimApproachesMedian) {
    std::mt19937_64 eng(8);
    NormalSampler rng(9);
    std::vector<IntegerMonth> months;
    for (int t = 0; t < 200; ++t) months.push_back(random_month(eng, rng, 10000, 10));
    const auto p = to_panel(months, 10000);
    const auto tm = trimmed_mean_core(p, 49.9);
    const auto med = weighted_median_core(p);
    for (std::size_t t = 0; t < p.months(); ++t) EXPECT_NEAR(tm.values[t], med.values[t], 1e-3);
}

TEST(TrimmedMean, ProRatesStraddlingComponent) {
    // Weights 0.05 / 0.9 / 0.05 trimmed 10% per tail: the middle component keeps 0.8.
    EXPECT_NEAR(trimmed_mean_core(one_month({-100, 2, 100}, {0.05, 0.9, 0.05}), 10).values[0], 2.0, 1e-12);
    // Equal weights over {1,2,3,4}, 30% per tail: 0.2 of the weight of 2 and 0.2 of 3 remain.
    EXPECT_NEAR(trimmed_mean_core(one_month({1, 2, 3, 4}, {0.25, 0.25, 0.25, 0.25}), 30).values[0], 2.5, 1e-12);
}

TEST(TrimmedMean, InvalidTrim) {
    const auto p = one_month({1, 2}, {0.5, 0.5});
    EXPECT_CODE(InvalidTrim, trimmed_mean_core(p, 60));
    EXPECT_CODE(InvalidTrim, trimmed_mean_core(p, 50));
    EXPECT_CODE(InvalidTrim, trimmed_mean_core(p, -1));
}

TEST(MovingAverage, ConstantAndRamp) {
    const auto c = moving_average_core(MonthlySeries{kStart, std::vector<double>(80, 2.7)}, 37);
    for (double v : c.values) EXPECT_NEAR(v, 2.7, 1e-14);
    const auto r = moving_average_core(ramp(100), 37);
    EXPECT_EQ(r.start, kStart.plus(36));
    ASSERT_EQ(r.size(), 64u);
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r.values[i], static_cast<double>(i + 36) - 18.0, 1e-12);
}

TEST(MovingAverage, Errors) {
    EXPECT_CODE(WindowTooLarge, moving_average_core(ramp(30), 31));
    EXPECT_CODE(WindowTooLarge, moving_average_core(ramp(30), 0));
    EXPECT_EQ(moving_average_core(ramp(30), 30).size(), 1u);
}

TEST(ExpSmooth, Examples) {
    const auto parent = MonthlySeries{kStart, std::vector<double>{3, 1, 4, 1, 5, 9, 2, 6}};
    SmootherConfig unit;
    unit.gain = 1;
    EXPECT_EQ(exp_smooth_core(parent, unit).values, parent.values);

    SmootherConfig fixed;
    fixed.init = SmootherConfig::Init::value;
    fixed.init_value = 2.5;
    for (double v : exp_smooth_core(MonthlySeries{kStart, std::vector<double>(40, 2.5)}, fixed).values) EXPECT_NEAR(v, 2.5, 1e-14);

    fixed.init_value = 0;
    const auto core = exp_smooth_core(MonthlySeries{kStart, std::vector<double>(5, 3.0)}, fixed);
    EXPECT_NEAR(core.values[0], 0.125, 1e-15);
}

TEST(ExpSmooth, InitialisationModes) {
    const auto parent = MonthlySeries{kStart, std::vector<double>{4, 2, 6, 8}};
    SmootherConfig cfg;
    cfg.gain = 0.5;
    EXPECT_NEAR(exp_smooth_core(parent, cfg).values[0], 4.0, 1e-15);
    cfg.init = SmootherConfig::Init::presample_mean;
    cfg.presample_months = 2;
    EXPECT_NEAR(exp_smooth_core(parent, cfg).values[0], 0.5 * 3.0 + 0.5 * 4.0, 1e-15);
}

TEST(ExpSmooth, StaysInsideConvexHull) {
    NormalSampler rng(11);
    MonthlySeries parent{kStart, std::vector<double>(400)};
    for (double& v : parent.values) v = rng(3, 2);
    SmootherConfig cfg;
    cfg.init = SmootherConfig::Init::value;
    cfg.init_value = -10;
    const auto core = exp_smooth_core(parent, cfg);
    const double lo = std::min(*std::min_element(parent.values.begin(), parent.values.end()), cfg.init_value);
    const double hi = std::max(*std::max_element(parent.values.begin(), parent.values.end()), cfg.init_value);
    for (double v : core.values) {
        EXPECT_GE(v, lo);
        EXPECT_LE(v, hi);
    }
}

TEST(ExpSmooth, InvalidGain) {
    const auto parent = MonthlySeries{kStart, std::vector<double>{1, 2, 3}};
    SmootherConfig cfg;
    for (double g : {0.0, -0.1, 1.5}) {
        cfg.gain = g;
        EXPECT_CODE(InvalidGain, exp_smooth_core(parent, cfg));
    }
}

TEST(Arma11, RecoversParametersOfSimulatedProcess) {
    std::vector<double> phis, thetas;
    for (int r = 0; r < 100; ++r) {
        NormalSampler rng(900 + r);
        MonthlySeries s{kStart, std::vector<double>(2000)};
        double x = 0, e = 0;
        for (int t = -200; t < 2000; ++t) {
            const double en = rng();
            x = 0.5 + 0.9 * x + en + 0.3 * e;
            e = en;
            if (t >= 0) s.values[static_cast<std::size_t>(t)] = x;
        }
        const auto fit = arma11_core(s);
        phis.push_back(fit.phi);
        thetas.push_back(fit.theta);
    }
    std::nth_element(phis.begin(), phis.begin() + 50, phis.end());
    std::nth_element(thetas.begin(), thetas.begin() + 50, thetas.end());
    EXPECT_NEAR(phis[50], 0.9, 0.05);
    EXPECT_NEAR(thetas[50], 0.3, 0.05);
}

// On white noise phi and theta are only identified up to the common factor
// (1 - phi L) = (1 + theta L); the identified quantities are the first impulse
// response phi + theta and the forecasts.
TEST(Arma11, WhiteNoiseFitsCarryNoDynamics) {
    int within = 0;
    for (int r = 0; r < 100; ++r) {
        NormalSampler rng(500 + r);
        MonthlySeries s{kStart, std::vector<double>(2000)};
        for (double& v : s.values) v = 3 + rng();
        const auto fit = arma11_core(s);
        const double var = stats::variance(s.values);
        const bool ok = std::abs(fit.phi + fit.theta) < 0.1 && stats::variance(fit.fitted.values) < 0.05 * var &&
                        std::abs(stats::mean(fit.fitted.values) - stats::mean(s.values)) < 0.05 &&
                        std::abs(fit.sigma2 / var - 1) < 0.05;
        if (ok) ++within;
    }
    EXPECT_GE(within, 95);
}

TEST(Arma11, FittedSeriesLayout) {
    NormalSampler rng(3);
    MonthlySeries s{kStart, std::vector<double>(120)};
    for (double& v : s.values) v = rng(2, 1);
    const auto fit = arma11_core(s);
    EXPECT_EQ(fit.fitted.start, kStart.plus(1));
    EXPECT_EQ(fit.fitted.size(), 119u);
    EXPECT_EQ(fit.residuals.size(), 119u);
    EXPECT_LT(std::abs(fit.phi), 1.0);
    EXPECT_LT(std::abs(fit.theta), 1.0);
    for (std::size_t i = 0; i < fit.residuals.size(); ++i) EXPECT_NEAR(fit.fitted.values[i] + fit.residuals[i], s.values[i + 1], 1e-12);
}

TEST(Arma11, TooShort) { EXPECT_CODE(TooShort, arma11_core(ramp(10))); }

TEST(WaveletCore, ConstantParentAndLengths) {
    const MonthlySeries c{kStart, std::vector<double>(421, 3.3)};
    for (const char* name : {"db10-L4", "sym5-L5", "haar-L2", "db3-L5", "sym8-L7"}) {
        const auto core = wavelet_core(c, wavelet::parse_spec(name));
        EXPECT_EQ(core.start, c.start);
        ASSERT_EQ(core.size(), c.size());
        for (double v : core.values) EXPECT_NEAR(v, 3.3, 1e-10) << name;
    }
}
