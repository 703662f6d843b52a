#pragma once

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corewave/critical_values.hpp"
#include "corewave/error.hpp"
#include "corewave/generated/critical_values_data.hpp"
#include "corewave/series.hpp"
#include "corewave/stats.hpp"

namespace corewave::econometrics {

/// The table shipped with the library (data/critical_values.txt).
inline std::string_view default_critical_values_text() { return generated::kCriticalValueText; }

inline const CriticalValueTable& default_critical_values() {
    static const CriticalValueTable table = CriticalValueTable::parse(generated::kCriticalValueText);
    return table;
}

struct RegressionResult {
    std::vector<double> coefficients;
    std::vector<double> standard_errors;
    std::vector<double> residuals;
    double r_squared = 0;
    std::size_t nobs = 0;
    /// AR(1) error coefficient when the fit came from quasi-differenced data.
    std::optional<double> rho;
    /// Classical covariance of the coefficients, s^2 (X'X)^-1.
    Eigen::MatrixXd covariance;
    double ssr = 0;
    double sigma2 = 0;

    std::size_t df_resid() const { return nobs - coefficients.size(); }
};

inline constexpr double kMaxConditionNumber = 1e12;

/**
 * Least squares through a column-pivoted Householder QR. R^2 is centred when
 * X carries a constant column (or `add_intercept`, which prepends one),
 * otherwise uncentred.
 */
inline RegressionResult ols(std::span<const double> y, const Eigen::MatrixXd& regressors, bool add_intercept = false) {
    const auto n = static_cast<Eigen::Index>(y.size());
    if (regressors.rows() != n) fail(ErrorCode::DimensionMismatch, "X has " + std::to_string(regressors.rows()) + " rows, y has " + std::to_string(n));
    Eigen::MatrixXd X = regressors;
    if (add_intercept) {
        X.resize(n, regressors.cols() + 1);
        X.col(0).setOnes();
        X.rightCols(regressors.cols()) = regressors;
    }
    const Eigen::Index k = X.cols();
    if (k == 0 || n <= k) fail(ErrorCode::DimensionMismatch, "need more observations than regressors");
    if (!X.allFinite()) fail(ErrorCode::NonFiniteInput, "regressors contain non-finite values");

    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const double rmax = std::abs(R(0, 0));
    const double rmin = std::abs(R(k - 1, k - 1));
    if (!(rmin > 0) || rmax / rmin > kMaxConditionNumber) {
        fail(ErrorCode::RankDeficient, "design matrix is rank deficient or ill-conditioned");
    }

    RegressionResult out;
    const Eigen::VectorXd beta = qr.solve(yv);
    const Eigen::VectorXd resid = yv - X * beta;
    out.nobs = static_cast<std::size_t>(n);
    out.ssr = resid.squaredNorm();
    out.sigma2 = out.ssr / static_cast<double>(n - k);

    // (X'X)^-1 = P R^-1 R^-T P'
    const Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd perm = qr.colsPermutation();
    const Eigen::MatrixXd xtx_inv = perm * (Rinv * Rinv.transpose()) * perm.transpose();
    out.covariance = out.sigma2 * xtx_inv;

    out.coefficients.assign(beta.data(), beta.data() + k);
    out.residuals.assign(resid.data(), resid.data() + n);
    out.standard_errors.resize(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) out.standard_errors[i] = std::sqrt(out.covariance(i, i));

    bool has_constant = false;
    for (Eigen::Index c = 0; c < k && !has_constant; ++c) {
        const double first = X(0, c);
        has_constant = first != 0 && (X.col(c).array() == first).all();
    }
    const double tss = has_constant ? (yv.array() - yv.mean()).matrix().squaredNorm() : yv.squaredNorm();
    out.r_squared = tss > 0 ? std::clamp(1.0 - out.ssr / tss, 0.0, 1.0) : 1.0;
    return out;
}

struct WaldResult {
    double f_statistic = 0;
    double p_value = 1;
    int df_num = 0;
    int df_den = 0;
};

/// F form of the Wald test of R b = r using the classical covariance.
inline WaldResult wald_test(const RegressionResult& fit, const Eigen::MatrixXd& restrictions, const Eigen::VectorXd& targets) {
    const auto k = static_cast<Eigen::Index>(fit.coefficients.size());
    if (restrictions.cols() != k || restrictions.rows() != targets.size()) {
        fail(ErrorCode::DimensionMismatch, "restriction matrix does not match the coefficient vector");
    }
    const Eigen::Map<const Eigen::VectorXd> b(fit.coefficients.data(), k);
    const Eigen::VectorXd gap = restrictions * b - targets;
    const Eigen::MatrixXd middle = restrictions * fit.covariance * restrictions.transpose();
    const double q = static_cast<double>(restrictions.rows());
    WaldResult w;
    w.df_num = static_cast<int>(restrictions.rows());
    w.df_den = static_cast<int>(fit.df_resid());
    w.f_statistic = gap.dot(middle.ldlt().solve(gap)) / q;
    boost::math::fisher_f dist(w.df_num, w.df_den);
    w.p_value = w.f_statistic <= 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, w.f_statistic));
    return w;
}

/// Two-sided p-value of a t-ratio.
inline double t_test_p_value(double t_ratio, double dof) {
    boost::math::students_t dist(dof);
    return 2 * boost::math::cdf(boost::math::complement(dist, std::abs(t_ratio)));
}

enum class DeterministicSpec { no_intercept, intercept };

inline std::string deterministic_name(DeterministicSpec s) {
    return s == DeterministicSpec::intercept ? "intercept" : "no_intercept";
}

/// Augmentation lags: `max_lags` fixed, or searched downward by AIC from it.
struct LagRule {
    enum class Mode { fixed, aic };
    Mode mode = Mode::aic;
    int max_lags = 12;

    static LagRule fixed(int lags) { return LagRule{Mode::fixed, lags}; }
    static LagRule aic(int max_lags = 12) { return LagRule{Mode::aic, max_lags}; }
};

struct UnitRootResult {
    double statistic = 0;
    /// significance level -> critical value (1%, 5%, 10%)
    std::map<double, double> critical_values;
    int lags_used = 0;
    DeterministicSpec spec = DeterministicSpec::intercept;
    TableKind table = TableKind::df_intercept;
    std::size_t nobs = 0;
    /// Approximate lower-tail probability, clamped to [0.001, 0.99].
    double p_value = 1;
    /// Smallest of 1%, 5%, 10% at which the unit root is rejected.
    std::optional<double> reject_at;

    bool rejects(double level) const { return reject_at && *reject_at <= level + 1e-12; }
};

inline constexpr std::array<double, 3> kReportedLevels{0.01, 0.05, 0.10};

namespace detail {

// Regression of dx_t on x_{t-1}, [1], dx_{t-1..t-p} for t = first..n-1.
inline RegressionResult adf_regression(std::span<const double> x, int lags, bool intercept, std::size_t first) {
    const std::size_t n = x.size();
    const std::size_t rows = n - first;
    const Eigen::Index cols = 1 + (intercept ? 1 : 0) + lags;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), cols);
    std::vector<double> y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = first + r;
        y[r] = x[t] - x[t - 1];
        Eigen::Index c = 0;
        X(static_cast<Eigen::Index>(r), c++) = x[t - 1];
        if (intercept) X(static_cast<Eigen::Index>(r), c++) = 1.0;
        for (int l = 1; l <= lags; ++l) X(static_cast<Eigen::Index>(r), c++) = x[t - l] - x[t - l - 1];
    }
    return ols(y, X);
}

inline UnitRootResult unit_root_from_fit(const RegressionResult& fit, int lags, DeterministicSpec spec, TableKind kind,
                                         const CriticalValueTable& table) {
    UnitRootResult out;
    out.statistic = fit.coefficients[0] / fit.standard_errors[0];
    out.lags_used = lags;
    out.spec = spec;
    out.table = kind;
    out.nobs = fit.nobs;
    const int n = static_cast<int>(fit.nobs);
    for (double level : kReportedLevels) out.critical_values[level] = table.quantile(kind, n, level);
    out.p_value = table.p_value(kind, n, out.statistic);
    for (double level : kReportedLevels) {
        if (out.statistic < out.critical_values[level]) {
            out.reject_at = level;
            break;
        }
    }
    return out;
}

inline UnitRootResult adf_with_table(std::span<const double> x, DeterministicSpec spec, LagRule rule, TableKind kind,
                                     const CriticalValueTable& table) {
    const int max_lags = std::max(0, rule.max_lags);
    if (x.size() < static_cast<std::size_t>(max_lags) + 10) {
        fail(ErrorCode::TooShort, "ADF needs at least lags + 10 = " + std::to_string(max_lags + 10) + " observations");
    }
    require_finite(x, "series");
    const bool intercept = spec == DeterministicSpec::intercept;
    int lags = max_lags;
    if (rule.mode == LagRule::Mode::aic) {
        // Common sample for every candidate so the criteria are comparable.
        const std::size_t first = static_cast<std::size_t>(max_lags) + 1;
        double best = std::numeric_limits<double>::infinity();
        for (int p = 0; p <= max_lags; ++p) {
            const auto fit = adf_regression(x, p, intercept, first);
            const double nobs = static_cast<double>(fit.nobs);
            const double aic = nobs * std::log(fit.ssr / nobs) + 2.0 * static_cast<double>(fit.coefficients.size());
            if (aic < best - 1e-12) {
                best = aic;
                lags = p;
            }
        }
    }
    const auto fit = adf_regression(x, lags, intercept, static_cast<std::size_t>(lags) + 1);
    return unit_root_from_fit(fit, lags, spec, kind, table);
}

}  // namespace detail

/**
 * Augmented Dickey-Fuller t-test of a unit root in `series`. The statistic is
 * the t-ratio on x_{t-1}; critical values come from the Dickey-Fuller table
 * for the chosen deterministic terms at the regression's sample size.
 */
inline UnitRootResult adf_test(std::span<const double> series, DeterministicSpec spec, LagRule rule = LagRule::aic(),
                               const CriticalValueTable& table = default_critical_values()) {
    const TableKind kind = spec == DeterministicSpec::intercept ? TableKind::df_intercept : TableKind::df_no_intercept;
    return detail::adf_with_table(series, spec, rule, kind, table);
}

struct CointegrationResult {
    UnitRootResult unit_root;
    RegressionResult first_stage;
    bool deterministic_trend = false;
    /// Residuals were numerically zero: exact linear dependence, no-cointegration rejected.
    bool degenerate = false;
    Window window{};

    bool rejects_no_cointegration(double level) const { return degenerate || unit_root.rejects(level); }
    /// Approximate p-value of the no-cointegration null.
    double p_value() const { return degenerate ? 0.0 : unit_root.p_value; }
};

inline constexpr double kDegenerateResidualVariance = 1e-12;

/**
 * Residual-based (Engle-Granger) test of no cointegration between y and x over
 * their common months: y on [1, (t), x], then ADF without deterministic terms
 * on the residuals against the two-variable Engle-Granger table.
 */
inline CointegrationResult cointegration_test(const MonthlySeries& y, const MonthlySeries& x, bool deterministic_trend,
                                              LagRule rule = LagRule::aic(),
                                              const CriticalValueTable& table = default_critical_values()) {
    const Window w = intersect(window_of(y), window_of(x));
    if (w.empty() || w.length() < 30) fail(ErrorCode::TooShort, "cointegration needs at least 30 common months");
    const auto ys = y.slice(w.first, w.last);
    const auto xs = x.slice(w.first, w.last);
    const auto n = static_cast<Eigen::Index>(ys.size());

    Eigen::MatrixXd X(n, deterministic_trend ? 3 : 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = xs.values[static_cast<std::size_t>(i)];
        if (deterministic_trend) X(i, 2) = static_cast<double>(i);
    }
    CointegrationResult out;
    out.deterministic_trend = deterministic_trend;
    out.window = w;
    out.first_stage = ols(ys.values, X);

    const double resid_var = out.first_stage.ssr / static_cast<double>(n);
    if (resid_var < kDegenerateResidualVariance) {
        out.degenerate = true;
        out.unit_root.statistic = -std::numeric_limits<double>::infinity();
        out.unit_root.spec = DeterministicSpec::no_intercept;
        out.unit_root.table = deterministic_trend ? TableKind::eg_trend : TableKind::eg_intercept;
        out.unit_root.nobs = static_cast<std::size_t>(n);
        out.unit_root.p_value = 0.0;
        out.unit_root.reject_at = kReportedLevels.front();
        return out;
    }
    out.unit_root = detail::adf_with_table(out.first_stage.residuals, DeterministicSpec::no_intercept, rule,
                                           deterministic_trend ? TableKind::eg_trend : TableKind::eg_intercept, table);
    return out;
}

/// core_t - parent_{t+H} for every t where both exist; dated at t.
inline MonthlySeries prediction_errors(const MonthlySeries& core, const MonthlySeries& parent, int horizon) {
    if (horizon < 1) fail(ErrorCode::HorizonTooLarge, "horizon must be at least 1");
    const Window shifted{parent.start.plus(-horizon), parent.last().plus(-horizon)};
    const Window w = intersect(window_of(core), shifted);
    if (w.empty() || w.length() < 2) {
        fail(ErrorCode::HorizonTooLarge, "horizon " + std::to_string(horizon) + " leaves fewer than 2 overlapping months");
    }
    MonthlySeries out{w.first, std::vector<double>(static_cast<std::size_t>(w.length()))};
    for (int i = 0; i < w.length(); ++i) {
        const YearMonth t = w.first.plus(i);
        out.values[static_cast<std::size_t>(i)] = core.at(t) - parent.at(t.plus(horizon));
    }
    return out;
}

/// Sample variance of core_t - parent_{t+H}.
inline double prediction_error_variance(const MonthlySeries& core, const MonthlySeries& parent, int horizon) {
    return stats::variance(prediction_errors(core, parent, horizon).values);
}

struct PredictionTestResult {
    double alpha = 0;
    double alpha_se = 0;
    double beta = 0;
    double beta_se = 0;
    double f_statistic = 0;
    double f_test_prob = 1;
    double r_squared = 0;
    int horizon = 0;
    double rho = 0;
    int iterations = 0;
    std::size_t nobs = 0;
    /// The regression fit without error: no AR(1) correction, and the F-test is
    /// decided by whether the restrictions hold (F = 0, p = 1) or not (F = inf, p = 0).
    bool exact_fit = false;
    /// Months t of the regression sample (before quasi-differencing).
    Window window{};
    RegressionResult fit;
};

/// Relative residual sum of squares (SSR / centred TSS) at or below which a fit counts as exact.
inline constexpr double kExactFitTolerance = 1e-20;

struct CochraneOrcuttOptions {
    int max_iterations = 200;
    double tolerance = 1e-8;
    /// Skip the AR(1) correction: plain OLS on the full sample.
    bool force_rho_zero = false;
};

/**
 * pi_{t+H} - pi_t = alpha + beta (pi_t - core_t) + u_{t+H} with AR(1) errors,
 * by iterated Cochrane-Orcutt. Coefficients, standard errors, R^2 and the
 * joint F-test of {alpha = 0, beta = -1} all come from the final
 * quasi-differenced regression.
 */
inline PredictionTestResult cogley_regression(const MonthlySeries& core, const MonthlySeries& parent, int horizon,
                                              const CochraneOrcuttOptions& opts = {}) {
    if (horizon < 1) fail(ErrorCode::HorizonTooLarge, "horizon must be at least 1");
    const Window shifted{parent.start.plus(-horizon), parent.last().plus(-horizon)};
    const Window w = intersect(intersect(window_of(core), window_of(parent)), shifted);
    if (w.empty() || w.length() < 5) fail(ErrorCode::HorizonTooLarge, "too few months for the prediction regression");

    const auto n = static_cast<std::size_t>(w.length());
    std::vector<double> y(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const YearMonth t = w.first.plus(static_cast<int>(i));
        const double pt = parent.at(t);
        y[i] = parent.at(t.plus(horizon)) - pt;
        x[i] = pt - core.at(t);
    }
    {
        const double m = stats::mean(x);
        double ss = 0;
        for (double v : x) ss += (v - m) * (v - m);
        if (ss / static_cast<double>(n - 1) <= 1e-12) fail(ErrorCode::CoreEqualsParent, "core equals parent; slope is unidentified");
    }

    auto fit_with_rho = [&](double rho, bool transform) {
        const std::size_t first = transform ? 1 : 0;
        const auto rows = static_cast<Eigen::Index>(n - first);
        Eigen::MatrixXd X(rows, 2);
        std::vector<double> ys(n - first);
        for (std::size_t i = first; i < n; ++i) {
            const auto r = static_cast<Eigen::Index>(i - first);
            const double prev_y = transform ? y[i - 1] : 0.0;
            const double prev_x = transform ? x[i - 1] : 0.0;
            ys[i - first] = y[i] - rho * prev_y;
            X(r, 0) = 1.0 - rho;
            X(r, 1) = x[i] - rho * prev_x;
        }
        return ols(ys, X);
    };
    auto ar1_of_residuals = [&](const RegressionResult& fit) {
        const double a = fit.coefficients[0], b = fit.coefficients[1];
        double num = 0, den = 0, prev = y[0] - a - b * x[0];
        for (std::size_t i = 1; i < n; ++i) {
            const double u = y[i] - a - b * x[i];
            num += u * prev;
            den += prev * prev;
            prev = u;
        }
        return den > 0 ? num / den : 0.0;
    };

    PredictionTestResult out;
    out.horizon = horizon;
    out.window = w;
    const RegressionResult plain = fit_with_rho(0.0, false);
    double tss = 0;
    {
        const double m = stats::mean(y);
        for (double v : y) tss += (v - m) * (v - m);
    }
    out.exact_fit = plain.ssr <= kExactFitTolerance * std::max(tss, std::numeric_limits<double>::min());
    if (opts.force_rho_zero || out.exact_fit) {
        out.fit = plain;
        out.rho = 0;
    } else {
        RegressionResult fit = plain;
        double rho = ar1_of_residuals(fit);
        bool converged = false;
        int it = 0;
        for (; it < opts.max_iterations; ++it) {
            fit = fit_with_rho(rho, true);
            const double next = ar1_of_residuals(fit);
            const double delta = std::abs(next - rho);
            rho = next;
            if (delta < opts.tolerance) {
                converged = true;
                ++it;
                break;
            }
        }
        if (!converged) {
            fail(ErrorCode::NonConvergence, "Cochrane-Orcutt did not converge in " + std::to_string(opts.max_iterations) +
                                                " iterations (rho=" + std::to_string(rho) + ")");
        }
        out.fit = fit_with_rho(rho, true);
        out.fit.rho = rho;
        out.rho = rho;
        out.iterations = it;
    }
    out.alpha = out.fit.coefficients[0];
    out.beta = out.fit.coefficients[1];
    out.alpha_se = out.fit.standard_errors[0];
    out.beta_se = out.fit.standard_errors[1];
    out.r_squared = out.fit.r_squared;
    out.nobs = out.fit.nobs;

    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd r(2);
    r << 0.0, -1.0;
    if (out.exact_fit) {
        const double scale = 1.0 + std::abs(out.beta);
        const bool holds = std::abs(out.alpha) <= 1e-8 * scale && std::abs(out.beta + 1.0) <= 1e-8 * scale;
        out.f_statistic = holds ? 0.0 : std::numeric_limits<double>::infinity();
        out.f_test_prob = holds ? 1.0 : 0.0;
        return out;
    }
    const auto wald = wald_test(out.fit, R, r);
    out.f_statistic = wald.f_statistic;
    out.f_test_prob = wald.p_value;
    return out;
}

}  // namespace corewave::econometrics
