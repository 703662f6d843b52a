#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corewave/error.hpp"

namespace corewave {

/// A calendar month. Ordered, and convertible to a linear month index.
struct YearMonth {
    int year = 1900;
    int month = 1;  // 1..12

    constexpr int index() const { return year * 12 + (month - 1); }
    static constexpr YearMonth from_index(int idx) {
        return YearMonth{idx / 12, idx % 12 + 1};
    }
    constexpr YearMonth plus(int months) const { return from_index(index() + months); }

    constexpr auto operator<=>(const YearMonth& other) const { return index() <=> other.index(); }
    constexpr bool operator==(const YearMonth& other) const = default;

    bool valid() const { return year >= 1900 && year <= 2100 && month >= 1 && month <= 12; }

    /// "YYYY-MM".
    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
        return buf;
    }

    /// Accepts "YYYY-MM" or "YYYY-MM-DD"; the day is ignored.
    static std::optional<YearMonth> parse(std::string_view text) {
        if (text.size() != 7 && text.size() != 10) return std::nullopt;
        auto digits = [&](std::size_t from, std::size_t count) -> std::optional<int> {
            int v = 0;
            for (std::size_t i = from; i < from + count; ++i) {
                if (text[i] < '0' || text[i] > '9') return std::nullopt;
                v = v * 10 + (text[i] - '0');
            }
            return v;
        };
        if (text[4] != '-') return std::nullopt;
        auto y = digits(0, 4);
        auto m = digits(5, 2);
        if (!y || !m) return std::nullopt;
        if (text.size() == 10) {
            if (text[7] != '-') return std::nullopt;
            auto d = digits(8, 2);
            if (!d || *d < 1 || *d > 31) return std::nullopt;
        }
        YearMonth ym{*y, *m};
        if (!ym.valid()) return std::nullopt;
        return ym;
    }
};

/// Months from `a` to `b` (b - a).
constexpr int months_between(YearMonth a, YearMonth b) { return b.index() - a.index(); }

/// Contiguous monthly series. `values[i]` belongs to `start.plus(i)`.
struct MonthlySeries {
    YearMonth start;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    /// Last month covered. Undefined for an empty series.
    YearMonth last() const { return start.plus(static_cast<int>(values.size()) - 1); }

    bool covers(YearMonth ym) const {
        return !values.empty() && ym >= start && ym <= last();
    }
    double at(YearMonth ym) const {
        if (!covers(ym)) fail(ErrorCode::Misaligned, "month " + ym.to_string() + " outside series");
        return values[static_cast<std::size_t>(months_between(start, ym))];
    }

    /// Sub-series over [from, to], both inclusive; must be covered.
    MonthlySeries slice(YearMonth from, YearMonth to) const {
        if (from > to || !covers(from) || !covers(to)) {
            fail(ErrorCode::Misaligned, "slice " + from.to_string() + ".." + to.to_string() +
                                            " outside series " + start.to_string() + ".." +
                                            (empty() ? start.to_string() : last().to_string()));
        }
        auto b = values.begin() + months_between(start, from);
        auto e = values.begin() + months_between(start, to) + 1;
        return MonthlySeries{from, std::vector<double>(b, e)};
    }

    std::span<const double> view() const { return values; }
};

inline void require_finite(std::span<const double> xs, std::string_view what) {
    for (double x : xs) {
        if (!std::isfinite(x)) fail(ErrorCode::NonFiniteInput, std::string(what) + " contains a non-finite value");
    }
}

/// A closed range of months.
struct Window {
    YearMonth first;
    YearMonth last;

    int length() const { return months_between(first, last) + 1; }
    bool empty() const { return last < first; }
    std::string to_string() const { return first.to_string() + ".." + last.to_string(); }
    bool operator==(const Window&) const = default;
};

inline Window window_of(const MonthlySeries& s) { return Window{s.start, s.last()}; }

inline Window intersect(const Window& a, const Window& b) {
    return Window{std::max(a.first, b.first), std::min(a.last, b.last)};
}

}  // namespace corewave
