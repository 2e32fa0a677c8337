#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "error.hpp"

namespace stprec::survey {

/// Frequency counts of 5-point Likert answers: counts[v-1] = number of
/// respondents who answered v.
struct LikertResponseSet {
    std::string item_text;
    std::array<std::int64_t, 5> counts{};

    std::int64_t total() const
    {
        std::int64_t n = 0;
        for (auto c : counts)
            n += c;
        return n;
    }

    /// Builds from raw answers; every value must be within 1..5.
    static LikertResponseSet from_responses(std::string text, std::span<const int> responses)
    {
        LikertResponseSet out{std::move(text), {}};
        for (int v : responses) {
            if (v < 1 || v > 5)
                throw Error(ErrorCode::validation_failed,
                            "response value " + std::to_string(v) + " outside 1..5");
            ++out.counts[static_cast<std::size_t>(v - 1)];
        }
        return out;
    }
};

/// Half-up rounding at two decimals. The 1e-9 nudge keeps values such as
/// 4.665 (stored as 4.66499...) rounding the way they read in decimal.
inline double round2(double x)
{
    return std::floor(x * 100.0 + 0.5 + 1e-9) / 100.0;
}

/// Σ(value·count)/Σ(count), rounded half-up at 2 decimals. Exact integer
/// arithmetic up to the single rounding step.
inline double weighted_mean(const LikertResponseSet& r)
{
    std::int64_t n = 0;
    std::int64_t sum = 0;
    for (std::size_t i = 0; i < r.counts.size(); ++i) {
        if (r.counts[i] < 0)
            throw Error(ErrorCode::validation_failed, "negative frequency count");
        n += r.counts[i];
        sum += static_cast<std::int64_t>(i + 1) * r.counts[i];
    }
    if (n == 0)
        throw Error(ErrorCode::validation_failed, "weighted mean of an empty response set");
    // floor(100·sum/n + 1/2) computed as floor((200·sum + n) / 2n)
    std::int64_t hundredths = (200 * sum + n) / (2 * n);
    return static_cast<double>(hundredths) / 100.0;
}

/// Unweighted mean of component means, rounded half-up at 2 decimals.
inline double composite_mean(std::span<const double> component_means)
{
    if (component_means.empty())
        throw Error(ErrorCode::validation_failed, "composite mean of an empty list");
    long double sum = 0.0L;
    for (double m : component_means)
        sum += m;
    return round2(static_cast<double>(sum / static_cast<long double>(component_means.size())));
}

enum class ScaleKind { acceptance, occurrence };

struct Band {
    double lower;
    double upper;  // exclusive, except the top band which closes at 5.00
    std::string label;
};

struct InterpretationScale {
    ScaleKind kind;
    std::array<Band, 5> bands;  // ascending
};

inline InterpretationScale acceptance_scale()
{
    return {ScaleKind::acceptance,
            {{{1.00, 1.81, "Not Acceptable"},
              {1.81, 2.61, "Slightly Acceptable"},
              {2.61, 3.41, "Acceptable"},
              {3.41, 4.21, "Moderately Acceptable"},
              {4.21, 5.00, "Highly Acceptable"}}}};
}

inline InterpretationScale occurrence_scale()
{
    return {ScaleKind::occurrence,
            {{{1.00, 1.81, "Never Encountered"},
              {1.81, 2.61, "Rarely Encountered"},
              {2.61, 3.41, "Sometimes Encountered"},
              {3.41, 4.21, "Often Encountered"},
              {4.21, 5.00, "Always Encountered"}}}};
}

inline InterpretationScale scale_by_name(std::string_view name)
{
    if (name == "acceptance")
        return acceptance_scale();
    if (name == "occurrence")
        return occurrence_scale();
    throw Error(ErrorCode::validation_failed, "unknown scale: " + std::string(name));
}

inline const std::string& interpret(double mean, const InterpretationScale& scale)
{
    if (!(mean >= 1.0 && mean <= 5.0))
        throw Error(ErrorCode::validation_failed, "mean outside [1.00, 5.00]");
    for (std::size_t i = 0; i + 1 < scale.bands.size(); ++i)
        if (mean < scale.bands[i].upper)
            return scale.bands[i].label;
    return scale.bands.back().label;
}

struct RankedItem {
    std::string text;
    double mean = 0.0;
    int rank = 0;
};

/// Competition ranking on mean, highest first. Ties share the smaller rank
/// and keep input order.
inline std::vector<RankedItem> rank_by_mean(std::span<const std::pair<std::string, double>> items)
{
    std::vector<RankedItem> out;
    out.reserve(items.size());
    for (const auto& [text, mean] : items)
        out.push_back({text, mean, 0});
    std::stable_sort(out.begin(), out.end(),
                     [](const RankedItem& a, const RankedItem& b) { return a.mean > b.mean; });
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i > 0 && out[i].mean == out[i - 1].mean)
            out[i].rank = out[i - 1].rank;
        else
            out[i].rank = static_cast<int>(i) + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tabulation: the shape of a per-criterion results table.

struct TableRow {
    std::string text;
    double mean = 0.0;
    std::string interpretation;
    int rank = 0;
};

struct SurveyTable {
    std::vector<TableRow> rows;  // in rank order
    double composite = 0.0;
    std::string composite_interpretation;
};

inline SurveyTable tabulate(std::span<const LikertResponseSet> items,
                            const InterpretationScale& scale)
{
    if (items.empty())
        throw Error(ErrorCode::validation_failed, "survey has no items");
    std::vector<std::pair<std::string, double>> means;
    std::vector<double> values;
    for (const auto& item : items) {
        double m = weighted_mean(item);
        means.emplace_back(item.item_text, m);
        values.push_back(m);
    }
    SurveyTable table;
    for (auto& ranked : rank_by_mean(means))
        table.rows.push_back({ranked.text, ranked.mean, interpret(ranked.mean, scale), ranked.rank});
    table.composite = composite_mean(values);
    table.composite_interpretation = interpret(table.composite, scale);
    return table;
}

} // namespace stprec::survey
