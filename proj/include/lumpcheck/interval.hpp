#pragma once

#include "lumpcheck/errors.hpp"
#include "lumpcheck/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace lumpcheck {

/// Transition set: every stochastic x with lower <= x <= upper componentwise.
struct IntervalRow {
    Vector lower;
    Vector upper;

    IntervalRow() = default;
    IntervalRow(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size()) throw DimensionMismatch(lower.size(), upper.size());
    }
    /// Degenerate row holding a single point.
    static IntervalRow point(const Vector& x) { return IntervalRow(x, x); }

    std::size_t size() const noexcept { return lower.size(); }
    bool operator==(const IntervalRow&) const = default;
};

struct CardinalityClass {
    enum class Kind { Empty, Singleton, Infinite };
    Kind kind = Kind::Empty;
    /// Populated for Singleton only.
    Vector member;

    bool empty() const noexcept { return kind == Kind::Empty; }
    bool singleton() const noexcept { return kind == Kind::Singleton; }
    bool infinite() const noexcept { return kind == Kind::Infinite; }
};

inline const char* to_string(CardinalityClass::Kind kind) {
    switch (kind) {
    case CardinalityClass::Kind::Empty: return "Empty";
    case CardinalityClass::Kind::Singleton: return "Singleton";
    case CardinalityClass::Kind::Infinite: return "Infinite";
    }
    return "?";
}

/// (u <= v) and (sum u <= 1 <= sum v), each with 1e-12 slack.
inline bool is_empty(const IntervalRow& row) {
    for (std::size_t j = 0; j < row.size(); ++j)
        if (row.lower[j] > row.upper[j] + kEqualityTolerance) return true;
    return vector_sum(row.lower) > 1.0 + kEqualityTolerance ||
           vector_sum(row.upper) < 1.0 - kEqualityTolerance;
}

/// Hartfiel's tight interval algorithm. The result holds exactly the same stochastic vectors
/// and every endpoint is attained by one of them.
inline IntervalRow tighten(const IntervalRow& row) {
    if (is_empty(row)) throw EmptyInterval();
    const std::size_t m = row.size();
    const double sum_lo = vector_sum(row.lower);
    const double sum_hi = vector_sum(row.upper);
    IntervalRow out = row;
    for (std::size_t i = 0; i < m; ++i) {
        const double others_hi = sum_hi - row.upper[i];
        const double others_lo = sum_lo - row.lower[i];
        // Bounds never cross: a row whose sums touch 1 within the slack collapses to that endpoint.
        if (row.lower[i] + others_hi < 1.0 - kEqualityTolerance)
            out.lower[i] = std::min(1.0 - others_hi, row.upper[i]);
        if (row.upper[i] + others_lo > 1.0 + kEqualityTolerance)
            out.upper[i] = std::max(1.0 - others_lo, row.lower[i]);
        if (out.lower[i] > out.upper[i]) out.lower[i] = out.upper[i] = 0.5 * (out.lower[i] + out.upper[i]);
    }
    return out;
}

/// Number of coordinates strictly inside their interval (1e-12 slack).
inline std::size_t free_elements(const IntervalRow& row, std::span<const double> x) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < row.size(); ++i)
        if (row.lower[i] + kEqualityTolerance < x[i] && x[i] < row.upper[i] - kEqualityTolerance) ++count;
    return count;
}

/// Empty, a single stochastic vector, or uncountably many.
inline CardinalityClass classify(const IntervalRow& row) {
    if (is_empty(row)) return {};
    const IntervalRow tight = tighten(row);
    if (std::abs(vector_sum(tight.lower) - 1.0) <= kEqualityTolerance)
        return {CardinalityClass::Kind::Singleton, tight.lower};
    if (std::abs(vector_sum(tight.upper) - 1.0) <= kEqualityTolerance)
        return {CardinalityClass::Kind::Singleton, tight.upper};

    std::size_t free_count = 0, free_index = 0;
    for (std::size_t i = 0; i < tight.size(); ++i) {
        if (tight.upper[i] - tight.lower[i] > kEqualityTolerance) {
            ++free_count;
            free_index = i;
        }
    }
    if (free_count <= 1) {
        Vector x = tight.lower;
        x[free_index] = 0.0;
        x[free_index] = std::clamp(1.0 - vector_sum(x), tight.lower[free_index], tight.upper[free_index]);
        return {CardinalityClass::Kind::Singleton, std::move(x)};
    }
    return {CardinalityClass::Kind::Infinite, {}};
}

inline bool contains(const IntervalRow& row, std::span<const double> x) {
    if (x.size() != row.size()) throw DimensionMismatch(row.size(), x.size());
    if (std::abs(vector_sum(x) - 1.0) > kStochasticTolerance) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < -kEqualityTolerance) return false;
        if (x[i] < row.lower[i] - kEqualityTolerance || x[i] > row.upper[i] + kEqualityTolerance)
            return false;
    }
    return true;
}

namespace detail {

inline bool approx_equal(std::span<const double> a, std::span<const double> b, double tol) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

} // namespace detail

/// Vertices of the polytope {x stochastic, lower <= x <= upper}.
///
/// A stochastic x in a tight row is a vertex iff it has at most one free element, so every
/// vertex fixes all but one coordinate at an endpoint and completes the remaining one. Runs
/// on the tightened row; the result is duplicate-free and sorted lexicographically.
inline std::vector<Vector> vertices(const IntervalRow& row) {
    const IntervalRow tight = tighten(row);
    const auto cls = classify(tight);
    if (cls.singleton()) return {cls.member};

    const std::size_t m = tight.size();
    std::vector<std::size_t> open;
    for (std::size_t j = 0; j < m; ++j)
        if (tight.upper[j] - tight.lower[j] > kEqualityTolerance) open.push_back(j);

    std::vector<Vector> out;
    auto add = [&](Vector x) {
        for (const auto& v : out)
            if (detail::approx_equal(v, x, kEqualityTolerance)) return;
        out.push_back(std::move(x));
    };

    Vector x(m);
    for (std::size_t free : open) {
        // Walk every lower/upper assignment of the other open coordinates.
        std::vector<std::size_t> others;
        for (std::size_t j : open)
            if (j != free) others.push_back(j);
        const std::size_t combos = std::size_t{1} << others.size();
        for (std::size_t mask = 0; mask < combos; ++mask) {
            x = tight.lower;
            for (std::size_t k = 0; k < others.size(); ++k)
                if (mask & (std::size_t{1} << k)) x[others[k]] = tight.upper[others[k]];
            x[free] = 0.0;
            const double rest = 1.0 - vector_sum(x);
            if (rest < tight.lower[free] - kEqualityTolerance || rest > tight.upper[free] + kEqualityTolerance)
                continue;
            x[free] = std::clamp(rest, tight.lower[free], tight.upper[free]);
            add(x);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Square matrix of non-empty interval rows.
class IntervalMatrix {
  public:
    IntervalMatrix() = default;
    explicit IntervalMatrix(std::vector<IntervalRow> rows) : rows_(std::move(rows)) {
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (rows_[i].size() != rows_.size()) throw DimensionMismatch(rows_.size(), rows_[i].size());
            if (is_empty(rows_[i])) throw EmptyInterval();
        }
    }
    std::size_t size() const noexcept { return rows_.size(); }
    const IntervalRow& row(std::size_t i) const {
        if (i >= rows_.size()) throw IndexOutOfRange(i, rows_.size());
        return rows_[i];
    }
    const std::vector<IntervalRow>& rows() const noexcept { return rows_; }

  private:
    std::vector<IntervalRow> rows_;
};

} // namespace lumpcheck
