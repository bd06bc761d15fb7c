#pragma once

#include "lumpcheck/errors.hpp"
#include "lumpcheck/interval.hpp"
#include "lumpcheck/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lumpcheck {

inline double inf_distance(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

/// Largest distance from `x` to any of the rows.
inline double max_distance(std::span<const double> x, std::span<const Vector> rows) {
    double d = 0.0;
    for (const auto& r : rows) d = std::max(d, inf_distance(x, r));
    return d;
}

/// Error of using row j as the representative of its block: max over the other rows.
inline double representative_error(std::span<const Vector> rows, std::size_t j) {
    if (j >= rows.size()) throw IndexOutOfRange(j, rows.size());
    double e = 0.0;
    for (std::size_t l = 0; l < rows.size(); ++l)
        if (l != j) e = std::max(e, inf_distance(rows[j], rows[l]));
    return e;
}

/// beta: half the infinity-norm diameter of the row set; no vector can do better.
inline double optimal_error(std::span<const Vector> rows) {
    double diameter = 0.0;
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t l = j + 1; l < rows.size(); ++l)
            diameter = std::max(diameter, inf_distance(rows[j], rows[l]));
    return 0.5 * diameter;
}

/// Componentwise [min, max] over the rows.
inline IntervalRow envelope(std::span<const Vector> rows) {
    if (rows.empty()) throw IndexOutOfRange(0, 0);
    IntervalRow env(rows.front(), rows.front());
    for (const auto& r : rows) {
        if (r.size() != env.size()) throw DimensionMismatch(env.size(), r.size());
        for (std::size_t l = 0; l < r.size(); ++l) {
            env.lower[l] = std::min(env.lower[l], r[l]);
            env.upper[l] = std::max(env.upper[l], r[l]);
        }
    }
    return env;
}

/// Box [v - radius, u + radius] intersected with [0,1]^m. Clipping to the unit cube leaves the
/// set of stochastic members unchanged.
inline IntervalRow expanded_box(const IntervalRow& env, double radius) {
    IntervalRow box = env;
    for (std::size_t l = 0; l < env.size(); ++l) {
        box.lower[l] = std::clamp(env.upper[l] - radius, 0.0, 1.0);
        box.upper[l] = std::clamp(env.lower[l] + radius, 0.0, 1.0);
        // v - beta and u + beta coincide when beta is attained on coordinate l.
        if (box.lower[l] > box.upper[l] && box.lower[l] - box.upper[l] <= kEqualityTolerance)
            box.lower[l] = box.upper[l];
    }
    return box;
}

/// The exact set of stochastic vectors whose worst distance to the rows equals beta.
inline IntervalRow optimal_set(std::span<const Vector> rows) {
    return expanded_box(envelope(rows), optimal_error(rows));
}

/// Fallback when no stochastic vector attains beta.
struct GammaRelaxation {
    double gamma = 0.0;       ///< max{(1 - sum u)/m, (sum v - 1)/m}
    double gamma_prime = 0.0; ///< gamma - beta
    IntervalRow relaxed;      ///< [v - gamma, u + gamma], non-empty
    Vector r_star;            ///< stochastic vector with error eps_star <= gamma
    double eps_star = 0.0;
};

inline GammaRelaxation gamma_relaxation(std::span<const Vector> rows, double beta,
                                        const IntervalRow& env) {
    if (!is_empty(expanded_box(env, beta)))
        throw NotApplicable("the optimal set is non-empty; no relaxation needed");
    const auto m = static_cast<double>(env.size());
    const double sum_lo = vector_sum(env.lower);
    const double sum_hi = vector_sum(env.upper);

    GammaRelaxation g;
    g.gamma = std::max((1.0 - sum_lo) / m, (sum_hi - 1.0) / m);
    g.gamma_prime = g.gamma - beta;

    // The box centred on the rows is either entirely above or entirely below the simplex.
    Vector r(env.size());
    const bool above = sum_hi - m * beta > 1.0;
    for (std::size_t l = 0; l < env.size(); ++l)
        r[l] = above ? env.upper[l] - beta - g.gamma_prime : env.lower[l] + beta + g.gamma_prime;

    g.relaxed = expanded_box(env, g.gamma);
    if (is_empty(g.relaxed)) {
        // Clipping at 0 or 1 can push the closed-form radius short of the simplex; grow the
        // box until it touches.
        double lo = g.gamma, hi = 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            (is_empty(expanded_box(env, mid)) ? lo : hi) = mid;
        }
        g.gamma = hi;
        g.gamma_prime = g.gamma - beta;
        g.relaxed = expanded_box(env, g.gamma);
    }
    if (is_stochastic(r) && contains(g.relaxed, r)) {
        g.r_star = std::move(r);
    } else {
        g.r_star = vertices(g.relaxed).front();
    }
    g.eps_star = max_distance(g.r_star, rows);
    return g;
}

/// Lumped chain of the standard approach: block i moves like its representative.
struct LumpedChain {
    LabeledMarkovChain chain;
    std::vector<State> representatives;
    double epsilon = 0.0;
};

/// Lumping error of a representative choice: worst representative error over blocks.
inline double lumping_error(const LabeledMarkovChain& chain, const LabelPartition& partition,
                            std::span<const State> representatives) {
    double eps = 0.0;
    for (std::size_t b = 0; b < partition.size(); ++b) {
        const auto& members = partition.block(b);
        auto pos = std::find(members.begin(), members.end(), representatives[b]);
        const auto rows = abstraction_rows(chain, partition, b);
        eps = std::max(eps, representative_error(rows, static_cast<std::size_t>(pos - members.begin())));
    }
    return eps;
}

/// Standard approximate-bisimulation lumping. Without explicit representatives, each block
/// takes the state with the smallest representative error (lowest index on ties).
inline LumpedChain build_standard_abstraction(const LabeledMarkovChain& chain,
                                              const LabelPartition& partition,
                                              std::optional<std::vector<State>> representatives = {}) {
    const std::size_t m = partition.size();
    LumpedChain out;
    if (representatives) {
        if (representatives->size() != m)
            throw InvalidRepresentative("expected one representative per block (" + std::to_string(m) + ")");
        for (std::size_t b = 0; b < m; ++b) {
            const State s = (*representatives)[b];
            if (s >= chain.size() || partition.block_of(s) != b)
                throw InvalidRepresentative("representative " + std::to_string(b) +
                                            " is not a member of block " + partition.block_name(b));
        }
        out.representatives = *representatives;
    } else {
        for (std::size_t b = 0; b < m; ++b) {
            const auto rows = abstraction_rows(chain, partition, b);
            std::size_t best = 0;
            double best_err = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < rows.size(); ++j) {
                const double e = representative_error(rows, j);
                if (e < best_err) {
                    best_err = e;
                    best = j;
                }
            }
            out.representatives.push_back(partition.block(b)[best]);
        }
    }
    out.epsilon = lumping_error(chain, partition, out.representatives);

    RawModel raw;
    raw.states = partition.block_names();
    for (std::size_t b = 0; b < m; ++b) {
        raw.labels.emplace_back(partition.block_label(b));
        const auto rows = abstraction_rows(chain, partition, b);
        const auto& members = partition.block(b);
        auto pos = std::find(members.begin(), members.end(), out.representatives[b]);
        raw.matrix.push_back(rows[static_cast<std::size_t>(pos - members.begin())]);
    }
    raw.initial = raw.states[partition.block_of(chain.initial_state())];
    if (chain.has_explicit_distribution()) {
        Vector p0(m, 0.0);
        for (State s = 0; s < chain.size(); ++s) p0[partition.block_of(s)] += chain.initial_distribution()[s];
        raw.initial_distribution = std::move(p0);
    }
    out.chain = validate_model(raw);
    return out;
}

/// Per-block record of the interval construction.
struct BlockAbstraction {
    std::vector<Vector> rows;
    double beta = 0.0;
    IntervalRow envelope;
    IntervalRow optimal_set;
    CardinalityClass optimal_class;
    std::optional<GammaRelaxation> gamma;
    IntervalRow chosen_row;
    double xi = 0.0;
};

inline BlockAbstraction abstract_block(std::vector<Vector> rows) {
    BlockAbstraction block;
    block.beta = optimal_error(rows);
    block.envelope = envelope(rows);
    block.optimal_set = expanded_box(block.envelope, block.beta);
    block.optimal_class = classify(block.optimal_set);
    if (!block.optimal_class.empty()) {
        block.chosen_row = block.optimal_set;
        block.xi = block.beta;
    } else {
        block.gamma = gamma_relaxation(rows, block.beta, block.envelope);
        block.chosen_row = tighten(block.gamma->relaxed);
        block.xi = block.gamma->gamma;
    }
    block.rows = std::move(rows);
    return block;
}

/// Shared shape of the abstract models: one abstract state per partition block.
struct BlockStructure {
    std::vector<std::string> names;
    std::vector<LabelSet> labels;
    std::vector<std::vector<std::string>> members;
    std::size_t initial = 0;

    std::size_t size() const noexcept { return names.size(); }
    std::size_t index_of(const std::string& name) const {
        for (std::size_t b = 0; b < names.size(); ++b)
            if (names[b] == name) return b;
        throw UnknownState(name);
    }

    static BlockStructure from(const LabeledMarkovChain& chain, const LabelPartition& partition) {
        BlockStructure s;
        s.names = partition.block_names();
        s.labels = partition.block_labels();
        for (const auto& block : partition.blocks()) {
            auto& ids = s.members.emplace_back();
            for (State q : block) ids.push_back(chain.id(q));
        }
        s.initial = partition.block_of(chain.initial_state());
        return s;
    }
};

/// Interval MDP abstraction with its per-block one-step errors xi.
struct Imdpa {
    BlockStructure blocks;
    std::vector<BlockAbstraction> details; ///< empty when deserialized
    IntervalMatrix intervals;
    Vector xi;
};

inline Imdpa build_imdpa(const LabeledMarkovChain& chain, const LabelPartition& partition) {
    Imdpa out;
    out.blocks = BlockStructure::from(chain, partition);
    std::vector<IntervalRow> rows;
    for (std::size_t b = 0; b < partition.size(); ++b) {
        out.details.push_back(abstract_block(abstraction_rows(chain, partition, b)));
        rows.push_back(out.details.back().chosen_row);
        out.xi.push_back(out.details.back().xi);
    }
    out.intervals = IntervalMatrix(std::move(rows));
    return out;
}

/// Finite-action MDP: each block chooses among the vertices of its interval row.
struct Mdpa {
    BlockStructure blocks;
    std::vector<std::vector<Vector>> actions;
    Vector xi;

    std::size_t size() const noexcept { return actions.size(); }
};

inline Mdpa imdpa_to_mdpa(const Imdpa& imdpa) {
    Mdpa out;
    out.blocks = imdpa.blocks;
    out.xi = imdpa.xi;
    for (const auto& row : imdpa.intervals.rows()) out.actions.push_back(vertices(row));
    return out;
}

} // namespace lumpcheck
