#pragma once

#include "lumpcheck/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lumpcheck {

using State = std::size_t;
using Vector = std::vector<double>;
/// A label is a set of atomic propositions.
using LabelSet = std::set<std::string>;

inline constexpr double kStochasticTolerance = 1e-9;
inline constexpr double kEqualityTolerance = 1e-12;

inline double vector_sum(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0);
}

inline bool is_stochastic(std::span<const double> x, double tol = kStochasticTolerance) {
    for (double v : x)
        if (v < -kEqualityTolerance || v > 1.0 + kEqualityTolerance) return false;
    return std::abs(vector_sum(x) - 1.0) <= tol;
}

inline std::string label_to_string(const LabelSet& label) {
    std::string out = "{";
    bool first = true;
    for (const auto& p : label) {
        if (!first) out += ",";
        out += p;
        first = false;
    }
    return out + "}";
}

/// Unvalidated model description, as read from a model file.
struct RawModel {
    std::vector<std::string> states;
    std::vector<std::optional<LabelSet>> labels;
    std::vector<std::vector<double>> matrix;
    std::string initial;
    std::optional<Vector> initial_distribution;
};

/// Finite labelled Markov chain with a row-stochastic transition matrix.
///
/// Instances are only produced by validate_model and are immutable afterwards.
class LabeledMarkovChain {
  public:
    std::size_t size() const noexcept { return ids_.size(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::string& id(State s) const { return ids_.at(s); }

    State index_of(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw UnknownState(id);
        return it->second;
    }
    bool contains(const std::string& id) const { return index_.count(id) != 0; }

    const LabelSet& label(State s) const {
        check(s);
        return labels_[s];
    }
    const std::vector<LabelSet>& labels() const noexcept { return labels_; }

    double prob(State from, State to) const {
        check(from);
        check(to);
        return matrix_[from][to];
    }
    const Vector& row(State s) const {
        check(s);
        return matrix_[s];
    }
    const std::vector<Vector>& matrix() const noexcept { return matrix_; }

    State initial_state() const noexcept { return initial_; }
    /// p0; a point mass on the initial state unless one was supplied.
    const Vector& initial_distribution() const noexcept { return initial_distribution_; }
    bool has_explicit_distribution() const noexcept { return explicit_distribution_; }

    void check(State s) const {
        if (s >= ids_.size()) throw UnknownState("#" + std::to_string(s));
    }

  private:
    friend LabeledMarkovChain validate_model(const RawModel& raw);

    std::vector<std::string> ids_;
    std::unordered_map<std::string, State> index_;
    std::vector<LabelSet> labels_;
    std::vector<Vector> matrix_;
    State initial_ = 0;
    Vector initial_distribution_;
    bool explicit_distribution_ = false;
};

/// Enforces the chain invariants and builds an immutable chain.
inline LabeledMarkovChain validate_model(const RawModel& raw) {
    const std::size_t n = raw.states.size();
    if (n == 0) throw InvalidModel("model has no states");
    LabeledMarkovChain chain;
    chain.ids_ = raw.states;
    for (State s = 0; s < n; ++s) {
        if (!chain.index_.emplace(raw.states[s], s).second)
            throw InvalidModel("duplicate state id '" + raw.states[s] + "'");
    }
    if (raw.labels.size() != n)
        throw MissingLabel(raw.labels.size() < n ? raw.states[raw.labels.size()] : raw.states.back());
    for (State s = 0; s < n; ++s) {
        if (!raw.labels[s]) throw MissingLabel(raw.states[s]);
        chain.labels_.push_back(*raw.labels[s]);
    }
    if (raw.matrix.size() != n)
        throw InvalidModel("matrix has " + std::to_string(raw.matrix.size()) + " rows, expected " +
                           std::to_string(n));
    for (State s = 0; s < n; ++s) {
        const auto& row = raw.matrix[s];
        if (row.size() != n)
            throw InvalidModel("matrix row " + std::to_string(s) + " has " +
                               std::to_string(row.size()) + " entries, expected " +
                               std::to_string(n));
        for (State t = 0; t < n; ++t) {
            if (!(row[t] >= 0.0 && row[t] <= 1.0)) throw NegativeEntry(s, t, row[t]);
        }
        const double sum = vector_sum(row);
        if (std::abs(sum - 1.0) > kStochasticTolerance) throw NonStochasticRow(s, sum);
    }
    chain.matrix_ = raw.matrix;
    chain.initial_ = chain.index_of(raw.initial);
    if (raw.initial_distribution) {
        const auto& p0 = *raw.initial_distribution;
        if (p0.size() != n)
            throw InvalidModel("initial distribution has " + std::to_string(p0.size()) +
                               " entries, expected " + std::to_string(n));
        for (double v : p0)
            if (!(v >= 0.0)) throw InvalidModel("initial distribution has a negative entry");
        if (std::abs(vector_sum(p0) - 1.0) > kStochasticTolerance)
            throw InvalidModel("initial distribution does not sum to 1");
        chain.initial_distribution_ = p0;
        chain.explicit_distribution_ = true;
    } else {
        chain.initial_distribution_.assign(n, 0.0);
        chain.initial_distribution_[chain.initial_] = 1.0;
    }
    return chain;
}

/// A finite path whose consecutive transitions all have positive probability.
class Path {
  public:
    Path(const LabeledMarkovChain& chain, std::vector<State> states) : states_(std::move(states)) {
        if (states_.empty()) throw LengthMismatch("a path has at least one state");
        for (State s : states_) chain.check(s);
        for (std::size_t i = 0; i + 1 < states_.size(); ++i) {
            if (!(chain.prob(states_[i], states_[i + 1]) > 0.0))
                throw InvalidModel("transition " + chain.id(states_[i]) + " -> " +
                                   chain.id(states_[i + 1]) + " has zero probability");
        }
    }
    Path(const LabeledMarkovChain& chain, const std::vector<std::string>& ids)
        : Path(chain, resolve(chain, ids)) {}

    std::span<const State> states() const noexcept { return states_; }
    std::size_t length() const noexcept { return states_.size(); }

  private:
    static std::vector<State> resolve(const LabeledMarkovChain& chain,
                                      const std::vector<std::string>& ids) {
        std::vector<State> out;
        out.reserve(ids.size());
        for (const auto& id : ids) out.push_back(chain.index_of(id));
        return out;
    }
    std::vector<State> states_;
};

/// tau: product of the transition probabilities along a state sequence (1 for one state).
inline double path_probability(const LabeledMarkovChain& chain, std::span<const State> states) {
    for (State s : states) chain.check(s);
    double p = 1.0;
    for (std::size_t i = 0; i + 1 < states.size(); ++i) p *= chain.prob(states[i], states[i + 1]);
    return p;
}

inline double path_probability(const LabeledMarkovChain& chain, const Path& path) {
    return path_probability(chain, path.states());
}

/// Mass moved from `s` into the state set `target` in one step.
inline double block_probability(const LabeledMarkovChain& chain, State s,
                                std::span<const State> target) {
    chain.check(s);
    double p = 0.0;
    for (State q : target) p += chain.prob(s, q);
    return p;
}

/// Set of label sequences of a common length k+1.
class TraceSet {
  public:
    using Trace = std::vector<LabelSet>;

    TraceSet() = default;
    explicit TraceSet(std::vector<Trace> traces) {
        for (auto& t : traces) insert(std::move(t));
    }

    void insert(Trace trace) {
        if (trace.empty()) throw LengthMismatch("a trace has at least one label");
        if (!traces_.empty() && traces_.begin()->size() != trace.size())
            throw LengthMismatch("trace of length " + std::to_string(trace.size()) +
                                 " in a set of traces of length " +
                                 std::to_string(traces_.begin()->size()));
        traces_.insert(std::move(trace));
    }

    /// Common trace length k+1 (0 for the empty set).
    std::size_t length() const noexcept { return traces_.empty() ? 0 : traces_.begin()->size(); }
    std::size_t size() const noexcept { return traces_.size(); }
    bool empty() const noexcept { return traces_.empty(); }
    auto begin() const { return traces_.begin(); }
    auto end() const { return traces_.end(); }

  private:
    std::set<Trace> traces_;
};

/// Probability that the chain started in `start` emits one of the traces.
///
/// Forward layers over label-consistent states: a trace whose first label differs from
/// L(start) contributes nothing.
inline double trace_set_probability_from(const LabeledMarkovChain& chain, State start,
                                         const TraceSet& traces) {
    chain.check(start);
    const std::size_t n = chain.size();
    double total = 0.0;
    for (const auto& trace : traces) {
        if (chain.label(start) != trace.front()) continue;
        Vector layer(n, 0.0), next(n);
        layer[start] = 1.0;
        for (std::size_t t = 1; t < trace.size(); ++t) {
            std::fill(next.begin(), next.end(), 0.0);
            for (State s = 0; s < n; ++s) {
                if (layer[s] == 0.0) continue;
                const Vector& row = chain.row(s);
                for (State q = 0; q < n; ++q)
                    if (row[q] != 0.0 && chain.label(q) == trace[t]) next[q] += layer[s] * row[q];
            }
            layer.swap(next);
        }
        total += vector_sum(layer);
    }
    return total;
}

/// phi(s0, T) = p0(s0) * sum over traces and matching paths of tau.
inline double trace_set_probability(const LabeledMarkovChain& chain, const TraceSet& traces) {
    const State s0 = chain.initial_state();
    return chain.initial_distribution()[s0] * trace_set_probability_from(chain, s0, traces);
}

/// Ordered label-consistent partition of the state space.
class LabelPartition {
  public:
    /// Validates an explicit partition (disjoint, covering, label-consistent blocks).
    LabelPartition(const LabeledMarkovChain& chain, std::vector<std::vector<State>> blocks)
        : blocks_(std::move(blocks)), block_of_(chain.size(), kNone) {
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            if (blocks_[b].empty()) throw InvalidPartition("block " + std::to_string(b) + " is empty");
            for (State s : blocks_[b]) {
                chain.check(s);
                if (block_of_[s] != kNone)
                    throw InvalidPartition("state '" + chain.id(s) + "' appears in two blocks");
                block_of_[s] = b;
                if (chain.label(s) != chain.label(blocks_[b].front()))
                    throw InvalidPartition("block " + std::to_string(b) + " mixes labels");
            }
            block_labels_.push_back(chain.label(blocks_[b].front()));
        }
        for (State s = 0; s < chain.size(); ++s)
            if (block_of_[s] == kNone)
                throw InvalidPartition("state '" + chain.id(s) + "' is not covered");
    }

    std::size_t size() const noexcept { return blocks_.size(); }
    const std::vector<State>& block(std::size_t b) const {
        if (b >= blocks_.size()) throw BlockOutOfRange(b, blocks_.size());
        return blocks_[b];
    }
    const std::vector<std::vector<State>>& blocks() const noexcept { return blocks_; }
    const LabelSet& block_label(std::size_t b) const {
        if (b >= blocks_.size()) throw BlockOutOfRange(b, blocks_.size());
        return block_labels_[b];
    }
    const std::vector<LabelSet>& block_labels() const noexcept { return block_labels_; }
    std::size_t block_of(State s) const { return block_of_.at(s); }

    /// Human-readable block name: "S_" followed by the block's propositions.
    std::string block_name(std::size_t b) const {
        const auto& label = block_label(b);
        std::string name = "S_";
        if (label.empty()) return name + "none";
        bool first = true;
        for (const auto& p : label) {
            if (!first) name += "+";
            name += p;
            first = false;
        }
        // Non-label partitions may repeat a label.
        if (std::count(block_labels_.begin(), block_labels_.end(), label) > 1)
            return name + "#" + std::to_string(b);
        return name;
    }
    std::vector<std::string> block_names() const {
        std::vector<std::string> names;
        for (std::size_t b = 0; b < blocks_.size(); ++b) names.push_back(block_name(b));
        return names;
    }

  private:
    static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<std::vector<State>> blocks_;
    std::vector<LabelSet> block_labels_;
    std::vector<std::size_t> block_of_;
};

/// Blocks are the classes of L, ordered by first occurrence in state order.
inline LabelPartition partition_by_labels(const LabeledMarkovChain& chain) {
    std::vector<std::vector<State>> blocks;
    std::map<LabelSet, std::size_t> seen;
    for (State s = 0; s < chain.size(); ++s) {
        auto [it, inserted] = seen.emplace(chain.label(s), blocks.size());
        if (inserted) blocks.emplace_back();
        blocks[it->second].push_back(s);
    }
    return LabelPartition(chain, std::move(blocks));
}

/// One row (P(s, S_1), ..., P(s, S_m)) per state of block `b`, in state order.
inline std::vector<Vector> abstraction_rows(const LabeledMarkovChain& chain,
                                            const LabelPartition& partition, std::size_t b) {
    const auto& members = partition.block(b);
    std::vector<Vector> rows;
    rows.reserve(members.size());
    for (State s : members) {
        Vector r(partition.size(), 0.0);
        const Vector& p = chain.row(s);
        for (State q = 0; q < chain.size(); ++q) r[partition.block_of(q)] += p[q];
        rows.push_back(std::move(r));
    }
    return rows;
}

} // namespace lumpcheck
