#pragma once

#include "lumpcheck/abstraction.hpp"
#include "lumpcheck/errors.hpp"
#include "lumpcheck/model.hpp"
#include "lumpcheck/pctl.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lumpcheck {

enum class Optimize { Min, Max };

/// Deterministic Markovian policy: choices[t][s] is the action taken in state s at step t.
/// Stationary policies (unbounded until) carry a single row that applies at every step.
struct Policy {
    std::vector<std::vector<std::size_t>> choices;
    bool stationary = false;

    std::size_t at(std::size_t step, std::size_t state) const {
        return stationary ? choices.front()[state] : choices.at(step)[state];
    }
};

/// Propagated abstraction error eps_k = 1 - (1 - xi)^k.
struct ErrorBound {
    Vector xi;
    pctl::Bound k = 0;
    Vector per_block;
    double eps = 0.0; ///< at max_i xi_i
    bool vacuous = false;
};

inline ErrorBound propagate_error(const Vector& xi, pctl::Bound k) {
    ErrorBound b;
    b.xi = xi;
    b.k = k;
    auto one = [k](double x) {
        if (k == 0 || x <= 0.0) return 0.0;
        if (k == pctl::kUnbounded) return 1.0;
        return std::clamp(1.0 - std::pow(1.0 - x, static_cast<double>(k)), 0.0, 1.0);
    };
    double xi_max = 0.0;
    for (double x : xi) {
        b.per_block.push_back(one(x));
        xi_max = std::max(xi_max, x);
    }
    b.eps = one(xi_max);
    b.vacuous = b.eps >= 1.0;
    return b;
}

struct CheckResult {
    /// Sat set of the top formula; empty for queries.
    std::vector<bool> sat;
    /// Query values (p_min for a plain query on an MDPA); for a thresholded formula on an
    /// MDPA, the error-corrected probabilities that were compared.
    std::optional<Vector> values;
    /// p_max for a plain query on an MDPA.
    std::optional<Vector> upper_values;
    std::optional<Policy> policy;
    std::optional<ErrorBound> error_bound;
    std::vector<std::string> warnings;
};

inline constexpr double kFixpointTolerance = 1e-10;
inline constexpr std::size_t kMaxIterations = 1'000'000;

namespace detail {

/// Uniform view of an LMC (one action per state) or an MDPA.
struct DecisionModel {
    const std::vector<LabelSet>& labels;
    const std::vector<std::vector<Vector>>& actions;
    const Vector* xi; ///< null for concrete chains: exact semantics

    std::size_t size() const noexcept { return actions.size(); }
};

struct PathValues {
    Vector values;
    Policy policy;
};

inline double expected(const Vector& dist, const Vector& x) {
    double v = 0.0;
    for (std::size_t q = 0; q < dist.size(); ++q) v += dist[q] * x[q];
    return v;
}

/// One Bellman backup over the actions of state s; returns (value, chosen action).
inline std::pair<double, std::size_t> backup(const DecisionModel& m, std::size_t s, const Vector& x,
                                             Optimize opt) {
    const auto& acts = m.actions[s];
    double best = expected(acts[0], x);
    std::size_t arg = 0;
    for (std::size_t a = 1; a < acts.size(); ++a) {
        const double v = expected(acts[a], x);
        if (opt == Optimize::Max ? v > best : v < best) {
            best = v;
            arg = a;
        }
    }
    return {best, arg};
}

std::vector<bool> sat(const DecisionModel& m, const pctl::StateFormula& f, std::vector<std::string>& warnings);

inline PathValues path_values(const DecisionModel& m, const pctl::PathFormula& path, Optimize opt,
                              std::vector<std::string>& warnings) {
    const std::size_t n = m.size();
    PathValues out;
    if (const auto* nx = std::get_if<pctl::Next>(&path.node)) {
        const auto target = sat(m, *nx->operand, warnings);
        Vector ind(n);
        for (std::size_t s = 0; s < n; ++s) ind[s] = target[s] ? 1.0 : 0.0;
        out.values.assign(n, 0.0);
        out.policy.choices.assign(1, std::vector<std::size_t>(n, 0));
        for (std::size_t s = 0; s < n; ++s)
            std::tie(out.values[s], out.policy.choices[0][s]) = backup(m, s, ind, opt);
        return out;
    }
    const auto* u = std::get_if<pctl::Until>(&path.node);
    if (!u) throw UnsupportedFormula("path formula must be desugared (Next or Until)");

    const auto keep = sat(m, *u->lhs, warnings);
    const auto goal = sat(m, *u->rhs, warnings);
    Vector x(n), y(n);
    for (std::size_t s = 0; s < n; ++s) x[s] = goal[s] ? 1.0 : 0.0;

    auto step = [&](std::vector<std::size_t>& choice) {
        for (std::size_t s = 0; s < n; ++s) {
            if (goal[s]) y[s] = 1.0;
            else if (!keep[s]) y[s] = 0.0;
            else std::tie(y[s], choice[s]) = backup(m, s, x, opt);
        }
    };

    if (u->bound != pctl::kUnbounded) {
        // Backward induction: the backup at iteration t is the decision with t steps to go,
        // i.e. the decision taken at time step (bound - t).
        std::vector<std::vector<std::size_t>> by_remaining(u->bound, std::vector<std::size_t>(n, 0));
        for (std::size_t t = 0; t < u->bound; ++t) {
            step(by_remaining[t]);
            x.swap(y);
        }
        out.values = x;
        out.policy.choices.assign(by_remaining.rbegin(), by_remaining.rend());
        return out;
    }

    // Least fixpoint from below.
    std::vector<std::size_t> choice(n, 0);
    double residual = 0.0;
    for (std::size_t it = 0; it < kMaxIterations; ++it) {
        step(choice);
        residual = 0.0;
        for (std::size_t s = 0; s < n; ++s) residual = std::max(residual, std::abs(y[s] - x[s]));
        x.swap(y);
        if (residual < kFixpointTolerance) {
            out.values = x;
            out.policy.choices.assign(1, choice);
            out.policy.stationary = true;
            return out;
        }
    }
    throw NonConvergence(kMaxIterations, residual);
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

/// Threshold comparison; values within 1e-12 of p count as equal to it.
inline bool compare(pctl::Comparison c, double value, double p) {
    switch (c) {
    case pctl::Comparison::Less: return value < p - kEqualityTolerance;
    case pctl::Comparison::LessEqual: return value <= p + kEqualityTolerance;
    case pctl::Comparison::Greater: return value > p + kEqualityTolerance;
    case pctl::Comparison::GreaterEqual: return value >= p - kEqualityTolerance;
    }
    return false;
}

inline bool lower_bound_comparison(pctl::Comparison c) {
    return c == pctl::Comparison::Greater || c == pctl::Comparison::GreaterEqual;
}

/// Probabilities compared against the threshold of a Prob node, with the error correction
/// applied on abstract models.
inline Vector corrected_values(const DecisionModel& m, const pctl::Prob& p, std::vector<std::string>& warnings,
                               std::optional<ErrorBound>* bound_out = nullptr) {
    const bool lower = lower_bound_comparison(p.cmp);
    // Exact chains have one action, so min and max coincide.
    auto values = path_values(m, *p.path, lower ? Optimize::Max : Optimize::Min, warnings).values;
    if (!m.xi) return values;
    const auto bound = propagate_error(*m.xi, pctl::horizon(*p.path));
    if (bound.vacuous && bound.eps > 0.0)
        warnings.push_back("error bound for '" + pctl::to_string(*p.path) + "' is vacuous (eps_k = 1)");
    for (double& v : values) v = clamp01(lower ? v - bound.eps : v + bound.eps);
    if (bound_out) *bound_out = bound;
    return values;
}

inline std::vector<bool> sat(const DecisionModel& m, const pctl::StateFormula& f, std::vector<std::string>& warnings) {
    const std::size_t n = m.size();
    return std::visit(
        [&](const auto& x) -> std::vector<bool> {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, pctl::True>) {
                return std::vector<bool>(n, true);
            } else if constexpr (std::is_same_v<T, pctl::Atom>) {
                std::vector<bool> out(n);
                for (std::size_t s = 0; s < n; ++s) out[s] = m.labels[s].count(x.name) != 0;
                return out;
            } else if constexpr (std::is_same_v<T, pctl::And>) {
                auto a = sat(m, *x.lhs, warnings);
                const auto b = sat(m, *x.rhs, warnings);
                for (std::size_t s = 0; s < n; ++s) a[s] = a[s] && b[s];
                return a;
            } else if constexpr (std::is_same_v<T, pctl::Not>) {
                auto a = sat(m, *x.operand, warnings);
                a.flip();
                return a;
            } else if constexpr (std::is_same_v<T, pctl::Prob>) {
                const auto values = corrected_values(m, x, warnings);
                std::vector<bool> out(n);
                for (std::size_t s = 0; s < n; ++s) out[s] = compare(x.cmp, values[s], x.threshold);
                return out;
            } else {
                throw UnsupportedFormula("probability queries are only allowed at the top level");
            }
        },
        f.node);
}

inline CheckResult check(const DecisionModel& m, const pctl::StatePtr& formula) {
    const auto f = pctl::desugar(formula);
    CheckResult r;
    if (const auto* q = std::get_if<pctl::ProbQuery>(&f->node)) {
        auto finish = [&](Vector v) {
            if (q->complement)
                for (double& x : v) x = 1.0 - x;
            return v;
        };
        if (q->mode == pctl::QueryMode::Plain && m.xi) {
            auto lo = path_values(m, *q->path, Optimize::Min, r.warnings);
            auto hi = path_values(m, *q->path, Optimize::Max, r.warnings);
            if (q->complement) std::swap(lo, hi);
            r.values = finish(std::move(lo.values));
            r.upper_values = finish(std::move(hi.values));
            // Fixpoint stopping noise can invert the pair by ~1e-12.
            for (std::size_t s = 0; s < m.size(); ++s)
                if ((*r.values)[s] > (*r.upper_values)[s]) std::swap((*r.values)[s], (*r.upper_values)[s]);
        } else {
            const auto opt = q->mode == pctl::QueryMode::Min ? Optimize::Min : Optimize::Max;
            auto pv = path_values(m, *q->path, opt, r.warnings);
            r.values = finish(std::move(pv.values));
            if (m.xi) r.policy = std::move(pv.policy);
        }
        if (m.xi) r.error_bound = propagate_error(*m.xi, pctl::horizon(*q->path));
        return r;
    }
    if (const auto* p = std::get_if<pctl::Prob>(&f->node)) {
        std::optional<ErrorBound> bound;
        auto values = corrected_values(m, *p, r.warnings, &bound);
        r.sat.resize(m.size());
        for (std::size_t s = 0; s < m.size(); ++s) r.sat[s] = compare(p->cmp, values[s], p->threshold);
        r.values = std::move(values);
        r.error_bound = std::move(bound);
        return r;
    }
    r.sat = sat(m, *f, r.warnings);
    return r;
}

inline std::vector<std::vector<Vector>> single_actions(const LabeledMarkovChain& chain) {
    std::vector<std::vector<Vector>> acts;
    acts.reserve(chain.size());
    for (const auto& row : chain.matrix()) acts.push_back({row});
    return acts;
}

} // namespace detail

/// Exact PCTL checking on a concrete chain. Unknown atoms hold nowhere.
inline CheckResult check_lmc(const LabeledMarkovChain& chain, const pctl::StatePtr& formula) {
    const auto actions = detail::single_actions(chain);
    return detail::check(detail::DecisionModel{chain.labels(), actions, nullptr}, formula);
}

/// p_min or p_max per block by value iteration over the vertex actions, with a policy that
/// attains it. Operands of the path formula are evaluated under the abstract semantics.
inline CheckResult extremal_probability(const Mdpa& mdpa, const pctl::PathFormula& path, Optimize mode) {
    CheckResult r;
    const detail::DecisionModel m{mdpa.blocks.labels, mdpa.actions, &mdpa.xi};
    auto pv = detail::path_values(m, path, mode, r.warnings);
    r.values = std::move(pv.values);
    r.policy = std::move(pv.policy);
    return r;
}

/// PCTL checking on the abstraction: >= and > compare p_max - eps_k, <= and < compare
/// p_min + eps_k (clamped to [0,1]), eps_k taken from each operator's own step bound.
inline CheckResult check_imdpa(const Mdpa& mdpa, const pctl::StatePtr& formula) {
    return detail::check(detail::DecisionModel{mdpa.blocks.labels, mdpa.actions, &mdpa.xi}, formula);
}

/// Values obtained by fixing `policy` in the MDPA (a time-varying Markov chain).
inline Vector policy_value(const Mdpa& mdpa, const pctl::PathFormula& path, const Policy& policy) {
    const std::size_t n = mdpa.size();
    std::vector<std::string> warnings;
    const detail::DecisionModel m{mdpa.blocks.labels, mdpa.actions, &mdpa.xi};
    if (const auto* nx = std::get_if<pctl::Next>(&path.node)) {
        const auto target = detail::sat(m, *nx->operand, warnings);
        Vector out(n);
        for (std::size_t s = 0; s < n; ++s) {
            const auto& a = mdpa.actions[s][policy.at(0, s)];
            for (std::size_t q = 0; q < n; ++q) out[s] += target[q] ? a[q] : 0.0;
        }
        return out;
    }
    const auto* u = std::get_if<pctl::Until>(&path.node);
    if (!u || u->bound == pctl::kUnbounded)
        throw UnsupportedFormula("policy replay needs a Next or bounded Until formula");
    const auto keep = detail::sat(m, *u->lhs, warnings);
    const auto goal = detail::sat(m, *u->rhs, warnings);
    Vector x(n), y(n);
    for (std::size_t s = 0; s < n; ++s) x[s] = goal[s] ? 1.0 : 0.0;
    for (std::size_t remaining = 1; remaining <= u->bound; ++remaining) {
        const std::size_t step = u->bound - remaining;
        for (std::size_t s = 0; s < n; ++s) {
            if (goal[s]) y[s] = 1.0;
            else if (!keep[s]) y[s] = 0.0;
            else y[s] = detail::expected(mdpa.actions[s][policy.at(step, s)], x);
        }
        x.swap(y);
    }
    return x;
}

/// One row of the concrete / standard / interval comparison.
struct ComparisonRow {
    pctl::Bound k = 0;
    double p_concrete = 0.0;
    double std_p = 0.0, std_lo = 0.0, std_hi = 0.0;
    double mdpa_pmin = 0.0, mdpa_pmax = 0.0, mdpa_lo = 0.0, mdpa_hi = 0.0;
    double eps_k = 0.0;
};

struct ComparisonTable {
    double std_epsilon = 0.0;
    Vector xi;
    std::vector<ComparisonRow> rows;
};

using PathTemplate = std::function<pctl::PathPtr(pctl::Bound)>;

/// Evaluates the path template from the initial state for every k in [k_first, k_last].
inline ComparisonTable compare_abstractions(const LabeledMarkovChain& chain, const LabelPartition& partition,
                                            const PathTemplate& path_at, pctl::Bound k_first, pctl::Bound k_last) {
    const auto lumped = build_standard_abstraction(chain, partition);
    const auto mdpa = imdpa_to_mdpa(build_imdpa(chain, partition));
    ComparisonTable table;
    table.std_epsilon = lumped.epsilon;
    table.xi = mdpa.xi;
    const std::size_t s0 = chain.initial_state();
    const std::size_t b0 = mdpa.blocks.initial;
    const std::size_t l0 = lumped.chain.initial_state();
    for (pctl::Bound k = k_first; k <= k_last; ++k) {
        const auto path = path_at(k);
        const auto h = pctl::horizon(*pctl::desugar(path).path);
        const auto q = pctl::query(pctl::QueryMode::Plain, path);
        ComparisonRow row;
        row.k = k;
        row.p_concrete = (*check_lmc(chain, q).values)[s0];
        row.std_p = (*check_lmc(lumped.chain, q).values)[l0];
        const double std_band = propagate_error({lumped.epsilon}, h).eps;
        row.std_lo = detail::clamp01(row.std_p - std_band);
        row.std_hi = detail::clamp01(row.std_p + std_band);
        const auto abs = check_imdpa(mdpa, q);
        row.mdpa_pmin = (*abs.values)[b0];
        row.mdpa_pmax = (*abs.upper_values)[b0];
        row.eps_k = abs.error_bound->eps;
        row.mdpa_lo = detail::clamp01(row.mdpa_pmin - row.eps_k);
        row.mdpa_hi = detail::clamp01(row.mdpa_pmax + row.eps_k);
        table.rows.push_back(row);
    }
    return table;
}

} // namespace lumpcheck
