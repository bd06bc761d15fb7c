#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace lumpcheck;

namespace {

Mdpa case_study_mdpa() {
    const auto chain = oracle::case_study();
    return imdpa_to_mdpa(build_imdpa(chain, partition_by_labels(chain)));
}

std::vector<bool> has_label(const std::vector<LabelSet>& labels, const std::string& a) {
    std::vector<bool> out;
    for (const auto& l : labels) out.push_back(l.count(a) != 0);
    return out;
}

double policy_count(const Mdpa& m, std::size_t k) {
    double c = 1.0;
    for (const auto& acts : m.actions) c *= std::pow(static_cast<double>(acts.size()), static_cast<double>(k));
    return c;
}

} // namespace

TEST(CheckLmc, NextAtCaseStudy) {
    const auto chain = oracle::case_study();
    const auto r = check_lmc(chain, pctl::parse_formula("P=? [ X \"b\" ]"));
    EXPECT_NEAR((*r.values)[chain.index_of("s4")], 0.96, 1e-12);
    EXPECT_NEAR((*r.values)[chain.index_of("s0")], 0.45, 1e-12);
    EXPECT_FALSE(r.error_bound.has_value());
}

TEST(CheckLmc, BoundedGloballyMatchesPathEnumeration) {
    const auto chain = oracle::case_study();
    auto not_c = [&](State s) { return chain.label(s).count("c") == 0; };
    for (std::size_t k = 0; k <= 4; ++k) {
        const auto values =
            *check_lmc(chain, pctl::parse_formula("P=? [ G<=" + std::to_string(k) + " !\"c\" ]")).values;
        for (State s = 0; s < chain.size(); ++s)
            EXPECT_NEAR(values[s], oracle::bounded_globally(chain, s, k, not_c), 1e-12);
    }
}

TEST(CheckLmc, BoundedUntilOnRandomChains) {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 100; ++trial) {
        const auto chain = oracle::random_chain(rng, 5, 3);
        const std::size_t k = trial % 5;
        const auto r = check_lmc(chain, pctl::parse_formula("P=? [ \"a\" U<=" + std::to_string(k) + " \"b\" ]"));
        for (State s = 0; s < chain.size(); ++s) {
            const double expected = oracle::bounded_until(
                chain, s, k, [&](State q) { return chain.label(q).count("a") != 0; },
                [&](State q) { return chain.label(q).count("b") != 0; });
            EXPECT_NEAR((*r.values)[s], expected, 1e-12);
        }
    }
}

TEST(CheckLmc, UnboundedUntilConverges) {
    const auto chain = oracle::case_study();
    const auto r = check_lmc(chain, pctl::parse_formula("P=? [ true U \"c\" ]"));
    // Every state reaches c with probability one: no absorbing region avoids it.
    for (double v : *r.values) EXPECT_NEAR(v, 1.0, 1e-8);
    // Long-horizon bounded values agree with the fixpoint up to its stopping error.
    const auto bounded = check_lmc(chain, pctl::parse_formula("P=? [ true U<=2000 \"c\" ]"));
    for (State s = 0; s < chain.size(); ++s) EXPECT_NEAR((*bounded.values)[s], (*r.values)[s], 1e-6);
}

TEST(Extremal, BaseCaseAtZeroSteps) {
    const auto mdpa = case_study_mdpa();
    for (auto mode : {Optimize::Min, Optimize::Max}) {
        const auto r = extremal_probability(mdpa, *pctl::until(pctl::atom("a"), pctl::atom("b"), 0), mode);
        EXPECT_EQ(*r.values, (Vector{0.0, 1.0, 0.0}));
    }
}

TEST(Extremal, CaseStudyGloballyOneStep) {
    const auto mdpa = case_study_mdpa();
    const auto lo = check_imdpa(mdpa, pctl::parse_formula("Pmin=? [ G<=1 !\"c\" ]"));
    const auto hi = check_imdpa(mdpa, pctl::parse_formula("Pmax=? [ G<=1 !\"c\" ]"));
    EXPECT_NEAR((*lo.values)[0], 0.66, 1e-12);
    EXPECT_NEAR((*hi.values)[0], 0.66, 1e-12);
    ASSERT_TRUE(hi.error_bound.has_value());
    EXPECT_NEAR(hi.error_bound->eps, 0.05, 1e-12);
}

TEST(Extremal, MatchesPolicyEnumeration) {
    std::mt19937_64 rng(61);
    int checked = 0;
    for (int trial = 0; trial < 400 && checked < 60; ++trial) {
        const auto chain = oracle::random_chain(rng, 5 + trial % 3, 3);
        const auto mdpa = imdpa_to_mdpa(build_imdpa(chain, partition_by_labels(chain)));
        const std::size_t k = 1 + trial % 3;
        if (policy_count(mdpa, k) > 2e5) continue;
        ++checked;
        const auto keep = has_label(mdpa.blocks.labels, "a");
        const auto goal = has_label(mdpa.blocks.labels, "c");
        const auto path = pctl::until(pctl::atom("a"), pctl::atom("c"), k);
        for (auto mode : {Optimize::Min, Optimize::Max}) {
            const auto r = extremal_probability(mdpa, *path, mode);
            const auto expected = oracle::best_over_policies(mdpa.actions, keep, goal, k, mode == Optimize::Max);
            EXPECT_TRUE(oracle::near(*r.values, expected, 1e-12));
            // The returned policy attains the optimum.
            EXPECT_TRUE(oracle::near(policy_value(mdpa, *path, *r.policy), *r.values, 1e-12));
        }
    }
    EXPECT_GE(checked, 30);
}

TEST(Extremal, NextPolicyReplay) {
    const auto mdpa = case_study_mdpa();
    const auto path = pctl::next(pctl::atom("b"));
    const auto r = extremal_probability(mdpa, *path, Optimize::Max);
    EXPECT_NEAR((*r.values)[0], 0.48, 1e-12);
    EXPECT_TRUE(oracle::near(policy_value(mdpa, *path, *r.policy), *r.values, 1e-12));
}

TEST(PropagateError, Values) {
    EXPECT_NEAR(propagate_error({0.05}, 20).eps, 1.0 - std::pow(0.95, 20), 1e-15);
    EXPECT_NEAR(propagate_error({0.05}, 20).eps, 0.641514, 1e-6);
    EXPECT_EQ(propagate_error({0.05}, 0).eps, 0.0);
    EXPECT_EQ(propagate_error({0.0, 0.0}, pctl::kUnbounded).eps, 0.0);
    EXPECT_FALSE(propagate_error({0.0}, pctl::kUnbounded).vacuous);
    const auto inf = propagate_error({0.01, 0.02}, pctl::kUnbounded);
    EXPECT_EQ(inf.eps, 1.0);
    EXPECT_TRUE(inf.vacuous);
    const auto per = propagate_error({0.05, 0.02, 0.03}, 2);
    EXPECT_NEAR(per.per_block[1], 1 - 0.98 * 0.98, 1e-15);
    EXPECT_NEAR(per.eps, 1 - 0.95 * 0.95, 1e-15);
}

TEST(PropagateError, Monotone) {
    double prev = 0.0;
    for (pctl::Bound k = 0; k <= 200; ++k) {
        const double e = propagate_error({0.03}, k).eps;
        EXPECT_GE(e, prev);
        EXPECT_LE(e, 1.0);
        prev = e;
    }
    prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double e = propagate_error({i / 100.0}, 7).eps;
        EXPECT_GE(e, prev);
        prev = e;
    }
}

TEST(CheckImdpa, CaseStudySafety) {
    const auto mdpa = case_study_mdpa();
    const auto r = check_imdpa(mdpa, pctl::parse_formula("P>=0.5 [ G<=1 !\"c\" ]"));
    EXPECT_TRUE(r.sat[0]);
    // 0.66 - 0.05 = 0.61 is the corrected lower estimate.
    const auto strict = check_imdpa(mdpa, pctl::parse_formula("P>=0.62 [ G<=1 !\"c\" ]"));
    EXPECT_FALSE(strict.sat[0]);
    const auto loose = check_imdpa(mdpa, pctl::parse_formula("P>=0.61 [ G<=1 !\"c\" ]"));
    EXPECT_TRUE(loose.sat[0]);
}

TEST(CheckImdpa, VacuousUnboundedWarning) {
    const auto mdpa = case_study_mdpa();
    const auto r = check_imdpa(mdpa, pctl::parse_formula("P>=0.5 [ true U \"c\" ]"));
    EXPECT_FALSE(r.sat[0]); // p_max - 1 clamps to 0
    ASSERT_FALSE(r.warnings.empty());
    EXPECT_NE(r.warnings.front().find("vacuous"), std::string::npos);
    const auto upper = check_imdpa(mdpa, pctl::parse_formula("P<=0.5 [ true U \"c\" ]"));
    EXPECT_FALSE(upper.sat[0]); // p_min + 1 clamps to 1
    const auto q = check_imdpa(mdpa, pctl::parse_formula("P=? [ true U \"c\" ]"));
    EXPECT_TRUE(q.error_bound->vacuous);
}

TEST(CheckImdpa, ExactWhenXiIsZero) {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 30; ++trial) {
        const auto chain = oracle::random_chain(rng, 4, 2);
        const LabelPartition singletons(chain, {{0}, {1}, {2}, {3}});
        const auto mdpa = imdpa_to_mdpa(build_imdpa(chain, singletons));
        for (const char* f : {"P=? [ \"a\" U<=4 \"b\" ]", "P=? [ G<=3 \"a\" ]", "P=? [ X \"b\" ]"}) {
            const auto concrete = check_lmc(chain, pctl::parse_formula(f));
            const auto abs = check_imdpa(mdpa, pctl::parse_formula(f));
            EXPECT_TRUE(oracle::near(*abs.values, *concrete.values, 1e-12));
            EXPECT_TRUE(oracle::near(*abs.upper_values, *concrete.values, 1e-12));
            EXPECT_EQ(abs.error_bound->eps, 0.0);
        }
        for (const char* f : {"P>=0.4 [ \"a\" U<=3 \"b\" ]", "P<0.7 [ G<=2 \"a\" ]"}) {
            EXPECT_EQ(check_imdpa(mdpa, pctl::parse_formula(f)).sat, check_lmc(chain, pctl::parse_formula(f)).sat);
        }
    }
}

TEST(CheckImdpa, GloballyDuality) {
    std::mt19937_64 rng(81);
    for (int trial = 0; trial < 100; ++trial) {
        const auto chain = oracle::random_chain(rng, 6, 3);
        const auto mdpa = imdpa_to_mdpa(build_imdpa(chain, partition_by_labels(chain)));
        const std::string k = std::to_string(trial % 6);
        const auto g_max = *check_imdpa(mdpa, pctl::parse_formula("Pmax=? [ G<=" + k + " !\"c\" ]")).values;
        const auto f_min = *check_imdpa(mdpa, pctl::parse_formula("Pmin=? [ true U<=" + k + " \"c\" ]")).values;
        const auto g_min = *check_imdpa(mdpa, pctl::parse_formula("Pmin=? [ G<=" + k + " !\"c\" ]")).values;
        const auto f_max = *check_imdpa(mdpa, pctl::parse_formula("Pmax=? [ true U<=" + k + " \"c\" ]")).values;
        for (std::size_t b = 0; b < mdpa.size(); ++b) {
            EXPECT_NEAR(g_max[b], 1.0 - f_min[b], 1e-12);
            EXPECT_NEAR(g_min[b], 1.0 - f_max[b], 1e-12);
        }
    }
}

TEST(CompareAbstractions, CaseStudyFirstStep) {
    const auto chain = oracle::case_study();
    const auto table = compare_abstractions(
        chain, partition_by_labels(chain),
        [](pctl::Bound k) { return pctl::globally(pctl::negate(pctl::atom("c")), k); }, 1, 20);
    ASSERT_EQ(table.rows.size(), 20u);
    const auto& r = table.rows.front();
    EXPECT_NEAR(r.p_concrete, 0.65, 1e-12);
    EXPECT_NEAR(r.mdpa_lo, 0.61, 1e-12);
    EXPECT_NEAR(r.mdpa_hi, 0.71, 1e-12);
    EXPECT_NEAR(r.std_p, 0.65, 1e-12);
    EXPECT_NEAR(r.std_lo, 0.59, 1e-12);
    EXPECT_NEAR(r.std_hi, 0.71, 1e-12);
    EXPECT_NEAR(table.rows.back().eps_k, 1 - std::pow(0.95, 20), 1e-12);
    for (const auto& row : table.rows) {
        EXPECT_LE(row.mdpa_lo, row.p_concrete + 1e-12);
        EXPECT_GE(row.mdpa_hi, row.p_concrete - 1e-12);
        EXPECT_LE(row.mdpa_hi - row.mdpa_lo, row.std_hi - row.std_lo + 1e-12);
    }
}

TEST(CheckImdpa, MinNeverExceedsMax) {
    std::mt19937_64 rng(91);
    for (int trial = 0; trial < 100; ++trial) {
        const auto chain = oracle::random_chain(rng, 3 + trial % 6, 1 + trial % 4);
        const auto mdpa = imdpa_to_mdpa(build_imdpa(chain, partition_by_labels(chain)));
        for (const char* f : {"P=? [ G \"a\" ]", "P=? [ true U \"b\" ]", "P=? [ \"a\" U<=6 \"c\" ]", "P=? [ X \"a\" ]"}) {
            const auto r = check_imdpa(mdpa, pctl::parse_formula(f));
            for (std::size_t b = 0; b < mdpa.size(); ++b) EXPECT_LE((*r.values)[b], (*r.upper_values)[b]) << f;
        }
    }
}

TEST(CheckImdpa, SoundnessBracketOnRandomChains) {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 200; ++trial) {
        const auto chain = oracle::random_chain(rng, 3 + trial % 6, 2 + trial % 3);
        const auto mdpa = imdpa_to_mdpa(build_imdpa(chain, partition_by_labels(chain)));
        for (pctl::Bound k = 1; k <= 10; ++k) {
            const auto q = pctl::query(pctl::QueryMode::Plain, pctl::globally(pctl::negate(pctl::atom("c")), k));
            const double concrete = (*check_lmc(chain, q).values)[chain.initial_state()];
            const auto abs = check_imdpa(mdpa, q);
            const std::size_t b = mdpa.blocks.initial;
            const double eps = abs.error_bound->eps;
            EXPECT_LE((*abs.values)[b] - eps, concrete + 1e-12);
            EXPECT_GE((*abs.upper_values)[b] + eps, concrete - 1e-12);
        }
    }
}
