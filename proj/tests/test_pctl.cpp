#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace lumpcheck;
using namespace lumpcheck::pctl;

namespace {

class Generator {
  public:
    explicit Generator(std::uint64_t seed) : rng_(seed) {}

    StatePtr state(int depth) {
        const int pick = std::uniform_int_distribution<int>(0, depth <= 0 ? 1 : 4)(rng_);
        switch (pick) {
        case 0: return make_true();
        case 1: return atom(std::string(1, static_cast<char>('a' + coin(3))));
        case 2: return conj(state(depth - 1), state(depth - 1));
        case 3: return negate(state(depth - 1));
        default: return prob(comparison(), threshold(), path(depth - 1));
        }
    }

    PathPtr path(int depth) {
        switch (coin(3)) {
        case 0: return next(state(depth));
        case 1: return until(state(depth), state(depth), bound());
        default: return globally(state(depth), bound());
        }
    }

    StatePtr top(int depth) {
        if (coin(5) == 0) return query(static_cast<QueryMode>(coin(3)), path(depth));
        return state(depth);
    }

  private:
    int coin(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
    Comparison comparison() { return static_cast<Comparison>(coin(4)); }
    double threshold() {
        switch (coin(4)) {
        case 0: return 0.0;
        case 1: return 1.0;
        case 2: return 0.5;
        default: return std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
        }
    }
    Bound bound() { return coin(4) == 0 ? kUnbounded : static_cast<Bound>(coin(30)); }

    std::mt19937_64 rng_;
};

std::size_t syntax_column(const std::string& text) {
    try {
        parse_formula(text);
    } catch (const SyntaxError& e) {
        return e.column();
    }
    return 0;
}

} // namespace

TEST(Parse, Examples) {
    const auto f = parse_formula("P>=0.95 [ G<=20 !\"fail\" ]");
    EXPECT_EQ(*f, *prob(Comparison::GreaterEqual, 0.95, globally(negate(atom("fail")), 20)));

    const auto q = parse_formula("Pmax=? [ \"a\" U<=5 \"b\" ]");
    EXPECT_EQ(*q, *query(QueryMode::Max, until(atom("a"), atom("b"), 5)));

    const auto nested = parse_formula("!P<0.1 [ X \"a\" & \"b\" ]");
    EXPECT_EQ(*nested, *negate(prob(Comparison::Less, 0.1, next(conj(atom("a"), atom("b"))))));

    EXPECT_EQ(*parse_formula("P=? [ true U \"c\" ]"), *query(QueryMode::Plain, until(make_true(), atom("c"))));
    EXPECT_EQ(*parse_formula("Pmin=? [ G \"a\" ]"), *query(QueryMode::Min, globally(atom("a"))));
}

TEST(Parse, Precedence) {
    // '!' binds tighter than '&'; '&' associates to the left.
    EXPECT_EQ(*parse_formula("!\"a\" & \"b\""), *conj(negate(atom("a")), atom("b")));
    EXPECT_EQ(*parse_formula("\"a\" & \"b\" & \"c\""), *conj(conj(atom("a"), atom("b")), atom("c")));
    EXPECT_EQ(*parse_formula("\"a\" & (\"b\" & \"c\")"), *conj(atom("a"), conj(atom("b"), atom("c"))));
    EXPECT_EQ(*parse_formula("!(\"a\" & \"b\")"), *negate(conj(atom("a"), atom("b"))));
}

TEST(Parse, SyntaxErrorColumns) {
    EXPECT_EQ(syntax_column("P>=0.5 [ X ]"), 12u);
    EXPECT_EQ(syntax_column("P>=0.5 X \"a\""), 8u);
    EXPECT_EQ(syntax_column("P>=0.5 [ \"a\" \"b\" ]"), 14u);
    EXPECT_EQ(syntax_column("P>=0.5 [ \"a\" U<=k \"b\" ]"), 17u);
    EXPECT_EQ(syntax_column("\"a\" & "), 7u);
    EXPECT_EQ(syntax_column("P>=0.5 [ X \"a\" ] ]"), 18u);
    EXPECT_EQ(syntax_column("P>=0.5 [ X \"a"), 12u);
    EXPECT_EQ(syntax_column("Q"), 1u);
    EXPECT_EQ(syntax_column("P>=0.5 [ X P=? [ X \"a\" ] ]"), 13u); // no nested queries
    EXPECT_EQ(syntax_column("Pmax>=0.5 [ X \"a\" ]"), 5u);
}

TEST(Parse, ThresholdOutOfRange) {
    EXPECT_THROW(parse_formula("P>=1.5 [ X \"a\" ]"), ThresholdOutOfRange);
    EXPECT_THROW(prob(Comparison::Less, -0.1, next(atom("a"))), ThresholdOutOfRange);
    EXPECT_NO_THROW(parse_formula("P>=1 [ X \"a\" ]"));
    EXPECT_NO_THROW(parse_formula("P<0 [ X \"a\" ]"));
}

TEST(PrettyPrint, RoundTripsRandomFormulas) {
    Generator gen(17);
    for (int i = 0; i < 1000; ++i) {
        const auto f = gen.top(4);
        const std::string text = to_string(*f);
        StatePtr back;
        ASSERT_NO_THROW(back = parse_formula(text)) << text;
        ASSERT_EQ(*back, *f) << text;
    }
}

TEST(Desugar, Examples) {
    const auto d = desugar(parse_formula("P>=0.95 [ G<=20 !\"fail\" ]"));
    EXPECT_EQ(*d, *prob(Comparison::LessEqual, 1.0 - 0.95, until(make_true(), negate(negate(atom("fail"))), 20)));

    const auto q = desugar(parse_formula("Pmax=? [ G \"a\" ]"));
    EXPECT_EQ(*q, *query(QueryMode::Min, until(make_true(), negate(atom("a"))), true));
    // Printing a complemented query gives back the surface form.
    EXPECT_EQ(to_string(*q), "Pmax=? [ G \"a\" ]");

    const auto u = parse_formula("P<0.3 [ \"a\" U<=2 \"b\" ]");
    EXPECT_EQ(*desugar(u), *u);
}

TEST(Desugar, IdempotentAndGloballyFree) {
    Generator gen(23);
    for (int i = 0; i < 1000; ++i) {
        const auto f = gen.top(4);
        const auto d = desugar(f);
        EXPECT_FALSE(contains_globally(*d));
        EXPECT_EQ(*desugar(d), *d);
    }
}

TEST(Desugar, PreservesSemanticsOnRandomChains) {
    std::mt19937_64 rng(29);
    std::uniform_int_distribution<int> pick_k(0, 5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<std::string> ops{"<", "<=", ">", ">="};
    for (int trial = 0; trial < 200; ++trial) {
        const auto chain = oracle::random_chain(rng, 4, 2);
        const std::size_t k = static_cast<std::size_t>(pick_k(rng));
        // Labels are singletons over {a, b}, so the third shape holds everywhere.
        const int shape = trial % 3;
        const std::string phi = shape == 0 ? "\"a\"" : shape == 1 ? "!\"a\"" : "!(\"a\" & \"b\")";
        auto holds = [&](State s) {
            const bool a = chain.label(s).count("a") != 0;
            return shape == 0 ? a : shape == 1 ? !a : true;
        };
        const std::string path = "G<=" + std::to_string(k) + " " + phi;
        const auto values = *check_lmc(chain, parse_formula("P=? [ " + path + " ]")).values;
        const double p = std::round(u(rng) * 100) / 100;
        const std::string op = ops[trial % 4];
        const auto sat = check_lmc(chain, parse_formula("P" + op + std::to_string(p) + " [ " + path + " ]")).sat;
        for (State s = 0; s < 4; ++s) {
            const double expected = oracle::bounded_globally(chain, s, k, holds);
            EXPECT_NEAR(values[s], expected, 1e-12);
            // Skip threshold ties; the comparison there is decided by rounding.
            if (std::abs(expected - p) < 1e-9) continue;
            const bool want = op == "<" ? expected < p : op == "<=" ? expected <= p : op == ">" ? expected > p
                                                                                               : expected >= p;
            EXPECT_EQ(sat[s], want) << path << " " << op << p;
        }
    }
}
