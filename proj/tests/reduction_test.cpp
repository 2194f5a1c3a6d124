#include "mpmdp/reduction.hpp"

#include <gtest/gtest.h>

#include "mpmdp/lp_build.hpp"
#include "mpmdp/simplex.hpp"
#include "support/fixtures.hpp"

namespace mpmdp {
namespace {

bool realizable(const Cnf& cnf) {
    const SatInstance inst = sat_to_instance(cnf);
    return solve(build_lp(inst.model, inst.query)).status == SolveStatus::Optimal;
}

TEST(Dimacs, ParsesCommentsHeaderAndClauses) {
    const Cnf cnf = parse_dimacs("c a comment\nc another\np cnf 3 2\n1 -3 0\nc inline\n2 3 -1 0\n");
    EXPECT_EQ(cnf.variables, 3);
    ASSERT_EQ(cnf.clauses.size(), 2u);
    EXPECT_EQ(cnf.clauses[0], (std::vector<int>{1, -3}));
    EXPECT_EQ(cnf.clauses[1], (std::vector<int>{2, 3, -1}));
}

TEST(Dimacs, ClausesMaySpanLines) {
    const Cnf cnf = parse_dimacs("p cnf 2 1\n1\n2 0\n");
    ASSERT_EQ(cnf.clauses.size(), 1u);
    EXPECT_EQ(cnf.clauses[0], (std::vector<int>{1, 2}));
}

TEST(Dimacs, RejectsMalformedInput) {
    EXPECT_THROW(parse_dimacs(""), ParseError);                       // no header
    EXPECT_THROW(parse_dimacs("1 0\np cnf 1 1\n"), ParseError);       // clause before header
    EXPECT_THROW(parse_dimacs("p cnf 1 1\n"), ParseError);            // missing clause
    EXPECT_THROW(parse_dimacs("p cnf 1 1\n1 0\n1 0\n"), ParseError);  // extra clause
    EXPECT_THROW(parse_dimacs("p cnf 1 1\n2 0\n"), ParseError);       // literal out of range
    EXPECT_THROW(parse_dimacs("p cnf 1 1\n-2 0\n"), ParseError);      // negated out of range
    EXPECT_THROW(parse_dimacs("p cnf 1 1\n0\n"), ParseError);         // empty clause
    EXPECT_THROW(parse_dimacs("p cnf 1 1\n1\n"), ParseError);         // unterminated clause
    EXPECT_THROW(parse_dimacs("p cnf 0 1\n1 0\n"), ParseError);       // no variables
    EXPECT_THROW(parse_dimacs("p cnf 1 1\nx 0\n"), ParseError);       // garbage token
    EXPECT_THROW(parse_dimacs("p dnf 1 1\n1 0\n"), ParseError);       // wrong format tag
}

TEST(Dimacs, ErrorsCarryLineNumbers) {
    try {
        parse_dimacs("c fine\np cnf 1 1\n3 0\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("3"), std::string::npos) << e.what();
    }
}

TEST(Dimacs, SerializeParseRoundTrip) {
    Cnf cnf;
    cnf.variables = 3;
    cnf.clauses = {{1, -2}, {-1, 2, 3}, {-3}};
    const Cnf again = parse_dimacs(serialize_dimacs(cnf));
    EXPECT_EQ(again.variables, cnf.variables);
    EXPECT_EQ(again.clauses, cnf.clauses);
}

TEST(SatReduction, InstanceStructure) {
    // (x1 v not x2) and (x2)
    Cnf cnf;
    cnf.variables = 2;
    cnf.clauses = {{1, -2}, {2}};
    const SatInstance inst = sat_to_instance(cnf);
    const Mdp& m = inst.model;

    EXPECT_EQ(m.dimension, 2 + 4);  // clauses then positive then negated literals
    EXPECT_EQ(m.states, (std::vector<std::string>{"s1", "s2"}));
    ASSERT_EQ(m.actions.size(), 4u);

    // the cycle: both actions of s1 step to s2 and vice versa
    const Action& a1 = m.actions[m.action_index("a1")];
    EXPECT_EQ(a1.source, 0);
    EXPECT_EQ(a1.delta, (std::vector<std::pair<int, Rational>>{{1, Rational(1)}}));
    const Action& na2 = m.actions[m.action_index("na2")];
    EXPECT_EQ(na2.source, 1);
    EXPECT_EQ(na2.delta, (std::vector<std::pair<int, Rational>>{{0, Rational(1)}}));

    // rewards: a1 satisfies clause 1 only, and marks literal dimension x1
    EXPECT_EQ(a1.reward, (std::vector<Rational>{Rational(1), Rational(0), Rational(1), Rational(0),
                                                Rational(0), Rational(0)}));
    // na2 satisfies clause 1, marks the negated-literal dimension of x2
    EXPECT_EQ(na2.reward, (std::vector<Rational>{Rational(1), Rational(0), Rational(0),
                                                 Rational(0), Rational(0), Rational(1)}));
    // a2 satisfies clause 2, marks the positive dimension of x2
    EXPECT_EQ(m.actions[m.action_index("a2")].reward,
              (std::vector<Rational>{Rational(0), Rational(1), Rational(0), Rational(1),
                                     Rational(0), Rational(0)}));

    const Query& q = inst.query;
    EXPECT_EQ(q.variant, QueryVariant::MultiQuantConjunctiveJoint);
    EXPECT_EQ(*q.exp, std::vector<Rational>(6, Rational(0)));
    // literal dimensions ask frequency 1/2 (one visit per lap of length 2)
    // with probability 1/2; clause dimensions only matter jointly
    EXPECT_EQ(q.sat, (std::vector<Rational>{Rational(0), Rational(0), Rational(1, 2),
                                            Rational(1, 2), Rational(1, 2), Rational(1, 2)}));
    EXPECT_EQ(q.pr, (std::vector<Rational>{Rational(0), Rational(0), Rational(1, 2),
                                           Rational(1, 2), Rational(1, 2), Rational(1, 2)}));
    EXPECT_EQ(q.sat_joint, (std::vector<Rational>{Rational(1, 2), Rational(1, 2), Rational(0),
                                                  Rational(0), Rational(0), Rational(0)}));
    EXPECT_EQ(q.pr_joint, Rational(1, 2));
}

TEST(SatReduction, SingleVariableFormulas) {
    Cnf pos;  // (x1): satisfiable
    pos.variables = 1;
    pos.clauses = {{1}};
    EXPECT_TRUE(realizable(pos));

    Cnf contradiction;  // (x1) and (not x1): unsatisfiable
    contradiction.variables = 1;
    contradiction.clauses = {{1}, {-1}};
    EXPECT_FALSE(realizable(contradiction));

    Cnf tautologyish;  // (x1 v not x1): satisfiable
    tautologyish.variables = 1;
    tautologyish.clauses = {{1, -1}};
    EXPECT_TRUE(realizable(tautologyish));
}

TEST(SatReduction, MatchesTruthTableOracle) {
    // all distinct single-clause and a sample of two-clause formulas over
    // two variables
    std::vector<Cnf> corpus;
    const std::vector<std::vector<int>> clauses = {{1},  {-1},     {2},      {-2},
                                                   {1, 2}, {1, -2}, {-1, 2}, {-1, -2}};
    for (const auto& c : clauses) {
        Cnf f;
        f.variables = 2;
        f.clauses = {c};
        corpus.push_back(f);
    }
    const std::vector<std::pair<int, int>> pairs = {{0, 1}, {0, 3}, {4, 7}, {5, 6}, {1, 4}, {2, 7}};
    for (const auto& [i, j] : pairs) {
        Cnf f;
        f.variables = 2;
        f.clauses = {clauses[i], clauses[j]};
        corpus.push_back(f);
    }
    for (const auto& f : corpus) {
        EXPECT_EQ(realizable(f), test::sat_oracle(f)) << serialize_dimacs(f);
    }
}

} // namespace
} // namespace mpmdp
