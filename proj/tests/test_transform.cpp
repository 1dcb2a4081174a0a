#include <gtest/gtest.h>

#include "support.hpp"

using namespace hocheck;
using namespace hocheck::testing;

TEST(Transform, StatsOfRefl)
{
    ProofStats s = proof_stats(Term::constant("refl", MetaType::pf()));
    EXPECT_EQ(s.shared_nodes, 1u);
    EXPECT_EQ(s.tree_nodes, 1u);
    EXPECT_EQ(s.lemma_count, 0u);
    EXPECT_EQ(s.def_count, 0u);
    EXPECT_EQ(s.max_depth, 1u);
}

TEST(Transform, TreeCountCoversSharing)
{
    Term r = Term::constant("refl", MetaType::pf());
    Term g = Term::constant("g", arrows(MetaType::pf(), MetaType::pf(), MetaType::pf()));
    Term t = r;
    for (int i = 0; i < 70; ++i) t = Term::apps(g, {t, t});
    ProofStats s = proof_stats(t);
    EXPECT_EQ(s.shared_nodes, 2u + 2u * 70u);
    EXPECT_EQ(s.tree_nodes, std::numeric_limits<std::uint64_t>::max());
    EXPECT_GE(s.tree_nodes, s.shared_nodes);
}

TEST(Transform, ExpansionOfTheoremTwoIsTheoremOne)
{
    Term expanded = expand_goal(goal_of("symm_lemma.hol"));
    EXPECT_TRUE(alpha_beta_eq(expanded, goal_of("symm_simple.hol")));
}

TEST(Transform, ExpandedProofsRecheckWithoutLemmas)
{
    for (const char* f : {"symm_lemma.hol", "symm_implicit.hol", "symm_trans.hol", "poly_symm.hol", "assoc_def.hol"}) {
        Term g = expand_goal(goal_of(f));
        for (const Term& p : goal_proofs(g)) EXPECT_EQ(proof_stats(p).lemma_count, 0u) << f;
        Session s;
        CheckReport r = s.solve_goal(g);
        EXPECT_TRUE(r.ok()) << f << ": " << r.message;
    }
}

TEST(Transform, ExpansionKeepsDefinitions)
{
    Term p = goal_proofs(expand_goal(goal_of("assoc_def.hol"))).at(0);
    EXPECT_EQ(proof_stats(p).def_count, 1u);
    EXPECT_EQ(proof_stats(p).lemma_count, 0u);
}

TEST(Transform, ExpansionIsIdempotent)
{
    Term g = expand_goal(goal_of("assoc_def.hol"));
    EXPECT_TRUE(alpha_eq(expand_goal(g), g));
}
