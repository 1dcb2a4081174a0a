#include <gtest/gtest.h>

#include "support.hpp"

using namespace hocheck;
using namespace hocheck::testing;

TEST(Library, StoredLemmasAndDefinitionsCheck)
{
    Registry reg = load_library(load("library_symm_assoc.hol"));
    ASSERT_EQ(reg.size(), 2u);
    EXPECT_EQ(reg.entries()[0].kind, RegistryEntry::Kind::lemma);
    EXPECT_EQ(reg.entries()[1].kind, RegistryEntry::Kind::definition);
    Session s;
    LibraryReport r = check_library(s, reg);
    EXPECT_TRUE(r.ok()) << r.failed_at;
    EXPECT_EQ(s.store_size(), 3u);
}

TEST(Library, EntriesAreCheckedInOrder)
{
    Registry reg = load_library(load("library_trans_first.hol"));
    ASSERT_EQ(reg.entries()[0].forward_refs, std::vector<std::string>{"symm"});
    Session s;
    LibraryReport r = check_library(s, reg);
    EXPECT_FALSE(r.ok());
    EXPECT_EQ(r.failed_at, "trans");
    EXPECT_EQ(r.entries.size(), 1u);
}

TEST(Library, FullLibraryChecks)
{
    Registry reg = load_library(load("library_full.hol"));
    Session s;
    LibraryReport r = check_library(s, reg);
    EXPECT_TRUE(r.ok()) << r.failed_at << ": " << (r.entries.empty() ? "" : r.entries.back().report.message);
    EXPECT_EQ(r.entries.size(), 6u);
}

TEST(Library, BrokenLemmaStopsTheFold)
{
    Registry reg = load_library(load("negative/library_broken_symm.hol"));
    Session s;
    LibraryReport r = check_library(s, reg);
    EXPECT_EQ(r.failed_at, "symm");
    EXPECT_EQ(r.verdict(), Verdict::failure);
    EXPECT_EQ(s.store_size(), 0u);
}

TEST(Library, DuplicateNamesAreRejected)
{
    Registry reg = load_library(load("library_symm_assoc.hol"));
    EXPECT_THROW(load_library(reg, load("library_symm_assoc.hol")), LibraryError);
}

TEST(Library, GoalsAreNotLibraryEntries)
{
    EXPECT_THROW(load_library(load("symm_simple.hol")), LibraryError);
}

TEST(Library, DependencyClosure)
{
    Registry reg = load_library(load("library_full.hol"));
    auto lib = load("library_full.hol");
    Term proof = goal_proofs(goals_of(load("assoc_body.hol", lib.sig))[0]).at(0);
    auto deps = dependency_closure(proof, reg);
    EXPECT_EQ(deps, (std::set<std::string>{"symm", "trans", "def_i", "def_e", "assoc", "assoc_inst"}));
}

TEST(Library, PackagedTheoremChecksWithoutLibraries)
{
    auto lib = load("library_full.hol");
    Registry reg = load_library(lib);
    Session s;
    ASSERT_TRUE(check_library(s, reg).ok());
    Term goal = goals_of(load("assoc_body.hol", lib.sig))[0];
    Term packaged = package_goal(goal, reg);
    EXPECT_TRUE(reg.mentioned(packaged).empty());
    Session empty;
    CheckReport r = empty.solve_goal(packaged);
    EXPECT_TRUE(r.ok()) << r.message;
    Term p = goal_proofs(packaged).at(0);
    ProofStats st = proof_stats(p);
    EXPECT_EQ(st.lemma_count, 5u);
    EXPECT_EQ(st.def_count, 1u);
}

TEST(Library, PackagingReproducesTheInlineLemma)
{
    auto lib = load("library_symm_assoc_elam_tab.hol");
    Registry reg = load_library(lib);
    Session s;
    ASSERT_TRUE(check_library(s, reg).ok());
    Term packaged = package_goal(goals_of(load("symm_body.hol", lib.sig))[0], reg);
    EXPECT_TRUE(alpha_beta_eq(packaged, goal_of("symm_implicit.hol")));
}

TEST(Library, PackagingNeedsCheckedEntries)
{
    auto lib = load("library_symm_assoc.hol");
    Registry reg = load_library(lib);
    Term goal = goals_of(load("symm_body.hol", lib.sig))[0];
    EXPECT_THROW(package_goal(goal, reg), LibraryError);
}

TEST(Library, GoalMentioningALibraryNameCannotBePackaged)
{
    auto lib = load("library_symm_assoc.hol");
    Registry reg = load_library(lib);
    Session s;
    ASSERT_TRUE(check_library(s, reg).ok());
    Term goal = parse_term("pi f\\ pi t\\ proves refl (eq form (assoc f t) (assoc f t))", lib.sig, MetaType::o());
    EXPECT_THROW(package_goal(goal, reg), LibraryError);
}
