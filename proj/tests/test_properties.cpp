#include <gtest/gtest.h>

#include "support.hpp"

using namespace hocheck;
using namespace hocheck::testing;

namespace {
constexpr std::size_t kCases = 1000;
}

TEST(Properties, NormalizationIsIdempotent)
{
    for (std::uint32_t seed : {11u, 12u}) {
        PropertyResult r = prop_normalize_idempotent(kCases, seed);
        EXPECT_EQ(r.cases, kCases);
        EXPECT_TRUE(r.ok()) << r.failures << " failures, first: " << r.first_failure;
    }
}

TEST(Properties, SubstitutionCommutesWithNormalization)
{
    PropertyResult r = prop_subst_commutes(kCases, 21);
    EXPECT_GE(r.cases, kCases * 8 / 10);
    EXPECT_TRUE(r.ok()) << r.failures << " failures, first: " << r.first_failure;
}

TEST(Properties, ParsePrintIsIdentity)
{
    PropertyResult r = prop_parse_print(kCases, 31);
    EXPECT_EQ(r.cases, kCases);
    EXPECT_TRUE(r.ok()) << r.failures << " failures, first: " << r.first_failure;
}

TEST(Properties, MatchPatternIsSound)
{
    std::size_t successes = 0;
    PropertyResult r = prop_match_pattern(kCases, 41, &successes);
    EXPECT_EQ(r.cases, kCases);
    EXPECT_TRUE(r.ok()) << r.failures << " failures, first: " << r.first_failure;
    EXPECT_GT(successes, kCases / 2);
}

TEST(Properties, EqClauseArityMatchesOracle)
{
    PropertyResult r = prop_eqclause_arity(kCases, 51);
    EXPECT_EQ(r.cases, kCases);
    EXPECT_TRUE(r.ok()) << r.failures << " failures, first: " << r.first_failure;
}

TEST(Properties, StoreAndScopeDiscipline)
{
    std::map<Verdict, std::size_t> tally;
    PropertyResult r = prop_store_discipline(kCases, 61, &tally);
    EXPECT_EQ(r.cases, kCases);
    EXPECT_TRUE(r.ok()) << r.failures << " failures, first: " << r.first_failure;
    EXPECT_GT(tally[Verdict::success], 0u);
    EXPECT_GT(tally[Verdict::failure], 0u);
}

TEST(Properties, ArityOracle)
{
    EXPECT_EQ(arity_oracle("tm"), 0u);
    EXPECT_EQ(arity_oracle("(tm -> tm -> tm) -> tp -> tm"), 2u);
    EXPECT_EQ(arity_oracle("((tm -> tm) -> tm) -> tm"), 1u);
}
