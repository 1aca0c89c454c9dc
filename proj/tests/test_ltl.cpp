#include "support/ref_ltl.hpp"

#include <gtest/gtest.h>

using namespace rtmc;
using testkit::Rng;

namespace
{

// Kripke structure from explicit labels ("" = no props) and edges.
TimedKripke kripke( const std::vector<std::set<std::string>>& labels, const std::vector<std::pair<StateIndex, StateIndex>>& edges )
{
    TimedKripke k;
    k.prop_names = { "p", "q" };
    k.out.resize( labels.size() );
    for ( std::size_t s = 0; s < labels.size(); ++s )
    {
        k.states.push_back( Configuration{ Object{ "s" + std::to_string( s ), Port{ true } } } );
        std::uint64_t bits = 0;
        for ( std::size_t i = 0; i < k.prop_names.size(); ++i )
            if ( labels[s].contains( k.prop_names[i] ) )
                bits |= 1U << i;
        k.labels.push_back( bits );
    }
    for ( auto [a, b] : edges )
        k.add_transition( { a, b, 1, "e" } );
    return k;
}

testkit::LassoWord random_word( Rng& rng )
{
    static const std::vector<std::string> props{ "a", "b", "c" };
    testkit::LassoWord w;
    const std::size_t prefix = rng.range( 0, 3 );
    const std::size_t loop = rng.range( 1, 4 );
    for ( std::size_t i = 0; i < prefix + loop; ++i )
    {
        std::set<std::string> l;
        for ( const auto& p : props )
            if ( rng.coin() )
                l.insert( p );
        w.letters.push_back( l );
    }
    w.loop_start = prefix;
    return w;
}

} // namespace

TEST( Buchi, AlwaysP )
{
    auto b = to_buchi( fm::always( fm::prop( "p" ) ) );
    EXPECT_GE( b.states.size(), 1u );
    EXPECT_LE( b.states.size(), 3u );
    // to_buchi builds the automaton of the negation, <> ~p.
    EXPECT_TRUE( b.accepts_lasso( { { "p" }, {} }, 1 ) );
    EXPECT_FALSE( b.accepts_lasso( { { "p" } }, 0 ) );
}

TEST( Buchi, EventuallyP )
{
    auto b = to_buchi( fm::eventually( fm::prop( "p" ) ) );
    EXPECT_TRUE( b.accepts_lasso( { {} }, 0 ) );
    EXPECT_FALSE( b.accepts_lasso( { {}, { "p" } }, 1 ) );
    EXPECT_FALSE( b.accepts_lasso( { {}, {}, { "p" } }, 0 ) );
}

TEST( Buchi, BoundedOperatorRejected )
{
    EXPECT_THROW( (void)to_buchi( fm::eventually_le( 3, fm::prop( "p" ) ) ), FormulaError );
}

TEST( Buchi, AcceptanceMatchesDirectSemantics )
{
    Rng rng{ 99 };
    for ( int i = 0; i < 600; ++i )
    {
        auto f = testkit::random_ltl( rng, 3 );
        auto pos = build_buchi( f );
        auto neg = to_buchi( f );
        for ( int j = 0; j < 12; ++j )
        {
            auto w = random_word( rng );
            bool truth = testkit::ref_eval( w, f );
            ASSERT_EQ( pos.accepts_lasso( w.letters, w.loop_start ), truth ) << to_string( f );
            ASSERT_EQ( neg.accepts_lasso( w.letters, w.loop_start ), !truth ) << to_string( f );
        }
    }
}

TEST( ModelCheck, SelfLoopSatisfiesAlways )
{
    auto k = kripke( { { "p" } }, { { 0, 0 } } );
    EXPECT_TRUE( model_check_ltl( k, parse_formula( "[] p" ) ).holds() );
}

TEST( ModelCheck, SinkViolation )
{
    auto k = kripke( { { "p" }, {} }, { { 0, 1 }, { 1, 1 } } );
    auto v = model_check_ltl( k, parse_formula( "[] p" ) );
    ASSERT_FALSE( v.holds() );
    ASSERT_EQ( v.counterexample->prefix.size(), 1u );
    EXPECT_EQ( v.counterexample->prefix[0].state, 0u );
    EXPECT_EQ( v.counterexample->prefix[0].duration, 1u );
    ASSERT_EQ( v.counterexample->loop.size(), 1u );
    EXPECT_EQ( v.counterexample->loop[0].state, 1u );
    EXPECT_TRUE( is_path_of( k, *v.counterexample ) );
}

TEST( ModelCheck, ShortestPrefixPreferred )
{
    // 0 -> 1 -> 2 and 0 -> 2, with the violation only at 2.
    auto k = kripke( { { "p" }, { "p" }, {} }, { { 0, 1 }, { 1, 2 }, { 0, 2 }, { 2, 2 } } );
    auto v = model_check_ltl( k, parse_formula( "[] p" ) );
    ASSERT_FALSE( v.holds() );
    EXPECT_EQ( v.counterexample->prefix.size(), 1u );
}

TEST( ModelCheck, Errors )
{
    auto k = kripke( { { "p" } }, { { 0, 0 } } );
    EXPECT_THROW( (void)model_check_ltl( k, parse_formula( "[] <>[<=3] p" ) ), FormulaError );
    EXPECT_THROW( (void)model_check_ltl( k, parse_formula( "[] r" ) ), UnknownPropositionError );
}

TEST( ModelCheck, LivenessNeedsFairCycle )
{
    // Two loops: {p} at 1 and {} at 2; both reachable from 0.
    auto k = kripke( { {}, { "p" }, {} }, { { 0, 1 }, { 0, 2 }, { 1, 1 }, { 2, 2 }, { 1, 2 } } );
    EXPECT_FALSE( model_check_ltl( k, parse_formula( "<> p" ) ).holds() );
    EXPECT_FALSE( model_check_ltl( k, parse_formula( "[] <> p" ) ).holds() );
    EXPECT_TRUE( model_check_ltl( k, parse_formula( "<> [] p \\/ <> [] ~p" ) ).holds() );
    EXPECT_TRUE( model_check_ltl( k, parse_formula( "~p W p" ) ).holds() );
}

TEST( ModelCheck, AgreesWithReferenceOnRandomStructures )
{
    Rng rng{ 7 };
    for ( int i = 0; i < 300; ++i )
    {
        auto k = testkit::random_kripke( rng );
        auto f = testkit::random_ltl( rng, 3 );
        auto v = model_check_ltl( k, f );
        ASSERT_EQ( v.holds(), testkit::ref_model_check( k, f ) ) << "case " << i << ": " << to_string( f );
        // A violating simple lasso forces a counterexample.
        ASSERT_TRUE( testkit::simple_lassos_satisfy( k, f ) || !v.holds() ) << to_string( f );
        if ( !v.holds() )
        {
            const auto& l = *v.counterexample;
            ASSERT_FALSE( l.loop.empty() );
            ASSERT_TRUE( is_path_of( k, l ) );
            ASSERT_FALSE( testkit::ref_eval( testkit::lasso_word( k, l ), f ) ) << to_string( f );
        }
    }
}

TEST( ModelCheck, FormulaAndNegationNeverBothHold )
{
    Rng rng{ 8 };
    for ( int i = 0; i < 200; ++i )
    {
        auto k = testkit::random_kripke( rng );
        auto f = testkit::random_ltl( rng, 3 );
        bool a = model_check_ltl( k, f ).holds();
        bool b = model_check_ltl( k, fm::neg( f ) ).holds();
        ASSERT_FALSE( a && b ) << to_string( f );
    }
}

TEST( Lasso, PathValidation )
{
    auto k = kripke( { { "p" }, {} }, { { 0, 1 }, { 1, 1 } } );
    EXPECT_TRUE( is_path_of( k, Lasso{ { { 0, 1 } }, { { 1, 1 } } } ) );
    EXPECT_FALSE( is_path_of( k, Lasso{ { { 0, 1 } }, { { 0, 1 } } } ) );   // 0 -> 0 missing
    EXPECT_FALSE( is_path_of( k, Lasso{ { { 0, 5 } }, { { 1, 1 } } } ) );   // wrong duration
    EXPECT_FALSE( is_path_of( k, Lasso{ { { 1, 1 } }, { { 1, 1 } } } ) );   // not from initial
    EXPECT_FALSE( is_path_of( k, Lasso{ { { 0, 1 } }, {} } ) );             // empty loop
}
