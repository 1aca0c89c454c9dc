// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Limits below are fixed; do not relax them.

#include "support/properties.hpp"
#include "support/ref_ltl.hpp"
#include "support/ref_mtl.hpp"
#include "rtmc/advert.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace rtmc;
using testkit::Rng;

namespace
{

constexpr double kG1G2Seconds = 60.0;
constexpr double kG3Seconds = 120.0;
constexpr int kEquivalenceTheories = 120;
constexpr int kProjectionTheories = 20;
constexpr int kLtlCases = 600;

struct Outcome
{
    bool pass = true;
    std::string detail;
};

struct Run
{
    bool holds = false;
    std::size_t states = 0;
    std::size_t transitions = 0;
    std::optional<Lasso> lasso;
    double seconds = 0;
};

Run check_advert( const std::string& formula, const advert::AdvertParams& p = {} )
{
    auto start = std::chrono::steady_clock::now();
    auto m = advert::build_advert_theory( p );
    auto f = parse_formula( formula );
    auto tr = transform_for( m.theory, m.initial, f );
    TimedKripke k = tr ? explore( tr->theory, tr->initial ) : explore( m.theory, m.initial );
    Verdict v = model_check_ltl( k, tr ? tr->ltl : f );
    Run r;
    r.holds = v.holds();
    r.states = k.size();
    r.transitions = k.transitions.size();
    r.lasso = v.counterexample;
    r.seconds = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
    return r;
}

std::string fmt_run( const Run& r )
{
    std::ostringstream os;
    os.precision( 3 );
    os << ( r.holds ? "holds" : "counterexample" ) << ", " << r.states << " states, " << std::fixed << r.seconds << " s";
    return os.str();
}

Outcome reproduce( std::initializer_list<const char*> formulas, double limit )
{
    Outcome o;
    for ( const char* f : formulas )
    {
        Run r = check_advert( f );
        bool ok = r.holds && r.seconds <= limit;
        o.pass = o.pass && ok;
        o.detail += ( o.detail.empty() ? "" : "; " ) + std::string{ f } + ": " + fmt_run( r );
    }
    return o;
}

Outcome theorem_equivalence()
{
    Rng rng{ 2024 };
    int cases = 0;
    int holds = 0;
    for ( std::uint64_t seed = 1000; seed < 1000 + kEquivalenceTheories; ++seed )
    {
        auto rt = testkit::random_theory( seed );
        auto k = explore( rt.theory, rt.initial );
        for ( int j = 0; j < 4; ++j )
        {
            auto f = j % 2 ? testkit::random_safety( rng, rt.props ) : testkit::random_response( rng, rt.props );
            auto tr = transform_for( rt.theory, rt.initial, f );
            auto kt = explore( tr->theory, tr->initial );
            bool ltl = model_check_ltl( kt, tr->ltl ).holds();
            bool oracle = check_mtl_exhaustive( k, f ).holds();
            ++cases;
            holds += oracle;
            if ( ltl != oracle )
                return { false, "seed " + std::to_string( seed ) + ": " + to_string( f ) + " ltl=" + std::to_string( ltl ) +
                                        " oracle=" + std::to_string( oracle ) };
        }
    }
    return { true, std::to_string( kEquivalenceTheories ) + " theories, " + std::to_string( cases ) + " specs (" +
                           std::to_string( holds ) + " hold), all agree" };
}

const std::vector<const char*>& advert_formulas()
{
    static const std::vector<const char*> fs{ advert::formulas::G1, advert::formulas::G2, advert::formulas::G3_C1,
                                              advert::formulas::G3_C2 };
    return fs;
}

Outcome projection()
{
    auto m = advert::build_advert_theory();
    auto k = explore( m.theory, m.initial );
    for ( const char* f : advert_formulas() )
    {
        auto tr = transform_for( m.theory, m.initial, parse_formula( f ) );
        auto r = testkit::check_projection( k, explore( tr->theory, tr->initial ) );
        if ( !r.ok )
            return { false, std::string{ "advert " } + f + ": " + r.why };
    }
    Rng rng{ 55 };
    for ( std::uint64_t seed = 5000; seed < 5000 + kProjectionTheories; ++seed )
    {
        auto rt = testkit::random_theory( seed );
        auto ko = explore( rt.theory, rt.initial );
        for ( int j = 0; j < 2; ++j )
        {
            auto f = j ? testkit::random_safety( rng, rt.props ) : testkit::random_response( rng, rt.props );
            auto tr = transform_for( rt.theory, rt.initial, f );
            auto r = testkit::check_projection( ko, explore( tr->theory, tr->initial ) );
            if ( !r.ok )
                return { false, "seed " + std::to_string( seed ) + ": " + r.why };
        }
    }
    return { true, "advert x4 formulas and " + std::to_string( kProjectionTheories ) + " random theories x2 specs" };
}

Outcome clock_capping()
{
    auto m = advert::build_advert_theory();
    std::string detail;
    for ( const char* f : advert_formulas() )
    {
        auto tr = transform_for( m.theory, m.initial, parse_formula( f ) );
        TimedKripke k;
        try
        {
            k = explore( tr->theory, tr->initial, default_max_states );
        }
        catch ( const StateSpaceOverflow& e )
        {
            return { false, std::string{ f } + ": " + e.what() };
        }
        auto r = testkit::check_clock_capped( k );
        if ( !r.ok )
            return { false, std::string{ f } + ": " + r.why };
        TimeValue mx = 0;
        for ( const auto& s : k.states )
            mx = std::max( mx, s.at( kClockId ).as<Clock>().clock );
        detail += ( detail.empty() ? "" : "; " ) + std::to_string( k.size() ) + " states, max clock " + std::to_string( mx ) +
                  "/" + std::to_string( tr->initial.at( kClockId ).as<Clock>().bound + 1 );
    }
    return { true, detail };
}

// Timer set and go rules without a timer guard: the go rule fires at t=0
// on its own, which the diagnostic must flag.
Theory violating_theory( Configuration& init )
{
    init = Configuration{ Object{ "t", Timer{ INF } }, Object{ "go", Port{ false } } };
    Theory th;
    th.add_rule( Rule{ "set", Trigger::timer_expiry, []( const Configuration& c ) {
                          std::vector<Configuration> out;
                          if ( c.at( "go" ).as<Port>().value )
                              return out;
                          Configuration n = c;
                          n.at( "go" ).as<Port>().value = true;
                          n.at( "t" ).as<Timer>().value = 5;
                          out.push_back( n );
                          return out;
                      } } );
    return th;
}

Outcome time_robustness()
{
    auto m = advert::build_advert_theory();
    auto k = explore( m.theory, m.initial );
    if ( auto r = check_time_robustness( m.theory, k ); !r.ok() )
        return { false, "advert: " + r.violations.front().message };
    for ( const char* f : { advert::formulas::G2, advert::formulas::G3_C1 } )
    {
        auto tr = transform_for( m.theory, m.initial, parse_formula( f ) );
        auto kt = explore( tr->theory, tr->initial );
        if ( auto r = check_time_robustness( tr->theory, kt ); !r.ok() )
            return { false, std::string{ f } + ": " + r.violations.front().message };
    }
    Configuration init;
    Theory bad = violating_theory( init );
    auto r = check_time_robustness( bad, explore( bad, init ) );
    if ( r.ok() )
        return { false, "violating theory not flagged" };
    return { true, "advert clean before and after response and safety transformation; violating theory: " +
                           std::to_string( r.violations.size() ) + " violation(s)" };
}

Outcome tick_stabilization()
{
    auto m = advert::build_advert_theory();
    std::size_t sweeps = 0;
    std::size_t warnings = 0;
    auto sweep = [&]( const Theory& th, const TimedKripke& k, const std::vector<std::string>& props ) -> std::optional<std::string> {
        for ( const auto& p : props )
        {
            auto r = check_tick_stabilizing( th, p, k, 1 );
            ++sweeps;
            warnings += r.warnings.size();
            if ( !r.ok() )
                return p + ": " + r.violations.front().message;
        }
        return std::nullopt;
    };
    auto k = explore( m.theory, m.initial );
    if ( auto e = sweep( m.theory, k, m.theory.labeling.names() ) )
        return { false, *e };
    for ( const char* f : advert_formulas() )
    {
        auto tr = transform_for( m.theory, m.initial, parse_formula( f ) );
        auto kt = explore( tr->theory, tr->initial );
        if ( auto e = sweep( tr->theory, kt, tr->theory.labeling.names() ) )
            return { false, std::string{ f } + ": " + *e };
    }
    if ( warnings )
        return { false, std::to_string( warnings ) + " ticks too long to sample" };
    return { true, std::to_string( sweeps ) + " proposition sweeps at 1 ms, no multiple changes" };
}

Outcome ltl_oracle()
{
    Rng rng{ 909 };
    int violated = 0;
    for ( int i = 0; i < kLtlCases; ++i )
    {
        auto k = testkit::random_kripke( rng );
        auto f = testkit::random_ltl( rng, 3 );
        auto v = model_check_ltl( k, f );
        std::string where = "case " + std::to_string( i ) + ": " + to_string( f );
        if ( v.holds() != testkit::ref_model_check( k, f ) )
            return { false, where + " disagrees with the reference checker" };
        if ( !testkit::simple_lassos_satisfy( k, f ) && v.holds() )
            return { false, where + " holds but a simple lasso violates it" };
        if ( !v.holds() )
        {
            ++violated;
            if ( !is_path_of( k, *v.counterexample ) ||
                 testkit::ref_eval( testkit::lasso_word( k, *v.counterexample ), f ) )
                return { false, where + " counterexample does not replay" };
        }
    }
    return { true, std::to_string( kLtlCases ) + " cases (" + std::to_string( violated ) + " violated, all replayed)" };
}

Outcome determinism()
{
    std::vector<std::string> formulas{ advert::formulas::G1, advert::formulas::G2, advert::formulas::G3_C1,
                                       advert::formulas::G3_C2, "[] <>[<=2200] imgChange",
                                       "[] ( ~reconfTriggeredInC1 \\/ [][<=250] in-C1 )" };
    for ( const auto& f : formulas )
    {
        Run a = check_advert( f );
        Run b = check_advert( f );
        if ( a.holds != b.holds || a.states != b.states || a.transitions != b.transitions || a.lasso != b.lasso )
            return { false, f + " differs between runs" };
    }
    advert::AdvertParams p;
    p.reconf_duration = 150;
    if ( check_advert( advert::formulas::G3_C1, p ).lasso != check_advert( advert::formulas::G3_C1, p ).lasso )
        return { false, "G3 with reconf 150 differs between runs" };
    return { true, "verdicts, state counts and counterexample lassos identical across two runs" };
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
            { "G2 reproduction", [] { return reproduce( { advert::formulas::G2 }, kG1G2Seconds ); } },
            { "G1 reproduction", [] { return reproduce( { advert::formulas::G1 }, kG1G2Seconds ); } },
            { "G3 reproduction", [] { return reproduce( { advert::formulas::G3_C1, advert::formulas::G3_C2 }, kG3Seconds ); } },
            { "theorem equivalence", theorem_equivalence },
            { "projection bisimulation", projection },
            { "clock capping", clock_capping },
            { "time-robustness diagnostic", time_robustness },
            { "tick-stabilization sweep", tick_stabilization },
            { "LTL checker oracle agreement", ltl_oracle },
            { "determinism", determinism },
    };
    int failed = 0;
    for ( std::size_t i = 0; i < criteria.size(); ++i )
    {
        Outcome o;
        try
        {
            o = criteria[i].second();
        }
        catch ( const std::exception& e )
        {
            o = { false, std::string{ "exception: " } + e.what() };
        }
        failed += !o.pass;
        std::cout << ( o.pass ? "PASS" : "FAIL" ) << " " << ( i + 1 ) << " " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    return failed ? 1 : 0;
}
