#pragma once

// Graph-level property checks shared by the unit and acceptance suites.

#include "rtmc/transform.hpp"

#include <sstream>

namespace rtmc::testkit
{

struct CheckResult
{
    bool ok = true;
    std::string why;

    explicit operator bool() const noexcept { return ok; }

    static CheckResult fail( std::string why ) { return { false, std::move( why ) }; }
};

/// Rule label of the original theory behind a wrapped `label.rN` variant.
inline std::string base_label( const std::string& label )
{
    auto dot = label.rfind( '.' );
    if ( dot != std::string::npos && label.size() == dot + 3 && label[dot + 1] == 'r' &&
         std::isdigit( static_cast<unsigned char>( label[dot + 2] ) ) )
        return label.substr( 0, dot );
    return label;
}

/// Erases the clock from every transformed state and checks that the quotient
/// is the original graph: same states, same labels over the original
/// propositions, same (from, to, duration, rule) edges, and every original
/// edge lifts from every transformed state above its source.
inline CheckResult check_projection( const TimedKripke& orig, const TimedKripke& trans )
{
    std::unordered_map<StateKey, StateIndex> index;
    for ( StateIndex s = 0; s < orig.size(); ++s )
        index.emplace( canonicalize( orig.states[s] ), s );

    std::vector<StateIndex> proj( trans.size() );
    std::vector<char> hit( orig.size(), 0 );
    for ( StateIndex s = 0; s < trans.size(); ++s )
    {
        auto it = index.find( canonicalize( erase_clock( trans.states[s] ) ) );
        if ( it == index.end() )
            return CheckResult::fail( "transformed state " + std::to_string( s ) + " projects outside the original graph" );
        proj[s] = it->second;
        hit[it->second] = 1;
        for ( const auto& p : orig.prop_names )
            if ( orig.holds( it->second, p ) != trans.holds( s, p ) )
                return CheckResult::fail( "label of '" + p + "' differs at transformed state " + std::to_string( s ) );
    }
    if ( proj[trans.initial] != orig.initial )
        return CheckResult::fail( "initial states do not correspond" );
    for ( StateIndex s = 0; s < orig.size(); ++s )
        if ( !hit[s] )
            return CheckResult::fail( "original state " + std::to_string( s ) + " has no transformed preimage" );

    using Edge = std::tuple<StateIndex, StateIndex, TimeValue, std::string>;
    std::set<Edge> orig_edges;
    for ( const auto& t : orig.transitions )
        orig_edges.emplace( t.from, t.to, t.duration, t.label );

    std::set<Edge> proj_edges;
    for ( StateIndex s = 0; s < trans.size(); ++s )
    {
        std::set<Edge> here;
        for ( auto ti : trans.out[s] )
        {
            const auto& t = trans.transitions[ti];
            Edge e{ proj[t.from], proj[t.to], t.duration, base_label( t.label ) };
            if ( !orig_edges.contains( e ) )
                return CheckResult::fail( "transformed edge from " + std::to_string( s ) + " labelled " + t.label +
                                          " has no original counterpart" );
            here.insert( e );
            proj_edges.insert( e );
        }
        for ( auto ti : orig.out[proj[s]] )
        {
            const auto& t = orig.transitions[ti];
            if ( !here.contains( Edge{ t.from, t.to, t.duration, t.label } ) )
                return CheckResult::fail( "original edge " + t.label + " from " + std::to_string( t.from ) +
                                          " does not lift at transformed state " + std::to_string( s ) );
        }
    }
    if ( proj_edges != orig_edges )
        return CheckResult::fail( "edge sets differ after projection" );
    return {};
}

/// Every reachable clock value stays within bound + 1.
inline CheckResult check_clock_capped( const TimedKripke& trans, const ObjectId& clock = kClockId )
{
    for ( StateIndex s = 0; s < trans.size(); ++s )
    {
        const Object* o = trans.states[s].find( clock );
        if ( !o )
            return CheckResult::fail( "state " + std::to_string( s ) + " has no clock" );
        const auto& c = o->as<Clock>();
        if ( c.clock > c.bound + 1 )
            return CheckResult::fail( "clock " + std::to_string( c.clock ) + " exceeds bound " + std::to_string( c.bound ) +
                                      "+1 in state " + std::to_string( s ) );
    }
    return {};
}

/// Fingerprint of a transition system, for determinism checks.
inline std::string fingerprint( const TimedKripke& k )
{
    std::ostringstream os;
    os << k.size() << ';' << k.initial << ';';
    for ( const auto& s : k.states )
        os << canonicalize( s ) << '|';
    for ( const auto& t : k.transitions )
        os << t.from << '>' << t.to << '/' << t.duration << '/' << t.label << ';';
    return os.str();
}

} // namespace rtmc::testkit
