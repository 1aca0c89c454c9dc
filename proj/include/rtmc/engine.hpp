#pragma once

// Theories as guarded host functions, one-step successors under maximal time
// sampling, state-graph exploration and the time-robustness diagnostics.

#include "logic.hpp"

#include <cstdlib>
#include <deque>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <unordered_map>

namespace rtmc
{

enum class Trigger
{
    timer_expiry,
    consistency_restoring,
    transformation_internal
};

[[nodiscard]] inline const char* to_string( Trigger t ) noexcept
{
    switch ( t )
    {
    case Trigger::timer_expiry:
        return "timer-expiry";
    case Trigger::consistency_restoring:
        return "consistency-restoring";
    case Trigger::transformation_internal:
        return "transformation-internal";
    }
    return "?";
}

using RuleFn = std::function<std::vector<Configuration>( const Configuration& )>;

/// An instantaneous rewrite rule; `fn` yields one configuration per match.
struct Rule
{
    std::string label;
    Trigger trigger = Trigger::timer_expiry;
    RuleFn fn;
};

/// Applies a rule: duplicates and the unchanged input are dropped, and the
/// result is ordered by canonical key so it is reproducible.
[[nodiscard]] inline std::vector<Configuration> apply( const Rule& r, const Configuration& c )
{
    auto raw = r.fn( c );
    std::vector<std::pair<StateKey, Configuration>> keyed;
    StateKey self = canonicalize( c );
    for ( auto& s : raw )
    {
        auto k = canonicalize( s );
        if ( k != self )
            keyed.emplace_back( std::move( k ), std::move( s ) );
    }
    std::sort( keyed.begin(), keyed.end(), []( const auto& a, const auto& b ) { return a.first < b.first; } );
    keyed.erase( std::unique( keyed.begin(), keyed.end(), []( const auto& a, const auto& b ) { return a.first == b.first; } ),
                 keyed.end() );
    std::vector<Configuration> out;
    out.reserve( keyed.size() );
    for ( auto& [k, s] : keyed )
        out.push_back( std::move( s ) );
    return out;
}

/// `beh` equations per component id. Components without an entry keep
/// their state.
using BehaviorTable = std::map<ObjectId, std::function<void( Object& )>>;

inline void apply_beh( const BehaviorTable& beh, Object& component )
{
    if ( auto it = beh.find( component.id ); it != beh.end() )
        it->second( component );
}

class Theory
{
public:
    std::vector<Rule> rules;
    Labeling labeling;

    Theory() = default;
    Theory( std::vector<Rule> rs, Labeling lab ) : labeling{ std::move( lab ) }
    {
        for ( auto& r : rs )
            add_rule( std::move( r ) );
    }

    void add_rule( Rule r )
    {
        if ( find_rule( r.label ) )
            throw Error( "duplicate rule label '" + r.label + "'" );
        rules.push_back( std::move( r ) );
    }

    [[nodiscard]] const Rule* find_rule( std::string_view label ) const
    {
        for ( const auto& r : rules )
            if ( r.label == label )
                return &r;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// Generic component rules

namespace detail
{

struct PortRef
{
    std::size_t owner; ///< index of the component in the level
    Scope scope;
};

inline std::optional<PortRef> port_owner( const Configuration& level, const ObjectId& port, Scope s )
{
    auto objs = level.objects();
    for ( std::size_t i = 0; i < objs.size(); ++i )
        if ( is_component( objs[i] ) && component_port( objs[i], s, port ) )
            return PortRef{ i, s };
    return std::nullopt;
}

} // namespace detail

/// `[transmit]`: copy a provided port value along a connector to a required
/// port whose value differs, provided the receiving component is consistent,
/// then run the receiver's `beh`.
[[nodiscard]] inline Rule make_transmit_rule( BehaviorTable beh, std::string label = "transmit" )
{
    auto fn = [beh = std::move( beh )]( const Configuration& c ) {
        std::vector<Configuration> out;
        for ( const auto& o : c )
        {
            if ( !o.is<Connector>() )
                continue;
            const auto& conn = o.as<Connector>();
            auto src = detail::port_owner( c, conn.source, Scope::prov );
            auto dst = detail::port_owner( c, conn.target, Scope::req );
            if ( !src || !dst )
                continue;
            bool b = component_port( c.objects()[src->owner], Scope::prov, conn.source )->value;
            const Object& receiver = c.objects()[dst->owner];
            if ( component_port( receiver, Scope::req, conn.target )->value == b || !consistent_component( receiver ) )
                continue;
            Configuration next = c;
            Object& r = next.objects()[dst->owner];
            component_port( r, Scope::req, conn.target )->value = b;
            apply_beh( beh, r );
            out.push_back( std::move( next ) );
        }
        return out;
    };
    return Rule{ std::move( label ), Trigger::consistency_restoring, std::move( fn ) };
}

/// The three delegate-connector rules, for every hierarchical component at
/// the outermost level:
///  - `delegateIn`: outer required port -> inner component's required port
///  - `delegateOut`: inner component's provided port -> outer provided port
///  - `delegateInnerPort`: inner provided port -> inner required port of the
///    enclosing component, followed by the enclosing component's `beh`.
[[nodiscard]] inline std::vector<Rule> make_delegate_rules( BehaviorTable beh )
{
    enum class Kind
    {
        in,
        out,
        inner
    };
    auto make = [&beh]( Kind kind, std::string label ) {
        auto fn = [beh, kind]( const Configuration& c ) {
            std::vector<Configuration> out;
            auto objs = c.objects();
            for ( std::size_t hi = 0; hi < objs.size(); ++hi )
            {
                if ( !objs[hi].is<HierComponent>() )
                    continue;
                const Object& hobj = objs[hi];
                const auto& h = hobj.as<HierComponent>();
                for ( const auto& d : h.assembly )
                {
                    if ( !d.is<DelegateConnector>() )
                        continue;
                    const auto& dc = d.as<DelegateConnector>();
                    Configuration next;
                    switch ( kind )
                    {
                    case Kind::in:
                    {
                        const Port* outer = component_port( hobj, Scope::req, dc.source );
                        auto inner = detail::port_owner( h.assembly, dc.target, Scope::req );
                        if ( !outer || !inner )
                            continue;
                        if ( component_port( h.assembly.objects()[inner->owner], Scope::req, dc.target )->value ==
                             outer->value )
                            continue;
                        next = c;
                        auto& asmb = next.objects()[hi].as<HierComponent>().assembly;
                        Object& target = asmb.objects()[inner->owner];
                        component_port( target, Scope::req, dc.target )->value = outer->value;
                        apply_beh( beh, target );
                        break;
                    }
                    case Kind::out:
                    {
                        auto inner = detail::port_owner( h.assembly, dc.source, Scope::prov );
                        const Port* outer = component_port( hobj, Scope::prov, dc.target );
                        if ( !outer || !inner )
                            continue;
                        bool v = component_port( h.assembly.objects()[inner->owner], Scope::prov, dc.source )->value;
                        if ( outer->value == v )
                            continue;
                        next = c;
                        component_port( next.objects()[hi], Scope::prov, dc.target )->value = v;
                        break;
                    }
                    case Kind::inner:
                    {
                        auto inner = detail::port_owner( h.assembly, dc.source, Scope::prov );
                        const Port* ireq = component_port( hobj, Scope::innerreq, dc.target );
                        if ( !ireq || !inner )
                            continue;
                        bool v = component_port( h.assembly.objects()[inner->owner], Scope::prov, dc.source )->value;
                        if ( ireq->value == v )
                            continue;
                        next = c;
                        Object& hn = next.objects()[hi];
                        component_port( hn, Scope::innerreq, dc.target )->value = v;
                        apply_beh( beh, hn );
                        break;
                    }
                    }
                    out.push_back( std::move( next ) );
                }
            }
            return out;
        };
        return Rule{ std::move( label ), Trigger::consistency_restoring, std::move( fn ) };
    };
    return { make( Kind::in, "delegateIn" ), make( Kind::out, "delegateOut" ), make( Kind::inner, "delegateInnerPort" ) };
}

/// Applies `r` inside the assembly of the hierarchical component `path`
/// (found at any depth), leaving the rest of the configuration unchanged.
/// The lifted label is `label@path`.
[[nodiscard]] inline Rule lift_rule( const Rule& r, const ObjectId& path )
{
    auto fn = [inner = r.fn, path]( const Configuration& c ) {
        const Object* h = find_object( c, path );
        if ( !h || !h->is<HierComponent>() )
            throw Error( "lift_rule: '" + path.str() + "' is not a hierarchical component" );
        std::vector<Configuration> out;
        for ( auto& asmb : inner( h->as<HierComponent>().assembly ) )
        {
            Configuration next = c;
            find_object( next, path )->as<HierComponent>().assembly = std::move( asmb );
            out.push_back( std::move( next ) );
        }
        return out;
    };
    return Rule{ r.label + "@" + path.str(), r.trigger, std::move( fn ) };
}

/// Checked variant of lift_rule: validates the path against a configuration
/// up front.
[[nodiscard]] inline Rule lift_rule( const Rule& r, const ObjectId& path, const Configuration& reference )
{
    const Object* h = find_object( reference, path );
    if ( !h || !h->is<HierComponent>() )
        throw Error( "lift_rule: '" + path.str() + "' is not a hierarchical component" );
    return lift_rule( r, path );
}

// ---------------------------------------------------------------------------
// Successors

inline constexpr std::string_view tick_label = "tick";
inline constexpr std::string_view eps_label = "eps";

struct Successor
{
    std::string label;
    TimeValue duration = 0;
    Configuration config;
};

[[nodiscard]] inline std::vector<std::pair<std::string, Configuration>> instantaneous_successors( const Theory& th,
                                                                                                 const Configuration& c )
{
    std::vector<std::pair<std::string, Configuration>> out;
    for ( const auto& r : th.rules )
        for ( auto& s : apply( r, c ) )
            out.emplace_back( r.label, std::move( s ) );
    return out;
}

/// Maximal time sampling: advance by exactly mte, iff the configuration is
/// consistent and 0 < mte < INF.
[[nodiscard]] inline std::optional<std::pair<TimeValue, Configuration>> tick_successor( const Configuration& c )
{
    TimeInf m = mte( c );
    if ( m.is_inf() || m.value() == 0 || !consistent( c ) )
        return std::nullopt;
    return std::pair{ m.value(), delta( c, m.value() ) };
}

[[nodiscard]] inline std::optional<std::pair<TimeValue, Configuration>> tick_successor( const Theory&,
                                                                                        const Configuration& c )
{
    return tick_successor( c );
}

/// All one-step rewrites; a configuration with none gets a zero-duration
/// self-loop.
[[nodiscard]] inline std::vector<Successor> successors( const Theory& th, const Configuration& c )
{
    std::vector<Successor> out;
    for ( auto& [label, s] : instantaneous_successors( th, c ) )
        out.push_back( { std::move( label ), 0, std::move( s ) } );
    if ( auto t = tick_successor( c ) )
        out.push_back( { std::string{ tick_label }, t->first, std::move( t->second ) } );
    if ( out.empty() )
        out.push_back( { std::string{ eps_label }, 0, c } );
    return out;
}

// ---------------------------------------------------------------------------
// Exploration

using StateIndex = std::size_t;

struct Transition
{
    StateIndex from = 0;
    StateIndex to = 0;
    TimeValue duration = 0;
    std::string label;
};

/// Explored finite state graph. Labels are bitmasks over `prop_names`.
struct TimedKripke
{
    std::vector<Configuration> states;
    std::vector<std::uint64_t> labels;
    std::vector<std::string> prop_names;
    StateIndex initial = 0;
    std::vector<Transition> transitions;
    std::vector<std::vector<std::size_t>> out; ///< transition indices per state

    [[nodiscard]] std::size_t size() const noexcept { return states.size(); }

    [[nodiscard]] std::optional<std::size_t> prop_index( std::string_view name ) const
    {
        for ( std::size_t i = 0; i < prop_names.size(); ++i )
            if ( prop_names[i] == name )
                return i;
        return std::nullopt;
    }

    [[nodiscard]] bool holds( StateIndex s, std::size_t prop ) const { return ( labels[s] >> prop ) & 1U; }

    [[nodiscard]] bool holds( StateIndex s, std::string_view name ) const
    {
        auto i = prop_index( name );
        if ( !i )
            throw UnknownPropositionError( std::string{ name } );
        return holds( s, *i );
    }

    [[nodiscard]] std::set<std::string> label_set( StateIndex s ) const
    {
        std::set<std::string> out_set;
        for ( std::size_t i = 0; i < prop_names.size(); ++i )
            if ( holds( s, i ) )
                out_set.insert( prop_names[i] );
        return out_set;
    }

    /// Adds a transition unless an identical one exists.
    void add_transition( Transition t )
    {
        for ( auto i : out[t.from] )
        {
            const auto& e = transitions[i];
            if ( e.to == t.to && e.duration == t.duration && e.label == t.label )
                return;
        }
        out[t.from].push_back( transitions.size() );
        transitions.push_back( std::move( t ) );
    }
};

class StateSpaceOverflow : public Error
{
    std::size_t _count;

public:
    StateSpaceOverflow( std::size_t count, const std::string& sample )
            : Error{ "state space exceeds " + std::to_string( count ) + " states; sample frontier state:\n" + sample },
              _count{ count }
    {
    }
    [[nodiscard]] std::size_t count() const noexcept { return _count; }
};

inline constexpr std::size_t default_max_states = 1'000'000;

/// `RTMC_MAX_STATES` from the environment, else the built-in default.
[[nodiscard]] inline std::size_t max_states_from_env()
{
    if ( const char* v = std::getenv( "RTMC_MAX_STATES" ) )
    {
        std::size_t n = 0;
        auto sv = std::string_view{ v };
        auto [ptr, ec] = std::from_chars( sv.data(), sv.data() + sv.size(), n );
        if ( ec == std::errc{} && ptr == sv.data() + sv.size() && n > 0 )
            return n;
    }
    return default_max_states;
}

[[nodiscard]] inline std::uint64_t label_state( const Labeling& lab, const Configuration& c )
{
    std::uint64_t mask = 0;
    const auto& defs = lab.defs();
    for ( std::size_t i = 0; i < defs.size(); ++i )
        if ( defs[i].pred( c ) )
            mask |= std::uint64_t{ 1 } << i;
    return mask;
}

/// Breadth-first exploration from `initial` until closure.
[[nodiscard]] inline TimedKripke explore( const Theory& th, const Configuration& initial,
                                         std::size_t max_states = default_max_states )
{
    if ( max_states == 0 )
        throw Error( "max_states must be > 0" );
    if ( th.labeling.defs().size() > 64 )
        throw Error( "at most 64 propositions are supported" );

    TimedKripke k;
    k.prop_names = th.labeling.names();
    std::unordered_map<StateKey, StateIndex> index;

    auto intern = [&]( Configuration c ) -> StateIndex {
        auto key = canonicalize( c );
        if ( auto it = index.find( key ); it != index.end() )
            return it->second;
        if ( k.states.size() >= max_states )
            throw StateSpaceOverflow( max_states, to_string( c ) );
        StateIndex id = k.states.size();
        index.emplace( std::move( key ), id );
        k.labels.push_back( label_state( th.labeling, c ) );
        k.states.push_back( std::move( c ) );
        k.out.emplace_back();
        return id;
    };

    k.initial = intern( initial );
    for ( StateIndex s = 0; s < k.states.size(); ++s )
    {
        // successors() may reallocate states; take a copy of the source.
        auto succ = successors( th, Configuration{ k.states[s] } );
        for ( auto& sc : succ )
        {
            StateIndex t = intern( std::move( sc.config ) );
            k.add_transition( { s, t, sc.duration, std::move( sc.label ) } );
        }
    }
    return k;
}

// ---------------------------------------------------------------------------
// Diagnostics

struct Diagnostic
{
    StateIndex state = 0;
    std::string rule;
    std::string message;
};

struct DiagnosticReport
{
    std::vector<Diagnostic> violations;
    std::vector<std::string> warnings;

    [[nodiscard]] bool ok() const noexcept { return violations.empty(); }
};

[[nodiscard]] inline bool has_zero_timer( const Configuration& c )
{
    bool found = false;
    for_each_object( c, [&]( const Object& o ) {
        if ( o.is<Timer>() )
            found |= o.as<Timer>().value == TimeInf{ 0 };
        else if ( o.is<OnOffTimer>() )
            found |= o.as<OnOffTimer>().value == TimeInf{ 0 };
        else if ( o.is<DelayTimer>() )
            found |= o.as<DelayTimer>().value == TimeInf{ 0 };
    } );
    return found;
}

/// Removes top-level Clock objects.
[[nodiscard]] inline Configuration without_clocks( const Configuration& c )
{
    Configuration out;
    for ( const auto& o : c )
        if ( !o.is<Clock>() )
            out.insert( o );
    return out;
}

/// Sufficient condition for time-robustness: every instantaneous transition
/// leaves a state with an expired timer or an inconsistent state.
[[nodiscard]] inline DiagnosticReport check_time_robustness( const Theory& th, const TimedKripke& k )
{
    DiagnosticReport rep;
    for ( const auto& t : k.transitions )
    {
        if ( t.label == tick_label || t.label == eps_label )
            continue;
        const Rule* r = th.find_rule( t.label );
        if ( !r )
        {
            rep.violations.push_back( { t.from, t.label, "transition label names no rule of the theory" } );
            continue;
        }
        const Configuration& src = k.states[t.from];
        bool ok = false;
        switch ( r->trigger )
        {
        case Trigger::timer_expiry:
            ok = has_zero_timer( src );
            break;
        case Trigger::consistency_restoring:
            ok = !consistent( src );
            break;
        case Trigger::transformation_internal:
        {
            auto proj = without_clocks( src );
            ok = has_zero_timer( proj ) || !consistent( proj );
            break;
        }
        }
        if ( !ok )
            rep.violations.push_back(
                    { t.from, t.label, std::string{ "rule fired without its trigger (" } + to_string( r->trigger ) + ")" } );
    }
    return rep;
}

inline constexpr TimeValue tick_sweep_budget = 100'000;

/// Samples `prop` along each tick at t = 0, step, 2*step, ..., d and reports
/// ticks where its value changes more than once.
[[nodiscard]] inline DiagnosticReport check_tick_stabilizing( const Theory& th, std::string_view prop,
                                                              const TimedKripke& k, TimeValue step = 1 )
{
    if ( step == 0 )
        throw Error( "step must be > 0" );
    DiagnosticReport rep;
    for ( const auto& t : k.transitions )
    {
        if ( t.label != tick_label )
            continue;
        if ( t.duration / step > tick_sweep_budget )
        {
            rep.warnings.push_back( "skipped tick from state " + std::to_string( t.from ) + " of duration " +
                                    std::to_string( t.duration ) );
            continue;
        }
        const Configuration& src = k.states[t.from];
        bool prev = eval_prop( th.labeling, prop, src );
        int changes = 0;
        for ( TimeValue x = step;; x += step )
        {
            TimeValue at = std::min( x, t.duration );
            bool v = eval_prop( th.labeling, prop, delta( src, at ) );
            changes += v != prev;
            prev = v;
            if ( at == t.duration )
                break;
        }
        if ( changes > 1 )
            rep.violations.push_back( { t.from, std::string{ prop },
                                        "changes " + std::to_string( changes ) + " times during one tick" } );
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Export and simulation

inline void write_dot( std::ostream& os, const TimedKripke& k )
{
    auto esc = []( const std::string& s ) {
        std::string out;
        for ( char c : s )
        {
            if ( c == '"' || c == '\\' )
                out += '\\';
            out += c;
        }
        return out;
    };
    os << "digraph timed_kripke {\n";
    for ( StateIndex s = 0; s < k.size(); ++s )
    {
        std::string labels;
        for ( const auto& p : k.label_set( s ) )
            labels += ( labels.empty() ? "" : "," ) + p;
        os << "  s" << s << " [label=\"" << s << "\\n{" << esc( labels ) << "}\"" << ( s == k.initial ? ", peripheries=2" : "" )
           << "];\n";
    }
    for ( const auto& t : k.transitions )
        os << "  s" << t.from << " -> s" << t.to << " [label=\"" << esc( t.label ) << "/" << t.duration << "\"];\n";
    os << "}\n";
}

struct TraceStep
{
    std::string label;
    TimeValue duration = 0;
    Configuration config; ///< state reached by this step
};

struct Trace
{
    Configuration initial;
    std::vector<TraceStep> steps;

    [[nodiscard]] TimeValue elapsed() const
    {
        TimeValue sum = 0;
        for ( const auto& s : steps )
            sum += s.duration;
        return sum;
    }
};

/// Random walk resolving nondeterminism with a seeded generator.
[[nodiscard]] inline Trace simulate( const Theory& th, const Configuration& initial, std::size_t steps,
                                     std::uint64_t seed )
{
    std::mt19937_64 rng{ seed };
    Trace tr{ initial, {} };
    Configuration cur = initial;
    for ( std::size_t i = 0; i < steps; ++i )
    {
        auto succ = successors( th, cur );
        std::uniform_int_distribution<std::size_t> pick{ 0, succ.size() - 1 };
        auto& s = succ[pick( rng )];
        cur = s.config;
        tr.steps.push_back( { std::move( s.label ), s.duration, std::move( s.config ) } );
    }
    return tr;
}

} // namespace rtmc
