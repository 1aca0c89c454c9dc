#pragma once

// Clock-based theory transformations reducing MTL response and safety
// properties to LTL over a clock-augmented theory.

#include "engine.hpp"

namespace rtmc
{

inline const ObjectId kClockId{ "__mtl_clock" };

struct ResponseSpec
{
    std::vector<BoundedLiteral> pairs;

    [[nodiscard]] TimeValue b_max() const
    {
        TimeValue m = 0;
        for ( const auto& p : pairs )
            m = std::max( m, p.bound );
        return m;
    }
};

struct SafetySpec
{
    Literal p;
    Literal q;
    TimeValue b = 0;
};

/// How the overlapping safety rules are resolved. `priority` makes the clock
/// evolution deterministic; `literal` keeps both overlapping rules.
enum class SafetyOverlap
{
    priority,
    literal
};

struct TransformResult
{
    Theory theory;
    Configuration initial;
    Formula ltl;
    ObjectId clock_id;
};

/// The configuration without the transformation clock.
[[nodiscard]] inline Configuration erase_clock( const Configuration& c, const ObjectId& clock = kClockId )
{
    Configuration out = c;
    out.erase( clock );
    return out;
}

namespace detail
{

inline Formula clock_leq( TimeValue b )
{
    return fm::prop( "clockLeq(" + std::to_string( b ) + ")" );
}

inline void check_no_clock_collision( const Configuration& initial )
{
    if ( find_object( initial, kClockId ) )
        throw Error( "object id '" + kClockId.str() + "' is reserved for the transformation clock" );
}

inline Labeling with_clock_props( const Labeling& lab, const std::vector<TimeValue>& bounds )
{
    Labeling out = lab;
    for ( auto b : bounds )
    {
        std::string name = "clockLeq(" + std::to_string( b ) + ")";
        if ( out.contains( name ) )
            continue;
        out.add( { name, [b]( const Configuration& c ) {
                      const Object* clk = c.find( kClockId );
                      return clk && clk->as<Clock>().clock <= b;
                  } } );
    }
    return out;
}

/// Decides the clock of a successor, or nullopt if the variant does not
/// apply. Arguments: source clock, source projection, successor projection.
using ClockStep = std::function<std::optional<Clock>( const Clock&, const Configuration&, const Configuration& )>;

inline Rule wrap_rule( const Rule& orig, std::string suffix, ClockStep step )
{
    auto fn = [orig_fn = orig.fn, orig_label = orig.label, step = std::move( step )]( const Configuration& c ) {
        const Object* clk = c.find( kClockId );
        if ( !clk || !clk->is<Clock>() )
            throw Error( "transformed rule applied to a configuration without its clock" );
        const Clock clock = clk->as<Clock>();
        Configuration src = erase_clock( c );
        std::vector<Configuration> out;
        for ( auto& s : apply( Rule{ orig_label, Trigger::timer_expiry, orig_fn }, src ) )
            if ( auto next = step( clock, src, s ) )
            {
                s.insert( Object{ kClockId, *next } );
                out.push_back( std::move( s ) );
            }
        return out;
    };
    return Rule{ orig.label + "." + std::move( suffix ), Trigger::transformation_internal, std::move( fn ) };
}

inline Clock clock_at( TimeValue value, ClockStatus st, TimeValue bound )
{
    return Clock{ value, st, bound };
}

} // namespace detail

/// Response transformation for `[] \/_i <>[<=b_i] q_i`. Every rule becomes
/// four variants `.r1`-`.r4` that switch the clock on when no q_i holds in
/// the successor and off when some q_i is met within its bound.
[[nodiscard]] inline TransformResult transform_response( const Theory& th, const Configuration& initial,
                                                         const ResponseSpec& spec )
{
    if ( spec.pairs.empty() )
        throw Error( "response spec needs at least one disjunct" );
    for ( const auto& p : spec.pairs )
    {
        if ( p.bound == 0 )
            throw Error( "response bounds must be > 0" );
        if ( !has_prop( th.labeling, p.lit.prop ) )
            throw UnknownPropositionError( p.lit.prop );
    }
    detail::check_no_clock_collision( initial );

    const TimeValue bmax = spec.b_max();
    const Labeling lab = th.labeling;
    auto any_q = [lab, spec]( const Configuration& s ) {
        return std::ranges::any_of( spec.pairs, [&]( const auto& p ) { return eval_literal( lab, p.lit, s ); } );
    };
    auto within = [lab, spec]( const Configuration& s, TimeValue t ) {
        return std::ranges::any_of( spec.pairs,
                                    [&]( const auto& p ) { return eval_literal( lab, p.lit, s ) && t <= p.bound; } );
    };

    TransformResult res;
    res.clock_id = kClockId;
    std::vector<TimeValue> bounds;
    for ( const auto& p : spec.pairs )
        bounds.push_back( p.bound );
    res.theory.labeling = detail::with_clock_props( th.labeling, bounds );

    for ( const auto& r : th.rules )
    {
        res.theory.add_rule( detail::wrap_rule( r, "r1", [any_q]( const Clock& k, const Configuration&, const Configuration& s ) {
            return k.status == ClockStatus::off && any_q( s ) ? std::optional{ k } : std::nullopt;
        } ) );
        res.theory.add_rule( detail::wrap_rule( r, "r2", [any_q, bmax]( const Clock& k, const Configuration&, const Configuration& s ) {
            return k.status == ClockStatus::off && !any_q( s ) ? std::optional{ detail::clock_at( 0, ClockStatus::on, bmax ) }
                                                               : std::nullopt;
        } ) );
        res.theory.add_rule( detail::wrap_rule( r, "r3", [within]( const Clock& k, const Configuration&, const Configuration& s ) {
            return k.status == ClockStatus::on && !within( s, k.clock ) ? std::optional{ k } : std::nullopt;
        } ) );
        res.theory.add_rule( detail::wrap_rule( r, "r4", [within, bmax]( const Clock& k, const Configuration&, const Configuration& s ) {
            return k.status == ClockStatus::on && within( s, k.clock )
                           ? std::optional{ detail::clock_at( 0, ClockStatus::off, bmax ) }
                           : std::nullopt;
        } ) );
    }

    res.initial = initial;
    res.initial.insert( Object{ kClockId, detail::clock_at( 0, any_q( initial ) ? ClockStatus::off : ClockStatus::on, bmax ) } );

    std::vector<Formula> ds;
    for ( const auto& p : spec.pairs )
        ds.push_back( fm::eventually( fm::conj( p.lit.formula(), detail::clock_leq( p.bound ) ) ) );
    res.ltl = fm::always( fm::disj_all( ds ) );
    return res;
}

/// Safety transformation for `[] (p \/ [][<=b] q)`. The clock starts when a
/// state violating p is left for a p /\ q state and keeps counting while
/// p /\ q holds.
[[nodiscard]] inline TransformResult transform_safety( const Theory& th, const Configuration& initial,
                                                       const SafetySpec& spec,
                                                       SafetyOverlap overlap = SafetyOverlap::priority )
{
    if ( spec.b == 0 )
        throw Error( "safety bound must be > 0" );
    for ( const auto* l : { &spec.p, &spec.q } )
        if ( !has_prop( th.labeling, l->prop ) )
            throw UnknownPropositionError( l->prop );
    detail::check_no_clock_collision( initial );

    const TimeValue b = spec.b;
    const Labeling lab = th.labeling;
    auto p = [lab, spec]( const Configuration& s ) { return eval_literal( lab, spec.p, s ); };
    auto q = [lab, spec]( const Configuration& s ) { return eval_literal( lab, spec.q, s ); };

    TransformResult res;
    res.clock_id = kClockId;
    res.theory.labeling = detail::with_clock_props( th.labeling, { b } );

    const Clock off0 = detail::clock_at( 0, ClockStatus::off, b );
    const Clock on0 = detail::clock_at( 0, ClockStatus::on, b );

    for ( const auto& r : th.rules )
    {
        if ( overlap == SafetyOverlap::priority )
        {
            auto keep = [p, q]( const Clock& k, const Configuration&, const Configuration& s ) {
                return k.status == ClockStatus::on && p( s ) && q( s );
            };
            auto start = [p, q]( const Clock& k, const Configuration& src, const Configuration& s ) {
                return k.status == ClockStatus::off && !p( src ) && q( src ) && p( s ) && q( s );
            };
            res.theory.add_rule( detail::wrap_rule( r, "r1", [keep, start, off0]( const Clock& k, const Configuration& src, const Configuration& s ) {
                return !keep( k, src, s ) && !start( k, src, s ) ? std::optional{ off0 } : std::nullopt;
            } ) );
            res.theory.add_rule( detail::wrap_rule( r, "r2", [start, on0]( const Clock& k, const Configuration& src, const Configuration& s ) {
                return start( k, src, s ) ? std::optional{ on0 } : std::nullopt;
            } ) );
            res.theory.add_rule( detail::wrap_rule( r, "r3", [keep]( const Clock& k, const Configuration& src, const Configuration& s ) {
                return keep( k, src, s ) ? std::optional{ k } : std::nullopt;
            } ) );
        }
        else
        {
            auto off_cond = [p, q]( const Configuration& src, const Configuration& s ) {
                return !p( s ) || !q( s ) || p( src ) || !q( src );
            };
            res.theory.add_rule( detail::wrap_rule( r, "r1", [off_cond, off0]( const Clock&, const Configuration& src, const Configuration& s ) {
                return off_cond( src, s ) ? std::optional{ off0 } : std::nullopt;
            } ) );
            res.theory.add_rule( detail::wrap_rule( r, "r2", [off_cond, on0]( const Clock& k, const Configuration& src, const Configuration& s ) {
                return k.status == ClockStatus::off && !off_cond( src, s ) ? std::optional{ on0 } : std::nullopt;
            } ) );
            res.theory.add_rule( detail::wrap_rule( r, "r3", [p, q]( const Clock& k, const Configuration&, const Configuration& s ) {
                return k.status == ClockStatus::on && p( s ) && q( s ) ? std::optional{ k } : std::nullopt;
            } ) );
        }
    }

    res.initial = initial;
    res.initial.insert( Object{ kClockId, off0 } );
    res.ltl = fm::always( fm::disj( spec.p.formula(), fm::weak_until( spec.q.formula(), fm::neg( detail::clock_leq( b ) ) ) ) );
    return res;
}

[[nodiscard]] inline ResponseSpec response_spec( const ResponseClass& c )
{
    return ResponseSpec{ c.disjuncts };
}

[[nodiscard]] inline SafetySpec safety_spec( const SafetyClass& c )
{
    return SafetySpec{ c.p, c.q, c.bound };
}

/// Transforms according to the class of f. Returns nullopt for pure LTL;
/// throws UnsupportedClass reasons as FormulaError.
[[nodiscard]] inline std::optional<TransformResult> transform_for( const Theory& th, const Configuration& initial,
                                                                   const Formula& f,
                                                                   SafetyOverlap overlap = SafetyOverlap::priority )
{
    auto cls = classify_mtl( f );
    if ( auto* r = std::get_if<ResponseClass>( &cls ) )
        return transform_response( th, initial, response_spec( *r ) );
    if ( auto* s = std::get_if<SafetyClass>( &cls ) )
        return transform_safety( th, initial, safety_spec( *s ), overlap );
    if ( auto* u = std::get_if<UnsupportedClass>( &cls ) )
        throw FormulaError( "unsupported formula: " + u->reason );
    return std::nullopt;
}

} // namespace rtmc
