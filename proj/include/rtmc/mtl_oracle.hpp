#pragma once

// Direct MTL semantics on ultimately periodic timed words, and an exhaustive
// checker for the response and safety shapes over explored graphs. This is
// the reference the clock transformations are tested against.

#include "ltl_mc.hpp"

#include <numeric>
#include <unordered_set>

namespace rtmc
{

/// Ultimately periodic timed word: the suffix from `loop_start` repeats.
/// `durations[i]` is the time spent going from position i to its successor.
struct TimedLassoWord
{
    std::vector<std::set<std::string>> labels;
    std::vector<TimeValue> durations;
    std::size_t loop_start = 0;

    [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
    [[nodiscard]] std::size_t next( std::size_t i ) const noexcept { return i + 1 < size() ? i + 1 : loop_start; }

    [[nodiscard]] TimeValue loop_duration() const
    {
        return std::accumulate( durations.begin() + static_cast<std::ptrdiff_t>( loop_start ), durations.end(),
                                TimeValue{ 0 } );
    }

    void validate() const
    {
        if ( labels.empty() || labels.size() != durations.size() || loop_start >= labels.size() )
            throw Error( "malformed timed lasso word" );
    }
};

[[nodiscard]] inline TimedLassoWord word_of( const TimedKripke& k, const Lasso& l )
{
    TimedLassoWord w;
    for ( const auto& s : l.prefix )
    {
        w.labels.push_back( k.label_set( s.state ) );
        w.durations.push_back( s.duration );
    }
    w.loop_start = w.labels.size();
    for ( const auto& s : l.loop )
    {
        w.labels.push_back( k.label_set( s.state ) );
        w.durations.push_back( s.duration );
    }
    w.validate();
    return w;
}

/// The same infinite word with the loop copied `factor` times into the
/// prefix.
[[nodiscard]] inline TimedLassoWord unroll( const TimedLassoWord& w, std::size_t factor )
{
    w.validate();
    TimedLassoWord out;
    out.labels.assign( w.labels.begin(), w.labels.begin() + static_cast<std::ptrdiff_t>( w.loop_start ) );
    out.durations.assign( w.durations.begin(), w.durations.begin() + static_cast<std::ptrdiff_t>( w.loop_start ) );
    for ( std::size_t c = 0; c < factor; ++c )
        for ( std::size_t i = w.loop_start; i < w.size(); ++i )
        {
            out.labels.push_back( w.labels[i] );
            out.durations.push_back( w.durations[i] );
        }
    out.loop_start = out.labels.size();
    out.labels.insert( out.labels.end(), w.labels.begin() + static_cast<std::ptrdiff_t>( w.loop_start ), w.labels.end() );
    out.durations.insert( out.durations.end(), w.durations.begin() + static_cast<std::ptrdiff_t>( w.loop_start ),
                          w.durations.end() );
    return out;
}

/// Sum of all bounds occurring in f.
[[nodiscard]] inline TimeValue bound_sum( const Formula& f )
{
    if ( !f )
        return 0;
    return ( is_bounded( f->op ) ? f->bound : 0 ) + bound_sum( f->lhs ) + bound_sum( f->rhs );
}

namespace detail
{

using Truth = std::vector<char>;

inline Truth eval_positions( const TimedLassoWord& w, const Formula& f )
{
    const std::size_t m = w.size();
    auto fixpoint = [&]( const Truth& hold, const Truth& release, bool greatest ) {
        // X = release \/ (hold /\ X o next)
        Truth x( m, greatest ? 1 : 0 );
        for ( bool changed = true; changed; )
        {
            changed = false;
            for ( std::size_t k = m; k-- > 0; )
            {
                char v = release[k] || ( hold[k] && x[w.next( k )] );
                if ( v != x[k] )
                {
                    x[k] = v;
                    changed = true;
                }
            }
        }
        return x;
    };

    switch ( f->op )
    {
    case Op::True:
        return Truth( m, 1 );
    case Op::False:
        return Truth( m, 0 );
    case Op::Prop:
    {
        Truth t( m );
        for ( std::size_t i = 0; i < m; ++i )
            t[i] = w.labels[i].contains( f->name );
        return t;
    }
    case Op::Not:
    {
        Truth t = eval_positions( w, f->lhs );
        for ( auto& v : t )
            v = !v;
        return t;
    }
    case Op::And:
    case Op::Or:
    case Op::Implies:
    {
        Truth a = eval_positions( w, f->lhs );
        Truth b = eval_positions( w, f->rhs );
        for ( std::size_t i = 0; i < m; ++i )
            a[i] = f->op == Op::And ? ( a[i] && b[i] ) : f->op == Op::Or ? ( a[i] || b[i] ) : ( !a[i] || b[i] );
        return a;
    }
    case Op::Until:
    case Op::WeakUntil:
        return fixpoint( eval_positions( w, f->lhs ), eval_positions( w, f->rhs ), f->op == Op::WeakUntil );
    case Op::Always:
        return fixpoint( eval_positions( w, f->lhs ), Truth( m, 0 ), true );
    case Op::Eventually:
        return fixpoint( Truth( m, 1 ), eval_positions( w, f->lhs ), false );
    case Op::BoundedEventually:
    case Op::BoundedAlways:
    {
        // <>[<=b] g at i: some j reached with elapsed time <= b satisfies g.
        bool ev = f->op == Op::BoundedEventually;
        Truth g = eval_positions( w, f->lhs );
        if ( !ev )
            for ( auto& v : g )
                v = !v;
        const bool zeno = w.loop_duration() == 0;
        Truth t( m, 0 );
        for ( std::size_t i = 0; i < m; ++i )
        {
            std::size_t j = i;
            TimeValue elapsed = 0;
            for ( std::size_t steps = 0;; ++steps )
            {
                if ( g[j] )
                {
                    t[i] = 1;
                    break;
                }
                elapsed += w.durations[j];
                if ( elapsed > f->bound || ( zeno && steps > m ) )
                    break;
                j = w.next( j );
            }
        }
        if ( !ev )
            for ( auto& v : t )
                v = !v;
        return t;
    }
    }
    throw FormulaError( "unsupported operator" );
}

} // namespace detail

/// Truth of f at position 0 of the infinite unfolding of w. The loop is first
/// unrolled ceil(B/d)+1 times (B the sum of bounds, d the loop duration).
[[nodiscard]] inline bool eval_mtl_on_lasso( const TimedLassoWord& w, const Formula& f )
{
    w.validate();
    TimeValue d = w.loop_duration();
    TimeValue b = bound_sum( f );
    std::size_t factor = d > 0 ? static_cast<std::size_t>( ( b + d - 1 ) / d + 1 ) : 1;
    // Positions are evaluated exactly on any unrolling, so the copy count is
    // capped to keep memory bounded for large bounds over short loops.
    factor = std::min<std::size_t>( factor, 1 + 4096 / std::max<std::size_t>( 1, w.size() - w.loop_start ) );
    TimedLassoWord u = unroll( w, factor );
    return detail::eval_positions( u, f )[0] != 0;
}

[[nodiscard]] inline bool eval_mtl_on_lasso( const TimedKripke& k, const Lasso& l, const Formula& f )
{
    for ( const auto& p : props_of( f ) )
        if ( !k.prop_index( p ) )
            throw UnknownPropositionError( p );
    return eval_mtl_on_lasso( word_of( k, l ), f );
}

class UnsupportedFormulaError : public FormulaError
{
public:
    using FormulaError::FormulaError;
};

class OracleBudgetExceeded : public Error
{
public:
    using Error::Error;
};

inline constexpr std::size_t default_oracle_budget = 20'000'000;

namespace detail
{

/// Bound of a (possibly) bounded operator; nullopt means unbounded.
struct OracleDisjunct
{
    Literal lit;
    std::optional<TimeValue> bound;
};

struct OracleShape
{
    enum class Kind
    {
        response,
        safety
    } kind;
    std::vector<OracleDisjunct> response;
    Literal p;
    Literal q;
    std::optional<TimeValue> bound;
};

inline std::optional<OracleShape> oracle_shape( const Formula& f )
{
    if ( f->op != Op::Always )
        return std::nullopt;
    std::vector<Formula> parts;
    flatten_or( f->lhs, parts );
    OracleShape s{ OracleShape::Kind::response, {}, {}, {}, {} };
    bool response = true;
    for ( const auto& g : parts )
    {
        if ( g->op != Op::BoundedEventually && g->op != Op::Eventually )
        {
            response = false;
            break;
        }
        auto lit = as_literal( g->lhs );
        if ( !lit )
            return std::nullopt;
        s.response.push_back( { *lit, g->op == Op::BoundedEventually ? std::optional{ g->bound } : std::nullopt } );
    }
    if ( response )
        return s;
    if ( parts.size() != 2 )
        return std::nullopt;
    for ( int i = 0; i < 2; ++i )
    {
        auto p = as_literal( parts[i] );
        const auto& b = parts[1 - i];
        if ( !p || ( b->op != Op::Always && b->op != Op::BoundedAlways ) )
            continue;
        auto q = as_literal( b->lhs );
        if ( !q )
            return std::nullopt;
        s.kind = OracleShape::Kind::safety;
        s.p = *p;
        s.q = *q;
        s.bound = b->op == Op::BoundedAlways ? std::optional{ b->bound } : std::nullopt;
        s.response.clear();
        return s;
    }
    return std::nullopt;
}

inline bool lit_holds( const TimedKripke& k, StateIndex s, const Literal& l )
{
    return k.holds( s, l.prop ) != l.negated;
}

/// BFS tree over the graph from the initial state.
struct ReachTree
{
    std::vector<std::size_t> via; ///< transition into each state, SIZE_MAX for root/unreached
    std::vector<char> reached;

    explicit ReachTree( const TimedKripke& k ) : via( k.size(), SIZE_MAX ), reached( k.size(), 0 )
    {
        std::deque<StateIndex> q{ k.initial };
        reached[k.initial] = 1;
        while ( !q.empty() )
        {
            auto s = q.front();
            q.pop_front();
            for ( auto e : k.out[s] )
            {
                auto t = k.transitions[e].to;
                if ( !reached[t] )
                {
                    reached[t] = 1;
                    via[t] = e;
                    q.push_back( t );
                }
            }
        }
    }

    /// Steps from the initial state up to, excluding, s.
    [[nodiscard]] std::vector<LassoStep> path_to( const TimedKripke& k, StateIndex s ) const
    {
        std::vector<LassoStep> out;
        while ( via[s] != SIZE_MAX )
        {
            const auto& t = k.transitions[via[s]];
            out.push_back( { t.from, t.duration } );
            s = t.from;
        }
        std::reverse( out.begin(), out.end() );
        return out;
    }
};

/// Product node: graph state plus capped elapsed time.
struct TimedNode
{
    StateIndex s;
    TimeValue e;
    friend bool operator==( const TimedNode&, const TimedNode& ) = default;
};

struct TimedNodeHash
{
    std::size_t operator()( const TimedNode& n ) const noexcept
    {
        return std::hash<std::uint64_t>{}( ( static_cast<std::uint64_t>( n.s ) << 24 ) ^ n.e );
    }
};

/// Appends an arbitrary infinite continuation from s (first transitions
/// until a state repeats) to `steps`, returning the finished lasso.
inline Lasso close_greedily( const TimedKripke& k, std::vector<LassoStep> steps, StateIndex s )
{
    std::map<StateIndex, std::size_t> seen;
    std::vector<LassoStep> tail;
    while ( !seen.contains( s ) )
    {
        seen[s] = tail.size();
        const auto& t = k.transitions[k.out[s].front()];
        tail.push_back( { s, t.duration } );
        s = t.to;
    }
    std::size_t cut = seen[s];
    steps.insert( steps.end(), tail.begin(), tail.begin() + static_cast<std::ptrdiff_t>( cut ) );
    return Lasso{ std::move( steps ), { tail.begin() + static_cast<std::ptrdiff_t>( cut ), tail.end() } };
}

inline Verdict check_response( const TimedKripke& k, const std::vector<OracleDisjunct>& ds, std::size_t budget )
{
    TimeValue cap = 0;
    for ( const auto& d : ds )
        if ( d.bound )
            cap = std::max( cap, *d.bound + 1 );
    auto allowed = [&]( const TimedNode& n ) {
        for ( const auto& d : ds )
            if ( ( !d.bound || n.e <= *d.bound ) && lit_holds( k, n.s, d.lit ) )
                return false;
        return true;
    };

    ReachTree tree{ k };
    std::unordered_map<TimedNode, std::size_t, TimedNodeHash> id;
    std::vector<TimedNode> nodes;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> succ; // (node, transition)
    std::deque<std::size_t> work;
    auto intern = [&]( TimedNode n ) {
        auto [it, fresh] = id.try_emplace( n, nodes.size() );
        if ( fresh )
        {
            if ( nodes.size() >= budget )
                throw OracleBudgetExceeded( "MTL oracle exceeded its product budget of " + std::to_string( budget ) );
            nodes.push_back( n );
            succ.emplace_back();
            work.push_back( it->second );
        }
        return it->second;
    };

    std::vector<std::size_t> sources;
    for ( StateIndex s = 0; s < k.size(); ++s )
        if ( tree.reached[s] && allowed( { s, 0 } ) )
            sources.push_back( intern( { s, 0 } ) );
    while ( !work.empty() )
    {
        auto x = work.front();
        work.pop_front();
        TimedNode n = nodes[x];
        for ( auto e : k.out[n.s] )
        {
            const auto& t = k.transitions[e];
            TimedNode m{ t.to, std::min( n.e + t.duration, cap ) };
            if ( allowed( m ) )
            {
                auto y = intern( m );
                succ[x].emplace_back( y, e );
            }
        }
    }

    // Greatest set of nodes that all have a successor inside the set.
    const std::size_t n = nodes.size();
    std::vector<std::vector<std::size_t>> pred( n );
    std::vector<std::size_t> outdeg( n, 0 );
    for ( std::size_t x = 0; x < n; ++x )
    {
        outdeg[x] = succ[x].size();
        for ( auto [y, e] : succ[x] )
            pred[y].push_back( x );
    }
    std::vector<char> alive( n, 1 );
    std::vector<std::size_t> dead;
    for ( std::size_t x = 0; x < n; ++x )
        if ( outdeg[x] == 0 )
            dead.push_back( x );
    while ( !dead.empty() )
    {
        auto x = dead.back();
        dead.pop_back();
        if ( !alive[x] )
            continue;
        alive[x] = 0;
        for ( auto p : pred[x] )
            if ( alive[p] && --outdeg[p] == 0 )
                dead.push_back( p );
    }

    for ( auto src : sources )
    {
        if ( !alive[src] )
            continue;
        // Walk inside the live set until a product node repeats.
        std::vector<LassoStep> steps = tree.path_to( k, nodes[src].s );
        std::map<std::size_t, std::size_t> seen;
        std::vector<LassoStep> walk;
        std::size_t x = src;
        while ( !seen.contains( x ) )
        {
            seen[x] = walk.size();
            for ( auto [y, e] : succ[x] )
                if ( alive[y] )
                {
                    walk.push_back( { nodes[x].s, k.transitions[e].duration } );
                    x = y;
                    break;
                }
        }
        std::size_t cut = seen[x];
        steps.insert( steps.end(), walk.begin(), walk.begin() + static_cast<std::ptrdiff_t>( cut ) );
        return Verdict::Counterexample(
                Lasso{ std::move( steps ), { walk.begin() + static_cast<std::ptrdiff_t>( cut ), walk.end() } } );
    }
    return Verdict::Holds();
}

inline Verdict check_safety( const TimedKripke& k, const Literal& p, const Literal& q, std::optional<TimeValue> bound,
                             std::size_t budget )
{
    ReachTree tree{ k };
    std::unordered_map<TimedNode, std::size_t, TimedNodeHash> id;
    std::vector<TimedNode> nodes;
    std::vector<std::pair<std::size_t, std::size_t>> parent; // (node, transition)
    std::deque<std::size_t> work;
    auto intern = [&]( TimedNode n, std::pair<std::size_t, std::size_t> par ) {
        auto [it, fresh] = id.try_emplace( n, nodes.size() );
        if ( fresh )
        {
            if ( nodes.size() >= budget )
                throw OracleBudgetExceeded( "MTL oracle exceeded its product budget of " + std::to_string( budget ) );
            nodes.push_back( n );
            parent.push_back( par );
            work.push_back( it->second );
        }
    };
    constexpr std::pair<std::size_t, std::size_t> root{ SIZE_MAX, SIZE_MAX };
    for ( StateIndex s = 0; s < k.size(); ++s )
        if ( tree.reached[s] && !lit_holds( k, s, p ) )
            intern( { s, 0 }, root );
    while ( !work.empty() )
    {
        auto x = work.front();
        work.pop_front();
        TimedNode n = nodes[x];
        if ( !lit_holds( k, n.s, q ) )
        {
            std::vector<LassoStep> chain;
            for ( std::size_t y = x; parent[y] != root; y = parent[y].first )
                chain.push_back( { nodes[parent[y].first].s, k.transitions[parent[y].second].duration } );
            std::reverse( chain.begin(), chain.end() );
            StateIndex start = chain.empty() ? n.s : chain.front().state;
            std::vector<LassoStep> steps = tree.path_to( k, start );
            steps.insert( steps.end(), chain.begin(), chain.end() );
            return Verdict::Counterexample( close_greedily( k, std::move( steps ), n.s ) );
        }
        for ( auto e : k.out[n.s] )
        {
            const auto& t = k.transitions[e];
            TimeValue elapsed = bound ? n.e + t.duration : 0;
            if ( bound && elapsed > *bound )
                continue;
            intern( { t.to, elapsed }, { x, e } );
        }
    }
    return Verdict::Holds();
}

} // namespace detail

/// Exhaustive MTL check over every path of k for the shapes
/// `[] \/_i <>[<=b_i] q_i` and `[] (p \/ [][<=b] q)`, with unbounded `<>`/`[]`
/// also accepted in place of the bounded operators. Counterexamples are
/// replayed through eval_mtl_on_lasso before being returned.
[[nodiscard]] inline Verdict check_mtl_exhaustive( const TimedKripke& k, const Formula& f,
                                                   std::size_t budget = default_oracle_budget )
{
    auto shape = detail::oracle_shape( f );
    if ( !shape )
        throw UnsupportedFormulaError( "MTL oracle supports only response and safety shapes: " + to_string( f ) );
    for ( const auto& p : props_of( f ) )
        if ( !k.prop_index( p ) )
            throw UnknownPropositionError( p );

    Verdict v = shape->kind == detail::OracleShape::Kind::response
                        ? detail::check_response( k, shape->response, budget )
                        : detail::check_safety( k, shape->p, shape->q, shape->bound, budget );
    if ( v.counterexample )
    {
        if ( !is_path_of( k, *v.counterexample ) || eval_mtl_on_lasso( k, *v.counterexample, f ) )
            throw Error( "internal error: MTL oracle produced an invalid witness" );
    }
    return v;
}

} // namespace rtmc
