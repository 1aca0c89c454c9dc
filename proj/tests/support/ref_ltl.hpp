#pragma once

// Reference LTL machinery written independently of the library's checker:
//  - direct evaluation of a formula on an ultimately periodic word by walking
//    the suffix (no fixpoints),
//  - enumeration of all simple lassos of a Kripke structure,
//  - a complete decision procedure based on maximal atoms, an atom graph and
//    self-fulfilling strongly connected components.

#include "random_theory.hpp"
#include "rtmc/ltl_mc.hpp"

#include <functional>

namespace rtmc::testkit
{

/// Letters plus the index where the loop re-enters.
struct LassoWord
{
    std::vector<std::set<std::string>> letters;
    std::size_t loop_start = 0;

    [[nodiscard]] std::size_t next( std::size_t i ) const { return i + 1 < letters.size() ? i + 1 : loop_start; }
};

inline LassoWord lasso_word( const TimedKripke& k, const Lasso& l )
{
    LassoWord w;
    for ( const auto& s : l.prefix )
        w.letters.push_back( k.label_set( s.state ) );
    w.loop_start = w.letters.size();
    for ( const auto& s : l.loop )
        w.letters.push_back( k.label_set( s.state ) );
    return w;
}

/// Truth of f at position i, by direct semantics. The suffix from i visits at
/// most letters.size() distinct positions before repeating.
inline bool ref_eval( const LassoWord& w, const Formula& f, std::size_t i = 0 )
{
    const std::size_t n = w.letters.size();
    switch ( f->op )
    {
    case Op::True:
        return true;
    case Op::False:
        return false;
    case Op::Prop:
        return w.letters[i].contains( f->name );
    case Op::Not:
        return !ref_eval( w, f->lhs, i );
    case Op::And:
        return ref_eval( w, f->lhs, i ) && ref_eval( w, f->rhs, i );
    case Op::Or:
        return ref_eval( w, f->lhs, i ) || ref_eval( w, f->rhs, i );
    case Op::Implies:
        return !ref_eval( w, f->lhs, i ) || ref_eval( w, f->rhs, i );
    case Op::Until:
    case Op::WeakUntil:
    {
        std::size_t j = i;
        for ( std::size_t step = 0; step <= n; ++step, j = w.next( j ) )
        {
            if ( ref_eval( w, f->rhs, j ) )
                return true;
            if ( !ref_eval( w, f->lhs, j ) )
                return false;
        }
        return f->op == Op::WeakUntil;
    }
    case Op::Always:
    case Op::Eventually:
    {
        const bool want = f->op == Op::Eventually;
        std::size_t j = i;
        for ( std::size_t step = 0; step <= n; ++step, j = w.next( j ) )
            if ( ref_eval( w, f->lhs, j ) == want )
                return want;
        return !want;
    }
    default:
        throw FormulaError( "reference evaluator handles pure LTL only" );
    }
}

/// Calls fn on every lasso whose prefix is a simple path from the initial
/// state and whose loop is a simple cycle closing on that path.
inline void for_each_simple_lasso( const TimedKripke& k, const std::function<void( const Lasso& )>& fn )
{
    std::vector<LassoStep> path;
    std::vector<char> on_path( k.size(), 0 );
    std::vector<std::size_t> where( k.size(), 0 );
    std::function<void( StateIndex )> dfs = [&]( StateIndex s ) {
        on_path[s] = 1;
        where[s] = path.size();
        path.push_back( { s, 0 } );
        for ( auto ti : k.out[s] )
        {
            const auto& t = k.transitions[ti];
            path.back().duration = t.duration;
            if ( on_path[t.to] )
            {
                Lasso l;
                l.prefix.assign( path.begin(), path.begin() + static_cast<std::ptrdiff_t>( where[t.to] ) );
                l.loop.assign( path.begin() + static_cast<std::ptrdiff_t>( where[t.to] ), path.end() );
                fn( l );
            }
            else
                dfs( t.to );
        }
        path.pop_back();
        on_path[s] = 0;
    };
    dfs( k.initial );
}

/// True iff every simple lasso satisfies f.
inline bool simple_lassos_satisfy( const TimedKripke& k, const Formula& f, Lasso* witness = nullptr )
{
    bool ok = true;
    for_each_simple_lasso( k, [&]( const Lasso& l ) {
        if ( ok && !ref_eval( lasso_word( k, l ), f ) )
        {
            ok = false;
            if ( witness )
                *witness = l;
        }
    } );
    return ok;
}

namespace detail
{

/// Core syntax: True, Prop, Not, And, Until.
struct CoreNode
{
    enum Kind
    {
        tt,
        prop,
        neg,
        conj,
        until
    } kind;
    int a = -1;
    int b = -1;
    std::string name;
    int elem = -1; ///< bit index for props and until nodes
};

class CoreFormula
{
public:
    std::vector<CoreNode> nodes;
    std::vector<int> elems; ///< node ids of elementary formulas
    std::vector<int> untils;

    int add( CoreNode n )
    {
        nodes.push_back( std::move( n ) );
        return static_cast<int>( nodes.size() ) - 1;
    }
    int tt() { return add( { CoreNode::tt, -1, -1, {}, -1 } ); }
    int neg( int x ) { return add( { CoreNode::neg, x, -1, {}, -1 } ); }
    int conj( int x, int y ) { return add( { CoreNode::conj, x, y, {}, -1 } ); }
    int disj( int x, int y ) { return neg( conj( neg( x ), neg( y ) ) ); }
    int until( int x, int y )
    {
        int id = add( { CoreNode::until, x, y, {}, -1 } );
        nodes[id].elem = static_cast<int>( elems.size() );
        elems.push_back( id );
        untils.push_back( id );
        return id;
    }
    int prop( const std::string& p )
    {
        for ( auto e : elems )
            if ( nodes[e].kind == CoreNode::prop && nodes[e].name == p )
                return e;
        int id = add( { CoreNode::prop, -1, -1, p } );
        nodes[id].elem = static_cast<int>( elems.size() );
        elems.push_back( id );
        return id;
    }

    int from( const Formula& f )
    {
        switch ( f->op )
        {
        case Op::True:
            return tt();
        case Op::False:
            return neg( tt() );
        case Op::Prop:
            return prop( f->name );
        case Op::Not:
            return neg( from( f->lhs ) );
        case Op::And:
            return conj( from( f->lhs ), from( f->rhs ) );
        case Op::Or:
            return disj( from( f->lhs ), from( f->rhs ) );
        case Op::Implies:
            return disj( neg( from( f->lhs ) ), from( f->rhs ) );
        case Op::Until:
            return until( from( f->lhs ), from( f->rhs ) );
        case Op::WeakUntil:
        {
            // a W b == ~( ~b U ( ~a /\ ~b ) )
            int a = from( f->lhs );
            int b = from( f->rhs );
            return neg( until( neg( b ), conj( neg( a ), neg( b ) ) ) );
        }
        case Op::Eventually:
            return until( tt(), from( f->lhs ) );
        case Op::Always:
            return neg( until( tt(), neg( from( f->lhs ) ) ) );
        default:
            throw FormulaError( "reference checker handles pure LTL only" );
        }
    }

    [[nodiscard]] bool eval( int id, std::uint32_t atom ) const
    {
        const auto& n = nodes[id];
        switch ( n.kind )
        {
        case CoreNode::tt:
            return true;
        case CoreNode::prop:
        case CoreNode::until:
            return ( atom >> n.elem ) & 1U;
        case CoreNode::neg:
            return !eval( n.a, atom );
        case CoreNode::conj:
            return eval( n.a, atom ) && eval( n.b, atom );
        }
        return false;
    }
};

} // namespace detail

/// Complete LTL decision procedure: true iff every infinite path of k
/// from its initial state satisfies f.
inline bool ref_model_check( const TimedKripke& k, const Formula& f )
{
    detail::CoreFormula core;
    const int root = core.from( f );
    const std::size_t E = core.elems.size();
    if ( E > 20 )
        throw Error( "formula too large for the reference checker" );

    // Atoms per state: prop bits fixed by the label, until bits free but
    // locally consistent.
    auto label_bits = [&]( StateIndex s ) {
        std::uint32_t bits = 0;
        for ( std::size_t e = 0; e < E; ++e )
        {
            const auto& n = core.nodes[core.elems[e]];
            if ( n.kind == detail::CoreNode::prop && k.prop_index( n.name ) && k.holds( s, n.name ) )
                bits |= 1U << e;
        }
        return bits;
    };
    auto locally_consistent = [&]( std::uint32_t atom ) {
        for ( auto u : core.untils )
        {
            const auto& n = core.nodes[u];
            bool uu = ( atom >> n.elem ) & 1U;
            bool a = core.eval( n.a, atom );
            bool b = core.eval( n.b, atom );
            if ( b && !uu )
                return false;
            if ( uu && !b && !a )
                return false;
        }
        return true;
    };
    std::uint32_t until_mask = 0;
    for ( auto u : core.untils )
        until_mask |= 1U << core.nodes[u].elem;

    std::vector<std::vector<std::uint32_t>> atoms( k.size() );
    for ( StateIndex s = 0; s < k.size(); ++s )
    {
        const std::uint32_t base = label_bits( s );
        // Enumerate subsets of the until bits.
        std::uint32_t sub = 0;
        do
        {
            std::uint32_t a = base | sub;
            if ( locally_consistent( a ) )
                atoms[s].push_back( a );
            sub = ( sub - until_mask ) & until_mask;
        } while ( sub != 0 );
    }

    auto edge_ok = [&]( std::uint32_t A, std::uint32_t B ) {
        for ( auto u : core.untils )
        {
            const auto& n = core.nodes[u];
            bool ua = ( A >> n.elem ) & 1U;
            bool ub = ( B >> n.elem ) & 1U;
            if ( ua != ( core.eval( n.b, A ) || ( core.eval( n.a, A ) && ub ) ) )
                return false;
        }
        return true;
    };

    // Nodes reachable from initial nodes whose atom falsifies f.
    std::map<std::pair<StateIndex, std::uint32_t>, std::size_t> id;
    std::vector<std::pair<StateIndex, std::uint32_t>> nodes;
    std::vector<std::vector<std::size_t>> succ;
    std::vector<std::size_t> work;
    auto intern = [&]( StateIndex s, std::uint32_t a ) {
        auto [it, fresh] = id.try_emplace( { s, a }, nodes.size() );
        if ( fresh )
        {
            nodes.emplace_back( s, a );
            succ.emplace_back();
            work.push_back( it->second );
        }
        return it->second;
    };
    for ( auto a : atoms[k.initial] )
        if ( !core.eval( root, a ) )
            intern( k.initial, a );
    while ( !work.empty() )
    {
        std::size_t x = work.back();
        work.pop_back();
        auto [s, A] = nodes[x];
        for ( auto ti : k.out[s] )
        {
            StateIndex t = k.transitions[ti].to;
            for ( auto B : atoms[t] )
                if ( edge_ok( A, B ) )
                {
                    std::size_t y = intern( t, B );
                    succ[x].push_back( y );
                }
        }
    }

    // Tarjan SCCs; a violating path exists iff some nontrivial SCC is
    // self-fulfilling (every until is either absent or discharged in it).
    const std::size_t N = nodes.size();
    std::vector<std::size_t> index( N, SIZE_MAX ), low( N, 0 ), comp( N, SIZE_MAX );
    std::vector<char> on_stack( N, 0 );
    std::vector<std::size_t> stack;
    std::size_t counter = 0;
    std::size_t ncomp = 0;
    std::function<void( std::size_t )> strong = [&]( std::size_t v ) {
        index[v] = low[v] = counter++;
        stack.push_back( v );
        on_stack[v] = 1;
        for ( auto w : succ[v] )
        {
            if ( index[w] == SIZE_MAX )
            {
                strong( w );
                low[v] = std::min( low[v], low[w] );
            }
            else if ( on_stack[w] )
                low[v] = std::min( low[v], index[w] );
        }
        if ( low[v] == index[v] )
        {
            std::size_t w;
            do
            {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = 0;
                comp[w] = ncomp;
            } while ( w != v );
            ++ncomp;
        }
    };
    for ( std::size_t v = 0; v < N; ++v )
        if ( index[v] == SIZE_MAX )
            strong( v );

    std::vector<std::vector<std::size_t>> members( ncomp );
    for ( std::size_t v = 0; v < N; ++v )
        members[comp[v]].push_back( v );
    for ( std::size_t c = 0; c < ncomp; ++c )
    {
        bool nontrivial = false;
        for ( auto v : members[c] )
            for ( auto w : succ[v] )
                nontrivial |= comp[w] == c;
        if ( !nontrivial )
            continue;
        bool fulfilling = true;
        for ( auto u : core.untils )
        {
            const auto& n = core.nodes[u];
            bool discharged = false;
            for ( auto v : members[c] )
            {
                std::uint32_t A = nodes[v].second;
                if ( !( ( A >> n.elem ) & 1U ) || core.eval( n.b, A ) )
                    discharged = true;
            }
            fulfilling &= discharged;
        }
        if ( fulfilling )
            return false;
    }
    return true;
}

/// Random total Kripke structure over props a, b, c with 1-3 successors per
/// state and durations in [0, 3].
inline TimedKripke random_kripke( Rng& rng, std::size_t max_states = 8 )
{
    TimedKripke k;
    const std::size_t n = rng.range( 1, max_states );
    k.prop_names = { "a", "b", "c" };
    k.out.resize( n );
    for ( std::size_t s = 0; s < n; ++s )
    {
        k.states.push_back( Configuration{ Object{ "s" + std::to_string( s ), Port{ true } } } );
        k.labels.push_back( rng.below( 8 ) );
    }
    for ( std::size_t s = 0; s < n; ++s )
    {
        const std::size_t deg = rng.range( 1, 3 );
        for ( std::size_t d = 0; d < deg; ++d )
            k.add_transition( { s, rng.below( n ), rng.range( 0, 3 ), "e" } );
    }
    k.initial = 0;
    return k;
}

/// Random pure-LTL formula of depth at most max_depth over props a, b, c.
inline Formula random_ltl( Rng& rng, std::size_t max_depth )
{
    static const std::vector<std::string> props{ "a", "b", "c" };
    if ( max_depth == 0 || rng.chance( 25 ) )
    {
        auto r = rng.below( 10 );
        return r == 0 ? fm::tt() : r == 1 ? fm::ff() : fm::prop( rng.pick( props ) );
    }
    auto sub = [&] { return random_ltl( rng, max_depth - 1 ); };
    switch ( rng.below( 8 ) )
    {
    case 0:
        return fm::neg( sub() );
    case 1:
        return fm::conj( sub(), sub() );
    case 2:
        return fm::disj( sub(), sub() );
    case 3:
        return fm::implies( sub(), sub() );
    case 4:
        return fm::until( sub(), sub() );
    case 5:
        return fm::weak_until( sub(), sub() );
    case 6:
        return fm::always( sub() );
    default:
        return fm::eventually( sub() );
    }
}

} // namespace rtmc::testkit
