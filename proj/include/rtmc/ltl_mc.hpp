#pragma once

// Untimed LTL model checking of explored timed Kripke structures: tableau
// construction of a Buchi automaton, product with the graph, nested
// depth-first search for an accepting lasso.

#include "engine.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <tuple>

namespace rtmc
{

/// One position of a counterexample: a graph state and the duration of the
/// transition taken from it.
struct LassoStep
{
    StateIndex state = 0;
    TimeValue duration = 0;
    friend bool operator==( const LassoStep&, const LassoStep& ) = default;
};

/// Ultimately periodic path: prefix then loop forever. The last loop step
/// returns to `loop.front()`.
struct Lasso
{
    std::vector<LassoStep> prefix;
    std::vector<LassoStep> loop;
    friend bool operator==( const Lasso&, const Lasso& ) = default;
};

struct Verdict
{
    std::optional<Lasso> counterexample;

    [[nodiscard]] bool holds() const noexcept { return !counterexample.has_value(); }
    [[nodiscard]] static Verdict Holds() { return {}; }
    [[nodiscard]] static Verdict Counterexample( Lasso l ) { return { std::move( l ) }; }
    friend bool operator==( const Verdict&, const Verdict& ) = default;
};

/// Checks that `l` is a path of `k` (every step follows a transition with
/// the recorded duration) and that the loop closes.
[[nodiscard]] inline bool is_path_of( const TimedKripke& k, const Lasso& l )
{
    if ( l.loop.empty() )
        return false;
    std::vector<LassoStep> seq = l.prefix;
    seq.insert( seq.end(), l.loop.begin(), l.loop.end() );
    if ( seq.front().state != k.initial )
        return false;
    for ( std::size_t i = 0; i < seq.size(); ++i )
    {
        StateIndex to = i + 1 < seq.size() ? seq[i + 1].state : l.loop.front().state;
        bool found = false;
        for ( auto e : k.out[seq[i].state] )
            found |= k.transitions[e].to == to && k.transitions[e].duration == seq[i].duration;
        if ( !found )
            return false;
    }
    return true;
}

namespace ltl
{

/// Negation normal form with Release; literals refer to a proposition index.
enum class NOp
{
    True,
    False,
    Lit,
    And,
    Or,
    Until,
    Release
};

struct NNode
{
    NOp op;
    int prop = -1;
    bool neg = false;
    int l = -1;
    int r = -1;
    auto operator<=>( const NNode& ) const = default;
};

/// Hash-consed NNF formulas.
class NnfTable
{
    std::vector<NNode> _nodes;
    std::map<NNode, int> _ids;

public:
    std::vector<std::string> props;

    int make( NNode n )
    {
        if ( auto it = _ids.find( n ); it != _ids.end() )
            return it->second;
        int id = static_cast<int>( _nodes.size() );
        _nodes.push_back( n );
        _ids.emplace( n, id );
        return id;
    }

    [[nodiscard]] const NNode& at( int id ) const { return _nodes.at( static_cast<std::size_t>( id ) ); }
    [[nodiscard]] std::size_t size() const noexcept { return _nodes.size(); }

    int prop_id( const std::string& name )
    {
        for ( std::size_t i = 0; i < props.size(); ++i )
            if ( props[i] == name )
                return static_cast<int>( i );
        props.push_back( name );
        return static_cast<int>( props.size() - 1 );
    }

    int tt() { return make( { NOp::True } ); }
    int ff() { return make( { NOp::False } ); }
    int bin( NOp op, int a, int b ) { return make( { op, -1, false, a, b } ); }

    /// NNF of f (positive) or of its negation.
    int convert( const Formula& f, bool positive )
    {
        switch ( f->op )
        {
        case Op::True:
            return positive ? tt() : ff();
        case Op::False:
            return positive ? ff() : tt();
        case Op::Prop:
            return make( { NOp::Lit, prop_id( f->name ), !positive } );
        case Op::Not:
            return convert( f->lhs, !positive );
        case Op::And:
            return bin( positive ? NOp::And : NOp::Or, convert( f->lhs, positive ), convert( f->rhs, positive ) );
        case Op::Or:
            return bin( positive ? NOp::Or : NOp::And, convert( f->lhs, positive ), convert( f->rhs, positive ) );
        case Op::Implies:
            return positive ? bin( NOp::Or, convert( f->lhs, false ), convert( f->rhs, true ) )
                            : bin( NOp::And, convert( f->lhs, true ), convert( f->rhs, false ) );
        case Op::Until:
            return bin( positive ? NOp::Until : NOp::Release, convert( f->lhs, positive ), convert( f->rhs, positive ) );
        case Op::WeakUntil:
        {
            // a W b == b R (a \/ b);  ~(a W b) == ~b U (~a /\ ~b)
            int a = convert( f->lhs, positive );
            int b = convert( f->rhs, positive );
            return positive ? bin( NOp::Release, b, bin( NOp::Or, a, b ) ) : bin( NOp::Until, b, bin( NOp::And, a, b ) );
        }
        case Op::Always:
            return positive ? bin( NOp::Release, ff(), convert( f->lhs, true ) )
                            : bin( NOp::Until, tt(), convert( f->lhs, false ) );
        case Op::Eventually:
            return positive ? bin( NOp::Until, tt(), convert( f->lhs, true ) )
                            : bin( NOp::Release, ff(), convert( f->lhs, false ) );
        case Op::BoundedAlways:
        case Op::BoundedEventually:
            break;
        }
        throw FormulaError( "LTL model checking does not support bounded operators: " + to_string( f ) );
    }
};

} // namespace ltl

/// State-labeled Buchi automaton. A run reads letter i in state i, so each
/// transition into a state is guarded by that state's literals.
struct BuchiAutomaton
{
    struct State
    {
        std::vector<std::pair<std::size_t, bool>> literals; ///< (prop, negated)
        std::vector<std::size_t> succ;
        bool accepting = false;
    };

    std::vector<std::string> props;
    std::vector<State> states;
    std::vector<std::size_t> initial;

    [[nodiscard]] bool admits( std::size_t q, const std::set<std::string>& letter ) const
    {
        for ( auto [p, neg] : states[q].literals )
            if ( letter.contains( props[p] ) == neg )
                return false;
        return true;
    }

    /// Acceptance of the ultimately periodic word `letters`, whose suffix
    /// from `loop_start` repeats forever.
    [[nodiscard]] bool accepts_lasso( const std::vector<std::set<std::string>>& letters, std::size_t loop_start ) const
    {
        const std::size_t m = letters.size();
        if ( m == 0 || loop_start >= m )
            throw Error( "accepts_lasso: malformed lasso" );
        const std::size_t nb = states.size();
        auto id = [nb]( std::size_t pos, std::size_t q ) { return pos * nb + q; };
        auto next_pos = [&]( std::size_t pos ) { return pos + 1 < m ? pos + 1 : loop_start; };
        auto succs = [&]( std::size_t node ) {
            std::vector<std::size_t> out;
            std::size_t pos = node / nb;
            std::size_t q = node % nb;
            std::size_t np = next_pos( pos );
            for ( auto q2 : states[q].succ )
                if ( admits( q2, letters[np] ) )
                    out.push_back( id( np, q2 ) );
            return out;
        };
        std::vector<char> reach( m * nb, 0 );
        std::vector<std::size_t> stack;
        for ( auto q : initial )
            if ( admits( q, letters[0] ) && !reach[id( 0, q )] )
            {
                reach[id( 0, q )] = 1;
                stack.push_back( id( 0, q ) );
            }
        while ( !stack.empty() )
        {
            auto n = stack.back();
            stack.pop_back();
            for ( auto s : succs( n ) )
                if ( !reach[s] )
                {
                    reach[s] = 1;
                    stack.push_back( s );
                }
        }
        for ( std::size_t a = 0; a < m * nb; ++a )
        {
            if ( !reach[a] || !states[a % nb].accepting )
                continue;
            std::vector<char> seen( m * nb, 0 );
            stack = succs( a );
            while ( !stack.empty() )
            {
                auto n = stack.back();
                stack.pop_back();
                if ( n == a )
                    return true;
                if ( seen[n] )
                    continue;
                seen[n] = 1;
                for ( auto s : succs( n ) )
                    stack.push_back( s );
            }
        }
        return false;
    }
};

namespace ltl
{

/// Tableau expansion over NNF (Gerth, Peled, Vardi, Wolper).
class Tableau
{
    struct Node
    {
        std::set<int> incoming; ///< -1 denotes the initial pseudo-node
        std::set<int> fresh;
        std::set<int> old;
        std::set<int> next;
    };

    NnfTable& _tab;
    std::vector<Node> _done;

    [[nodiscard]] bool contradicts( const std::set<int>& old, int lit ) const
    {
        const auto& n = _tab.at( lit );
        for ( int o : old )
        {
            const auto& m = _tab.at( o );
            if ( m.op == NOp::Lit && m.prop == n.prop && m.neg != n.neg )
                return true;
        }
        return false;
    }

    void add_new( Node& n, int f ) const
    {
        if ( !n.old.contains( f ) )
            n.fresh.insert( f );
    }

    void expand( Node n )
    {
        if ( n.fresh.empty() )
        {
            for ( auto& d : _done )
                if ( d.old == n.old && d.next == n.next )
                {
                    d.incoming.insert( n.incoming.begin(), n.incoming.end() );
                    return;
                }
            int id = static_cast<int>( _done.size() );
            _done.push_back( n );
            expand( Node{ { id }, _done[static_cast<std::size_t>( id )].next, {}, {} } );
            return;
        }
        int f = *n.fresh.begin();
        n.fresh.erase( n.fresh.begin() );
        if ( n.old.contains( f ) )
        {
            expand( std::move( n ) );
            return;
        }
        const NNode fn = _tab.at( f );
        switch ( fn.op )
        {
        case NOp::False:
            return;
        case NOp::True:
            n.old.insert( f );
            expand( std::move( n ) );
            return;
        case NOp::Lit:
            if ( contradicts( n.old, f ) )
                return;
            n.old.insert( f );
            expand( std::move( n ) );
            return;
        case NOp::And:
            n.old.insert( f );
            add_new( n, fn.l );
            add_new( n, fn.r );
            expand( std::move( n ) );
            return;
        case NOp::Or:
        case NOp::Until:
        case NOp::Release:
        {
            Node a = n;
            Node b = std::move( n );
            a.old.insert( f );
            b.old.insert( f );
            if ( fn.op == NOp::Or )
            {
                add_new( a, fn.l );
                add_new( b, fn.r );
            }
            else if ( fn.op == NOp::Until )
            {
                add_new( a, fn.l );
                a.next.insert( f );
                add_new( b, fn.r );
            }
            else
            {
                add_new( a, fn.r );
                a.next.insert( f );
                add_new( b, fn.l );
                add_new( b, fn.r );
            }
            expand( std::move( a ) );
            expand( std::move( b ) );
            return;
        }
        }
    }

public:
    explicit Tableau( NnfTable& tab ) : _tab{ tab } {}

    BuchiAutomaton build( int root )
    {
        _done.clear();
        expand( Node{ { -1 }, { root }, {}, {} } );

        std::vector<int> untils;
        for ( std::size_t i = 0; i < _tab.size(); ++i )
            if ( _tab.at( static_cast<int>( i ) ).op == NOp::Until )
                untils.push_back( static_cast<int>( i ) );
        // Only eventualities that some node actually contains matter.
        std::erase_if( untils, [&]( int u ) {
            return std::none_of( _done.begin(), _done.end(), [u]( const Node& n ) { return n.old.contains( u ); } );
        } );

        const std::size_t ng = _done.size();
        const std::size_t k = std::max<std::size_t>( untils.size(), 1 );
        auto in_f = [&]( std::size_t q, std::size_t i ) {
            if ( untils.empty() )
                return true;
            int u = untils[i];
            const auto& n = _done[q];
            return !n.old.contains( u ) || n.old.contains( _tab.at( u ).r );
        };

        // Counter construction: state (q, i) waits for acceptance set i.
        BuchiAutomaton ba;
        ba.props = _tab.props;
        ba.states.resize( ng * k );
        for ( std::size_t q = 0; q < ng; ++q )
        {
            std::vector<std::pair<std::size_t, bool>> lits;
            for ( int o : _done[q].old )
            {
                const auto& m = _tab.at( o );
                if ( m.op == NOp::Lit )
                    lits.emplace_back( static_cast<std::size_t>( m.prop ), m.neg );
            }
            for ( std::size_t i = 0; i < k; ++i )
            {
                auto& st = ba.states[q * k + i];
                st.literals = lits;
                st.accepting = i == 0 && in_f( q, 0 );
            }
        }
        for ( std::size_t q2 = 0; q2 < ng; ++q2 )
            for ( int from : _done[q2].incoming )
            {
                if ( from < 0 )
                {
                    ba.initial.push_back( q2 * k );
                    continue;
                }
                auto q = static_cast<std::size_t>( from );
                for ( std::size_t i = 0; i < k; ++i )
                {
                    std::size_t j = in_f( q, i ) ? ( i + 1 ) % k : i;
                    ba.states[q * k + i].succ.push_back( q2 * k + j );
                }
            }
        for ( auto& st : ba.states )
        {
            std::sort( st.succ.begin(), st.succ.end() );
            st.succ.erase( std::unique( st.succ.begin(), st.succ.end() ), st.succ.end() );
        }
        std::sort( ba.initial.begin(), ba.initial.end() );
        return ba;
    }
};

} // namespace ltl

/// Automaton accepting exactly the models of f.
[[nodiscard]] inline BuchiAutomaton build_buchi( const Formula& f )
{
    ltl::NnfTable tab;
    int root = tab.convert( f, true );
    return ltl::Tableau{ tab }.build( root );
}

/// Automaton for the negation of f, as used by the emptiness check.
[[nodiscard]] inline BuchiAutomaton to_buchi( const Formula& f )
{
    return build_buchi( fm::neg( f ) );
}

namespace detail
{

/// Product of a timed Kripke structure with a Buchi automaton, explored on
/// demand. Node id = state * |B| + automaton state.
class Product
{
    const TimedKripke& _k;
    const BuchiAutomaton& _b;
    std::vector<std::uint64_t> _pos;
    std::vector<std::uint64_t> _neg;
    std::size_t _nb;

public:
    Product( const TimedKripke& k, const BuchiAutomaton& b ) : _k{ k }, _b{ b }, _nb{ b.states.size() }
    {
        std::vector<std::size_t> map;
        for ( const auto& p : b.props )
        {
            auto i = k.prop_index( p );
            if ( !i )
                throw UnknownPropositionError( p );
            map.push_back( *i );
        }
        for ( const auto& st : b.states )
        {
            std::uint64_t pos = 0;
            std::uint64_t neg = 0;
            for ( auto [p, n] : st.literals )
                ( n ? neg : pos ) |= std::uint64_t{ 1 } << map[p];
            _pos.push_back( pos );
            _neg.push_back( neg );
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return _k.size() * _nb; }
    [[nodiscard]] StateIndex state( std::size_t n ) const noexcept { return n / _nb; }
    [[nodiscard]] std::size_t automaton( std::size_t n ) const noexcept { return n % _nb; }
    [[nodiscard]] bool accepting( std::size_t n ) const { return _b.states[automaton( n )].accepting; }

    [[nodiscard]] bool compatible( StateIndex s, std::size_t q ) const
    {
        auto l = _k.labels[s];
        return ( l & _pos[q] ) == _pos[q] && ( l & _neg[q] ) == 0;
    }

    [[nodiscard]] std::vector<std::size_t> initial() const
    {
        std::vector<std::size_t> out;
        for ( auto q : _b.initial )
            if ( compatible( _k.initial, q ) )
                out.push_back( _k.initial * _nb + q );
        return out;
    }

    /// (successor node, transition index) pairs in a fixed order.
    [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> succ( std::size_t n ) const
    {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for ( auto e : _k.out[state( n )] )
        {
            StateIndex t = _k.transitions[e].to;
            for ( auto q2 : _b.states[automaton( n )].succ )
                if ( compatible( t, q2 ) )
                    out.emplace_back( t * _nb + q2, e );
        }
        return out;
    }
};

/// Nested DFS with the on-stack cycle shortcut. Returns the product nodes of
/// an accepting cycle paired with the transition leaving each, or empty.
inline std::vector<std::pair<std::size_t, std::size_t>> find_accepting_cycle( const Product& p )
{
    const std::size_t n = p.size();
    std::vector<char> outer( n, 0 );
    std::vector<char> on_stack( n, 0 );
    std::vector<char> inner( n, 0 );

    struct Frame
    {
        std::size_t node;
        std::vector<std::pair<std::size_t, std::size_t>> succ;
        std::size_t next = 0;
    };

    // Inner search from an accepting seed towards any node on the outer stack.
    auto inner_dfs = [&]( std::size_t seed, const std::vector<Frame>& ostack )
            -> std::vector<std::pair<std::size_t, std::size_t>> {
        std::vector<Frame> st;
        st.push_back( { seed, p.succ( seed ) } );
        while ( !st.empty() )
        {
            auto& f = st.back();
            if ( f.next == f.succ.size() )
            {
                st.pop_back();
                continue;
            }
            auto [m, e] = f.succ[f.next++];
            if ( on_stack[m] )
            {
                // Cycle: outer stack from m up to the seed, then the inner path back to m.
                std::vector<std::pair<std::size_t, std::size_t>> cyc;
                std::size_t i = 0;
                while ( ostack[i].node != m )
                    ++i;
                for ( ; i + 1 < ostack.size(); ++i )
                    cyc.emplace_back( ostack[i].node, ostack[i].succ[ostack[i].next - 1].second );
                for ( std::size_t j = 0; j + 1 < st.size(); ++j )
                    cyc.emplace_back( st[j].node, st[j].succ[st[j].next - 1].second );
                cyc.emplace_back( st.back().node, e );
                return cyc;
            }
            if ( inner[m] )
                continue;
            inner[m] = 1;
            st.push_back( { m, p.succ( m ) } );
        }
        return {};
    };

    for ( auto root : p.initial() )
    {
        if ( outer[root] )
            continue;
        std::vector<Frame> st;
        outer[root] = 1;
        on_stack[root] = 1;
        st.push_back( { root, p.succ( root ) } );
        while ( !st.empty() )
        {
            auto& f = st.back();
            if ( f.next < f.succ.size() )
            {
                auto m = f.succ[f.next++].first;
                if ( !outer[m] )
                {
                    outer[m] = 1;
                    on_stack[m] = 1;
                    st.push_back( { m, p.succ( m ) } );
                }
                continue;
            }
            // Post-order: f.node is about to leave the stack.
            if ( p.accepting( f.node ) )
            {
                // The seed stays on the stack so that reaching it closes a cycle.
                auto cyc = inner_dfs( f.node, st );
                if ( !cyc.empty() )
                    return cyc;
            }
            on_stack[f.node] = 0;
            st.pop_back();
        }
    }
    return {};
}

/// Kripke-level normalization of a product lasso: prefix steps equal to the
/// loop's last step are rotated into the loop, and a loop that repeats a
/// shorter period is cut to one period. The infinite path is unchanged.
inline void compact_lasso( Lasso& l )
{
    const std::size_t n = l.loop.size();
    for ( std::size_t p = 1; p < n; ++p )
        if ( n % p == 0 && std::equal( l.loop.begin() + p, l.loop.end(), l.loop.begin() ) )
        {
            l.loop.resize( p );
            break;
        }
    while ( !l.prefix.empty() && l.prefix.back() == l.loop.back() )
    {
        std::rotate( l.loop.rbegin(), l.loop.rbegin() + 1, l.loop.rend() );
        l.prefix.pop_back();
    }
}

} // namespace detail

/// Checks that every infinite path from the initial state satisfies f.
/// Counterexamples have a shortest prefix to the accepting cycle found.
[[nodiscard]] inline Verdict model_check_ltl( const TimedKripke& k, const Formula& f )
{
    if ( contains_bounded( f ) )
        throw FormulaError( "model_check_ltl needs a pure LTL formula: " + to_string( f ) );
    for ( const auto& p : props_of( f ) )
        if ( !k.prop_index( p ) )
            throw UnknownPropositionError( p );

    BuchiAutomaton ba = to_buchi( f );
    if ( ba.states.empty() )
        return Verdict::Holds();
    detail::Product prod{ k, ba };
    auto cyc = detail::find_accepting_cycle( prod );
    if ( cyc.empty() )
        return Verdict::Holds();

    // Shortest path from an initial product node to any node of the cycle.
    const std::size_t n = prod.size();
    std::vector<std::size_t> pos_in_cycle( n, SIZE_MAX );
    for ( std::size_t i = 0; i < cyc.size(); ++i )
        pos_in_cycle[cyc[i].first] = i;
    std::vector<std::size_t> parent( n, SIZE_MAX );
    std::vector<std::size_t> via( n, SIZE_MAX );
    std::vector<char> seen( n, 0 );
    std::deque<std::size_t> queue;
    for ( auto r : prod.initial() )
    {
        seen[r] = 1;
        queue.push_back( r );
    }
    std::size_t hit = SIZE_MAX;
    while ( !queue.empty() )
    {
        auto x = queue.front();
        queue.pop_front();
        if ( pos_in_cycle[x] != SIZE_MAX )
        {
            hit = x;
            break;
        }
        for ( auto [y, e] : prod.succ( x ) )
            if ( !seen[y] )
            {
                seen[y] = 1;
                parent[y] = x;
                via[y] = e;
                queue.push_back( y );
            }
    }
    if ( hit == SIZE_MAX )
        throw Error( "internal error: accepting cycle unreachable" );

    Lasso l;
    for ( std::size_t x = hit; parent[x] != SIZE_MAX; x = parent[x] )
        l.prefix.push_back( { prod.state( parent[x] ), k.transitions[via[x]].duration } );
    std::reverse( l.prefix.begin(), l.prefix.end() );
    std::size_t start = pos_in_cycle[hit];
    for ( std::size_t i = 0; i < cyc.size(); ++i )
    {
        const auto& [node, e] = cyc[( start + i ) % cyc.size()];
        l.loop.push_back( { prod.state( node ), k.transitions[e].duration } );
    }
    detail::compact_lasso( l );
    return Verdict::Counterexample( std::move( l ) );
}

} // namespace rtmc
