#pragma once

// Formula AST shared by LTL and upper-bound MTL, its textual grammar,
// proposition labelings and recognition of the two transformable MTL classes.

#include "config.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <memory>
#include <optional>
#include <set>

namespace rtmc
{

enum class Op
{
    True,
    False,
    Prop,
    Not,
    And,
    Or,
    Implies,
    Until,
    WeakUntil,
    Always,
    Eventually,
    BoundedAlways,
    BoundedEventually
};

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode
{
    Op op;
    std::string name;   ///< Prop only
    TimeValue bound = 0; ///< bounded operators only
    Formula lhs;         ///< unary operand, or left operand
    Formula rhs;
};

class FormulaError : public Error
{
public:
    using Error::Error;
};

class ParseError : public FormulaError
{
    std::size_t _pos;

public:
    ParseError( const std::string& msg, std::size_t pos )
            : FormulaError{ msg + " at position " + std::to_string( pos ) }, _pos{ pos }
    {
    }
    [[nodiscard]] std::size_t position() const noexcept { return _pos; }
};

namespace fm
{

inline Formula node( Op op, Formula l = {}, Formula r = {}, TimeValue bound = 0, std::string name = {} )
{
    return std::make_shared<const FormulaNode>( FormulaNode{ op, std::move( name ), bound, std::move( l ), std::move( r ) } );
}

inline Formula tt() { return node( Op::True ); }
inline Formula ff() { return node( Op::False ); }
inline Formula prop( std::string name ) { return node( Op::Prop, {}, {}, 0, std::move( name ) ); }
inline Formula neg( Formula f ) { return node( Op::Not, std::move( f ) ); }
inline Formula conj( Formula a, Formula b ) { return node( Op::And, std::move( a ), std::move( b ) ); }
inline Formula disj( Formula a, Formula b ) { return node( Op::Or, std::move( a ), std::move( b ) ); }
inline Formula implies( Formula a, Formula b ) { return node( Op::Implies, std::move( a ), std::move( b ) ); }
inline Formula until( Formula a, Formula b ) { return node( Op::Until, std::move( a ), std::move( b ) ); }
inline Formula weak_until( Formula a, Formula b ) { return node( Op::WeakUntil, std::move( a ), std::move( b ) ); }
inline Formula always( Formula f ) { return node( Op::Always, std::move( f ) ); }
inline Formula eventually( Formula f ) { return node( Op::Eventually, std::move( f ) ); }

inline Formula always_le( TimeValue b, Formula f )
{
    if ( b == 0 )
        throw FormulaError( "bounded operator requires a bound > 0" );
    return node( Op::BoundedAlways, std::move( f ), {}, b );
}

inline Formula eventually_le( TimeValue b, Formula f )
{
    if ( b == 0 )
        throw FormulaError( "bounded operator requires a bound > 0" );
    return node( Op::BoundedEventually, std::move( f ), {}, b );
}

/// Disjunction of a non-empty list, left-nested.
inline Formula disj_all( const std::vector<Formula>& fs )
{
    if ( fs.empty() )
        return ff();
    Formula out = fs.front();
    for ( std::size_t i = 1; i < fs.size(); ++i )
        out = disj( out, fs[i] );
    return out;
}

} // namespace fm

[[nodiscard]] inline bool is_binary( Op op ) noexcept
{
    switch ( op )
    {
    case Op::And:
    case Op::Or:
    case Op::Implies:
    case Op::Until:
    case Op::WeakUntil:
        return true;
    default:
        return false;
    }
}

[[nodiscard]] inline bool is_bounded( Op op ) noexcept
{
    return op == Op::BoundedAlways || op == Op::BoundedEventually;
}

[[nodiscard]] inline bool structurally_equal( const Formula& a, const Formula& b )
{
    if ( a == b )
        return true;
    if ( !a || !b || a->op != b->op || a->name != b->name || a->bound != b->bound )
        return false;
    return structurally_equal( a->lhs, b->lhs ) && structurally_equal( a->rhs, b->rhs );
}

[[nodiscard]] inline bool contains_bounded( const Formula& f )
{
    if ( !f )
        return false;
    return is_bounded( f->op ) || contains_bounded( f->lhs ) || contains_bounded( f->rhs );
}

inline void collect_props( const Formula& f, std::set<std::string>& out )
{
    if ( !f )
        return;
    if ( f->op == Op::Prop )
        out.insert( f->name );
    collect_props( f->lhs, out );
    collect_props( f->rhs, out );
}

[[nodiscard]] inline std::set<std::string> props_of( const Formula& f )
{
    std::set<std::string> out;
    collect_props( f, out );
    return out;
}

[[nodiscard]] inline std::size_t depth( const Formula& f )
{
    if ( !f )
        return 0;
    if ( f->op == Op::Prop || f->op == Op::True || f->op == Op::False )
        return 0;
    return 1 + std::max( depth( f->lhs ), depth( f->rhs ) );
}

// ---------------------------------------------------------------------------
// Printing

/// Prints in the parser's grammar; binary operators are always parenthesized
/// so that `parse_formula(to_string(f))` is structurally equal to f.
[[nodiscard]] inline std::string to_string( const Formula& f )
{
    switch ( f->op )
    {
    case Op::True:
        return "true";
    case Op::False:
        return "false";
    case Op::Prop:
        return f->name;
    case Op::Not:
        return "~" + to_string( f->lhs );
    case Op::Always:
        return "[] " + to_string( f->lhs );
    case Op::Eventually:
        return "<> " + to_string( f->lhs );
    case Op::BoundedAlways:
        return "[][<=" + std::to_string( f->bound ) + "] " + to_string( f->lhs );
    case Op::BoundedEventually:
        return "<>[<=" + std::to_string( f->bound ) + "] " + to_string( f->lhs );
    default:
        break;
    }
    const char* sym = f->op == Op::And       ? " /\\ "
                      : f->op == Op::Or      ? " \\/ "
                      : f->op == Op::Implies ? " -> "
                      : f->op == Op::Until   ? " U "
                                             : " W ";
    return "(" + to_string( f->lhs ) + sym + to_string( f->rhs ) + ")";
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail
{

class FormulaParser
{
    enum class Tok
    {
        End,
        LParen,
        RParen,
        Not,
        Always,
        Eventually,
        And,
        Or,
        Implies,
        Until,
        WeakUntil,
        True,
        False,
        Ident
    };

    struct Token
    {
        Tok kind = Tok::End;
        std::size_t pos = 0;
        std::string text;
        std::optional<TimeValue> bound;
    };

    std::string_view _src;
    std::size_t _at = 0;
    Token _tok;

    [[noreturn]] void fail( const std::string& msg, std::size_t pos ) const { throw ParseError( msg, pos ); }

    static bool ident_start( char c ) { return std::isalpha( static_cast<unsigned char>( c ) ) || c == '_'; }
    static bool ident_char( char c )
    {
        return std::isalnum( static_cast<unsigned char>( c ) ) || c == '_' || c == '.' || c == '-';
    }

    TimeValue number()
    {
        std::size_t start = _at;
        while ( _at < _src.size() && std::isdigit( static_cast<unsigned char>( _src[_at] ) ) )
            ++_at;
        if ( start == _at )
            fail( "expected a number", start );
        TimeValue v = 0;
        auto [ptr, ec] = std::from_chars( _src.data() + start, _src.data() + _at, v );
        if ( ec != std::errc{} )
            fail( "number out of range", start );
        return v;
    }

    void expect_char( char c )
    {
        skip_ws();
        if ( _at >= _src.size() || _src[_at] != c )
            fail( std::string{ "expected '" } + c + "'", _at );
        ++_at;
    }

    void skip_ws()
    {
        while ( _at < _src.size() && std::isspace( static_cast<unsigned char>( _src[_at] ) ) )
            ++_at;
    }

    /// Parses an optional `[<=n]` suffix after `[]` or `<>`.
    std::optional<TimeValue> bound_suffix()
    {
        if ( _src.substr( _at, 3 ) != "[<=" )
            return std::nullopt;
        std::size_t start = _at;
        _at += 3;
        skip_ws();
        TimeValue b = number();
        expect_char( ']' );
        if ( b == 0 )
            fail( "bound must be > 0", start );
        return b;
    }

    void next()
    {
        skip_ws();
        _tok = Token{};
        _tok.pos = _at;
        if ( _at >= _src.size() )
            return;
        auto rest = _src.substr( _at );
        auto take = [&]( Tok k, std::size_t n ) {
            _tok.kind = k;
            _at += n;
        };
        if ( rest[0] == '(' )
            take( Tok::LParen, 1 );
        else if ( rest[0] == ')' )
            take( Tok::RParen, 1 );
        else if ( rest[0] == '~' )
            take( Tok::Not, 1 );
        else if ( rest.starts_with( "[]" ) )
        {
            take( Tok::Always, 2 );
            _tok.bound = bound_suffix();
        }
        else if ( rest.starts_with( "<>" ) )
        {
            take( Tok::Eventually, 2 );
            _tok.bound = bound_suffix();
        }
        else if ( rest.starts_with( "/\\" ) )
            take( Tok::And, 2 );
        else if ( rest.starts_with( "\\/" ) )
            take( Tok::Or, 2 );
        else if ( rest.starts_with( "->" ) )
            take( Tok::Implies, 2 );
        else if ( ident_start( rest[0] ) )
        {
            std::size_t start = _at;
            while ( _at < _src.size() && ident_char( _src[_at] ) )
            {
                if ( _src[_at] == '-' && _at + 1 < _src.size() && _src[_at + 1] == '>' )
                    break;
                ++_at;
            }
            _tok.text = std::string{ _src.substr( start, _at - start ) };
            if ( _tok.text == "U" )
                _tok.kind = Tok::Until;
            else if ( _tok.text == "W" )
                _tok.kind = Tok::WeakUntil;
            else if ( _tok.text == "true" )
                _tok.kind = Tok::True;
            else if ( _tok.text == "false" )
                _tok.kind = Tok::False;
            else
            {
                _tok.kind = Tok::Ident;
                if ( _tok.text == "clockLeq" )
                {
                    expect_char( '(' );
                    skip_ws();
                    TimeValue b = number();
                    expect_char( ')' );
                    _tok.text = "clockLeq(" + std::to_string( b ) + ")";
                }
            }
        }
        else
            fail( std::string{ "unexpected character '" } + rest[0] + "'", _at );
    }

    Formula implication()
    {
        Formula lhs = disjunction();
        if ( _tok.kind == Tok::Implies )
        {
            next();
            return fm::implies( lhs, implication() );
        }
        return lhs;
    }

    Formula disjunction()
    {
        Formula lhs = conjunction();
        while ( _tok.kind == Tok::Or )
        {
            next();
            lhs = fm::disj( lhs, conjunction() );
        }
        return lhs;
    }

    Formula conjunction()
    {
        Formula lhs = until_level();
        while ( _tok.kind == Tok::And )
        {
            next();
            lhs = fm::conj( lhs, until_level() );
        }
        return lhs;
    }

    Formula until_level()
    {
        Formula lhs = unary();
        if ( _tok.kind == Tok::Until || _tok.kind == Tok::WeakUntil )
        {
            bool weak = _tok.kind == Tok::WeakUntil;
            next();
            Formula rhs = until_level();
            return weak ? fm::weak_until( lhs, rhs ) : fm::until( lhs, rhs );
        }
        return lhs;
    }

    Formula unary()
    {
        Token t = _tok;
        switch ( t.kind )
        {
        case Tok::Not:
            next();
            return fm::neg( unary() );
        case Tok::Always:
            next();
            return t.bound ? fm::always_le( *t.bound, unary() ) : fm::always( unary() );
        case Tok::Eventually:
            next();
            return t.bound ? fm::eventually_le( *t.bound, unary() ) : fm::eventually( unary() );
        case Tok::LParen:
        {
            next();
            Formula inner = implication();
            if ( _tok.kind != Tok::RParen )
                fail( "expected ')'", _tok.pos );
            next();
            return inner;
        }
        case Tok::True:
            next();
            return fm::tt();
        case Tok::False:
            next();
            return fm::ff();
        case Tok::Ident:
            next();
            return fm::prop( t.text );
        case Tok::End:
            fail( "unexpected end of formula", t.pos );
        default:
            fail( "unexpected token", t.pos );
        }
    }

public:
    explicit FormulaParser( std::string_view src ) : _src{ src } {}

    Formula parse()
    {
        next();
        Formula f = implication();
        if ( _tok.kind != Tok::End )
            fail( "trailing input", _tok.pos );
        return f;
    }
};

} // namespace detail

/// Parses the formula grammar (tightest first): unary `~ [] <> [][<=n] <>[<=n]`,
/// then `U`/`W` (right-assoc), `/\`, `\/`, `->` (right-assoc).
[[nodiscard]] inline Formula parse_formula( std::string_view text )
{
    return detail::FormulaParser{ text }.parse();
}

// ---------------------------------------------------------------------------
// Propositions

using Predicate = std::function<bool( const Configuration& )>;

struct PropDef
{
    std::string name;
    Predicate pred;
};

class UnknownPropositionError : public Error
{
public:
    explicit UnknownPropositionError( const std::string& name ) : Error{ "unknown proposition '" + name + "'" } {}
};

/// Named state predicates (the set of atomic propositions and their labeling).
class Labeling
{
    std::vector<PropDef> _defs;

public:
    Labeling() = default;
    Labeling( std::initializer_list<PropDef> defs )
    {
        for ( const auto& d : defs )
            add( d );
    }

    void add( PropDef def )
    {
        if ( contains( def.name ) )
            throw Error( "duplicate proposition '" + def.name + "'" );
        _defs.push_back( std::move( def ) );
    }

    [[nodiscard]] bool contains( std::string_view name ) const { return find( name ) != nullptr; }

    [[nodiscard]] const PropDef* find( std::string_view name ) const
    {
        for ( const auto& d : _defs )
            if ( d.name == name )
                return &d;
        return nullptr;
    }

    [[nodiscard]] const std::vector<PropDef>& defs() const noexcept { return _defs; }

    [[nodiscard]] std::vector<std::string> names() const
    {
        std::vector<std::string> out;
        for ( const auto& d : _defs )
            out.push_back( d.name );
        return out;
    }
};

/// Parses `clockLeq(n)`.
[[nodiscard]] inline std::optional<TimeValue> clock_leq_bound( std::string_view name )
{
    constexpr std::string_view head = "clockLeq(";
    if ( !name.starts_with( head ) || !name.ends_with( ")" ) || name.size() <= head.size() + 1 )
        return std::nullopt;
    auto digits = name.substr( head.size(), name.size() - head.size() - 1 );
    TimeValue v = 0;
    auto [ptr, ec] = std::from_chars( digits.data(), digits.data() + digits.size(), v );
    if ( ec != std::errc{} || ptr != digits.data() + digits.size() )
        return std::nullopt;
    return v;
}

/// The top-level Clock object, if any.
[[nodiscard]] inline const Object* find_clock( const Configuration& c )
{
    for ( const auto& o : c )
        if ( o.is<Clock>() )
            return &o;
    return nullptr;
}

/// Evaluates a proposition. `clockLeq(n)` is built in and reads the
/// top-level Clock unless the labeling defines it explicitly.
[[nodiscard]] inline bool eval_prop( const Labeling& lab, std::string_view name, const Configuration& c )
{
    if ( const auto* def = lab.find( name ) )
        return def->pred( c );
    if ( auto b = clock_leq_bound( name ) )
    {
        const Object* clock = find_clock( c );
        if ( !clock )
            throw Error( "proposition '" + std::string{ name } + "' needs a Clock object" );
        return clock->as<Clock>().clock <= *b;
    }
    throw UnknownPropositionError( std::string{ name } );
}

[[nodiscard]] inline bool has_prop( const Labeling& lab, std::string_view name )
{
    return lab.contains( name ) || clock_leq_bound( name ).has_value();
}

/// A proposition or its negation.
struct Literal
{
    std::string prop;
    bool negated = false;

    [[nodiscard]] Formula formula() const { return negated ? fm::neg( fm::prop( prop ) ) : fm::prop( prop ); }
    [[nodiscard]] std::string str() const { return negated ? "~" + prop : prop; }
    friend bool operator==( const Literal&, const Literal& ) = default;
};

[[nodiscard]] inline bool eval_literal( const Labeling& lab, const Literal& l, const Configuration& c )
{
    return eval_prop( lab, l.prop, c ) != l.negated;
}

// ---------------------------------------------------------------------------
// MTL class recognition

struct BoundedLiteral
{
    Literal lit;
    TimeValue bound = 0;
    friend bool operator==( const BoundedLiteral&, const BoundedLiteral& ) = default;
};

/// `[] \/_i <>[<=b_i] q_i`
struct ResponseClass
{
    std::vector<BoundedLiteral> disjuncts;
};

/// `[] (p \/ [][<=b] q)`
struct SafetyClass
{
    Literal p;
    Literal q;
    TimeValue bound = 0;
};

struct PureLtlClass
{
};

struct UnsupportedClass
{
    std::string reason;
};

using MtlClass = std::variant<ResponseClass, SafetyClass, PureLtlClass, UnsupportedClass>;

namespace detail
{

/// Removes `->` and double negation at the top of f.
inline Formula normalize_top( const Formula& f )
{
    if ( f->op == Op::Implies )
        return fm::disj( normalize_top( fm::neg( f->lhs ) ), normalize_top( f->rhs ) );
    if ( f->op == Op::Not && f->lhs->op == Op::Not )
        return normalize_top( f->lhs->lhs );
    return f;
}

inline void flatten_or( const Formula& f, std::vector<Formula>& out )
{
    Formula g = normalize_top( f );
    if ( g->op == Op::Or )
    {
        flatten_or( g->lhs, out );
        flatten_or( g->rhs, out );
    }
    else
        out.push_back( g );
}

inline std::optional<Literal> as_literal( const Formula& f )
{
    Formula g = normalize_top( f );
    if ( g->op == Op::Prop )
        return Literal{ g->name, false };
    if ( g->op == Op::Not && g->lhs->op == Op::Prop )
        return Literal{ g->lhs->name, true };
    return std::nullopt;
}

inline bool bounded_over_literals_only( const Formula& f )
{
    if ( !f )
        return true;
    if ( is_bounded( f->op ) )
        return as_literal( f->lhs ).has_value();
    return bounded_over_literals_only( f->lhs ) && bounded_over_literals_only( f->rhs );
}

} // namespace detail

[[nodiscard]] inline MtlClass classify_mtl( const Formula& f )
{
    if ( !contains_bounded( f ) )
        return PureLtlClass{};
    if ( !detail::bounded_over_literals_only( f ) )
        return UnsupportedClass{ "bounded operator over non-literal" };
    if ( f->op != Op::Always )
        return UnsupportedClass{ "bounded formula must have the form [] (...)" };

    std::vector<Formula> parts;
    detail::flatten_or( f->lhs, parts );

    bool all_eventually = std::ranges::all_of( parts, []( const Formula& g ) { return g->op == Op::BoundedEventually; } );
    if ( all_eventually )
    {
        ResponseClass r;
        for ( const auto& g : parts )
            r.disjuncts.push_back( { *detail::as_literal( g->lhs ), g->bound } );
        return r;
    }

    if ( parts.size() == 2 )
        for ( int i = 0; i < 2; ++i )
        {
            const auto& a = parts[i];
            const auto& b = parts[1 - i];
            auto p = detail::as_literal( a );
            if ( p && b->op == Op::BoundedAlways )
                return SafetyClass{ *p, *detail::as_literal( b->lhs ), b->bound };
        }

    return UnsupportedClass{ "bounded formula is neither generalized time-bounded response nor time-bounded safety" };
}

} // namespace rtmc
