#pragma once

// Configurations: nested multisets of objects (ports, timers, clocks,
// connectors and the three component kinds), plus the time-distribution
// functions delta, mte and consistent.

#include "time.hpp"

#include <algorithm>
#include <functional>
#include <initializer_list>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace rtmc
{

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Hierarchical object name such as `SYS.imgChange`.
class ObjectId
{
    std::string _path;

public:
    ObjectId() = default;
    ObjectId( std::string path ) : _path{ std::move( path ) } {} // NOLINT
    ObjectId( const char* path ) : _path{ path } {}              // NOLINT

    [[nodiscard]] const std::string& str() const noexcept { return _path; }

    friend auto operator<=>( const ObjectId&, const ObjectId& ) = default;
    friend bool operator==( const ObjectId&, const ObjectId& ) = default;
    friend std::ostream& operator<<( std::ostream& os, const ObjectId& id ) { return os << id._path; }
};

class ResolutionError : public Error
{
    ObjectId _missing;

public:
    explicit ResolutionError( ObjectId missing, const std::string& what )
            : Error{ what }, _missing{ std::move( missing ) }
    {
    }
    [[nodiscard]] const ObjectId& missing() const noexcept { return _missing; }
};

class UnknownObjectError : public Error
{
public:
    explicit UnknownObjectError( const ObjectId& id ) : Error{ "unknown object id '" + id.str() + "'" } {}
};

class DuplicateObjectError : public Error
{
public:
    explicit DuplicateObjectError( const ObjectId& id ) : Error{ "duplicate object id '" + id.str() + "'" } {}
};

struct Object;

/// A multiset of objects with pairwise distinct ids. Objects are kept sorted
/// by id, so equality and iteration order are independent of insertion order.
class Configuration
{
    std::vector<Object> _objects;

    [[nodiscard]] std::vector<Object>::const_iterator lower( const ObjectId& id ) const;
    [[nodiscard]] std::vector<Object>::iterator lower( const ObjectId& id );

public:
    Configuration() = default;
    Configuration( std::initializer_list<Object> objects );
    explicit Configuration( std::vector<Object> objects );

    void insert( Object object );
    void insert_or_assign( Object object );
    bool erase( const ObjectId& id );

    [[nodiscard]] const Object* find( const ObjectId& id ) const;
    [[nodiscard]] Object* find( const ObjectId& id );
    [[nodiscard]] bool contains( const ObjectId& id ) const { return find( id ) != nullptr; }

    /// Throws UnknownObjectError when absent at this level.
    [[nodiscard]] const Object& at( const ObjectId& id ) const;
    [[nodiscard]] Object& at( const ObjectId& id );

    [[nodiscard]] std::size_t size() const noexcept { return _objects.size(); }
    [[nodiscard]] bool empty() const noexcept { return _objects.empty(); }

    [[nodiscard]] std::span<const Object> objects() const noexcept { return _objects; }
    [[nodiscard]] std::span<Object> objects() noexcept { return _objects; }
    [[nodiscard]] auto begin() const { return _objects.begin(); }
    [[nodiscard]] auto end() const { return _objects.end(); }
    [[nodiscard]] auto begin() { return _objects.begin(); }
    [[nodiscard]] auto end() { return _objects.end(); }

    /// Multiset union; ids must not collide.
    [[nodiscard]] Configuration merged( const Configuration& other ) const;
};

bool operator==( const Configuration& a, const Configuration& b );

struct Port
{
    bool value = false;
    friend bool operator==( const Port&, const Port& ) = default;
};

struct Timer
{
    TimeInf value;
    friend bool operator==( const Timer&, const Timer& ) = default;
};

struct OnOffTimer
{
    TimeInf value;
    bool active = false;
    friend bool operator==( const OnOffTimer&, const OnOffTimer& ) = default;
};

struct DelayTimer
{
    TimeInf value;
    TimeInf delay;
    friend bool operator==( const DelayTimer&, const DelayTimer& ) = default;
};

enum class ClockStatus
{
    on,
    off
};

/// Clock installed by the MTL transformations. `bound` is the largest bound
/// of the transformed formula: while on, the clock advances up to bound+1 and
/// then freezes.
struct Clock
{
    TimeValue clock = 0;
    ClockStatus status = ClockStatus::off;
    TimeValue bound = 0;
    friend bool operator==( const Clock&, const Clock& ) = default;
};

struct Connector
{
    ObjectId source;
    ObjectId target;
    friend bool operator==( const Connector&, const Connector& ) = default;
};

struct DelegateConnector
{
    ObjectId source;
    ObjectId target;
    friend bool operator==( const DelegateConnector&, const DelegateConnector& ) = default;
};

struct BasicComponent
{
    Configuration prov;
    Configuration req;
    friend bool operator==( const BasicComponent&, const BasicComponent& ) = default;
};

struct TimedComponent
{
    Configuration prov;
    Configuration req;
    Configuration tstate;
    friend bool operator==( const TimedComponent&, const TimedComponent& ) = default;
};

struct HierComponent
{
    Configuration prov;
    Configuration req;
    Configuration tstate;
    Configuration innerreq;
    Configuration assembly;
    friend bool operator==( const HierComponent&, const HierComponent& ) = default;
};

using ObjectBody = std::variant<Port, Timer, OnOffTimer, DelayTimer, Clock, Connector, DelegateConnector,
                                BasicComponent, TimedComponent, HierComponent>;

struct Object
{
    ObjectId id;
    ObjectBody body;

    template <class T>
    [[nodiscard]] bool is() const noexcept
    {
        return std::holds_alternative<T>( body );
    }
    template <class T>
    [[nodiscard]] const T& as() const
    {
        return std::get<T>( body );
    }
    template <class T>
    [[nodiscard]] T& as()
    {
        return std::get<T>( body );
    }

    friend bool operator==( const Object&, const Object& ) = default;
};

// ---------------------------------------------------------------------------
// Configuration members

inline Configuration::Configuration( std::initializer_list<Object> objects )
{
    for ( const auto& o : objects )
        insert( o );
}

inline Configuration::Configuration( std::vector<Object> objects )
{
    for ( auto& o : objects )
        insert( std::move( o ) );
}

inline std::vector<Object>::const_iterator Configuration::lower( const ObjectId& id ) const
{
    return std::lower_bound( _objects.begin(), _objects.end(), id,
                             []( const Object& o, const ObjectId& key ) { return o.id < key; } );
}

inline std::vector<Object>::iterator Configuration::lower( const ObjectId& id )
{
    return std::lower_bound( _objects.begin(), _objects.end(), id,
                             []( const Object& o, const ObjectId& key ) { return o.id < key; } );
}

inline void Configuration::insert( Object object )
{
    auto it = lower( object.id );
    if ( it != _objects.end() && it->id == object.id )
        throw DuplicateObjectError( object.id );
    _objects.insert( it, std::move( object ) );
}

inline void Configuration::insert_or_assign( Object object )
{
    auto it = lower( object.id );
    if ( it != _objects.end() && it->id == object.id )
        *it = std::move( object );
    else
        _objects.insert( it, std::move( object ) );
}

inline bool Configuration::erase( const ObjectId& id )
{
    auto it = lower( id );
    if ( it == _objects.end() || it->id != id )
        return false;
    _objects.erase( it );
    return true;
}

inline const Object* Configuration::find( const ObjectId& id ) const
{
    auto it = lower( id );
    return it != _objects.end() && it->id == id ? &*it : nullptr;
}

inline Object* Configuration::find( const ObjectId& id )
{
    auto it = lower( id );
    return it != _objects.end() && it->id == id ? &*it : nullptr;
}

inline const Object& Configuration::at( const ObjectId& id ) const
{
    if ( const auto* o = find( id ) )
        return *o;
    throw UnknownObjectError( id );
}

inline Object& Configuration::at( const ObjectId& id )
{
    if ( auto* o = find( id ) )
        return *o;
    throw UnknownObjectError( id );
}

inline Configuration Configuration::merged( const Configuration& other ) const
{
    Configuration out = *this;
    for ( const auto& o : other )
        out.insert( o );
    return out;
}

inline bool operator==( const Configuration& a, const Configuration& b )
{
    return std::ranges::equal( a.objects(), b.objects() );
}

// ---------------------------------------------------------------------------
// Component attribute scopes

enum class Scope
{
    prov,
    req,
    tstate,
    innerreq,
    assembly
};

inline constexpr Scope all_scopes[] = { Scope::prov, Scope::req, Scope::tstate, Scope::innerreq, Scope::assembly };

[[nodiscard]] inline bool is_component( const Object& o ) noexcept
{
    return o.is<BasicComponent>() || o.is<TimedComponent>() || o.is<HierComponent>();
}

[[nodiscard]] inline bool is_timer( const Object& o ) noexcept
{
    return o.is<Timer>() || o.is<OnOffTimer>() || o.is<DelayTimer>();
}

/// The attribute of a component, or nullptr when the object has no such
/// attribute (a HierComponent supports all five, a TimedComponent the first
/// three, a BasicComponent prov/req).
[[nodiscard]] inline const Configuration* scope( const Object& o, Scope s ) noexcept
{
    return std::visit(
            [s]( const auto& b ) -> const Configuration* {
                using T = std::decay_t<decltype( b )>;
                if constexpr ( std::is_same_v<T, BasicComponent> || std::is_same_v<T, TimedComponent> ||
                               std::is_same_v<T, HierComponent> )
                {
                    if ( s == Scope::prov )
                        return &b.prov;
                    if ( s == Scope::req )
                        return &b.req;
                    if constexpr ( !std::is_same_v<T, BasicComponent> )
                        if ( s == Scope::tstate )
                            return &b.tstate;
                    if constexpr ( std::is_same_v<T, HierComponent> )
                    {
                        if ( s == Scope::innerreq )
                            return &b.innerreq;
                        if ( s == Scope::assembly )
                            return &b.assembly;
                    }
                }
                return nullptr;
            },
            o.body );
}

[[nodiscard]] inline Configuration* scope( Object& o, Scope s ) noexcept
{
    return const_cast<Configuration*>( scope( std::as_const( o ), s ) );
}

/// Finds a port of a component by id within the given scope, or nullptr.
[[nodiscard]] inline Port* component_port( Object& component, Scope s, const ObjectId& port )
{
    auto* sc = scope( component, s );
    if ( !sc )
        return nullptr;
    auto* o = sc->find( port );
    return o && o->is<Port>() ? &o->as<Port>() : nullptr;
}

[[nodiscard]] inline const Port* component_port( const Object& component, Scope s, const ObjectId& port )
{
    return component_port( const_cast<Object&>( component ), s, port );
}

// ---------------------------------------------------------------------------
// Recursive traversal and lookup

/// Visits every object, depth-first, recursing into all component scopes.
inline void for_each_object( const Configuration& c, const std::function<void( const Object& )>& fn )
{
    for ( const auto& o : c )
    {
        fn( o );
        for ( auto s : all_scopes )
            if ( const auto* sc = scope( o, s ) )
                for_each_object( *sc, fn );
    }
}

[[nodiscard]] inline const Object* find_object( const Configuration& c, const ObjectId& id )
{
    if ( const auto* o = c.find( id ) )
        return o;
    for ( const auto& o : c )
        for ( auto s : all_scopes )
            if ( const auto* sc = scope( o, s ) )
                if ( const auto* hit = find_object( *sc, id ) )
                    return hit;
    return nullptr;
}

[[nodiscard]] inline Object* find_object( Configuration& c, const ObjectId& id )
{
    return const_cast<Object*>( find_object( std::as_const( c ), id ) );
}

/// Resolves an id anywhere in the configuration, through component scopes.
[[nodiscard]] inline const Object& lookup( const Configuration& c, const ObjectId& id )
{
    if ( const auto* o = find_object( c, id ) )
        return *o;
    throw UnknownObjectError( id );
}

[[nodiscard]] inline Object& lookup( Configuration& c, const ObjectId& id )
{
    if ( auto* o = find_object( c, id ) )
        return *o;
    throw UnknownObjectError( id );
}

/// Throws DuplicateObjectError if any id occurs twice anywhere in c.
inline void check_unique_ids( const Configuration& c )
{
    std::vector<ObjectId> ids;
    for_each_object( c, [&]( const Object& o ) { ids.push_back( o.id ); } );
    std::sort( ids.begin(), ids.end() );
    auto dup = std::adjacent_find( ids.begin(), ids.end() );
    if ( dup != ids.end() )
        throw DuplicateObjectError( *dup );
}

// ---------------------------------------------------------------------------
// Time distribution

[[nodiscard]] inline Clock delta( const Clock& c, TimeValue t )
{
    Clock out = c;
    if ( c.status == ClockStatus::on && c.clock <= c.bound )
        out.clock = std::min( c.clock + t, c.bound + 1 );
    return out;
}

[[nodiscard]] Configuration delta( const Configuration& c, TimeValue t );

[[nodiscard]] inline Object delta( const Object& o, TimeValue t )
{
    Object out = o;
    std::visit(
            [t]( auto& b ) {
                using T = std::decay_t<decltype( b )>;
                if constexpr ( std::is_same_v<T, Timer> || std::is_same_v<T, DelayTimer> )
                    b.value = monus( b.value, t );
                else if constexpr ( std::is_same_v<T, OnOffTimer> )
                {
                    if ( b.active )
                        b.value = monus( b.value, t );
                }
                else if constexpr ( std::is_same_v<T, Clock> )
                    b = delta( b, t );
                else if constexpr ( std::is_same_v<T, HierComponent> )
                {
                    b.tstate = delta( b.tstate, t );
                    b.assembly = delta( b.assembly, t );
                }
                else if constexpr ( std::is_same_v<T, TimedComponent> )
                    b.tstate = delta( b.tstate, t );
            },
            out.body );
    return out;
}

/// Effect of `t` time units elapsing. Ports and connectors never change.
inline Configuration delta( const Configuration& c, TimeValue t )
{
    if ( t == 0 )
        return c;
    Configuration out = c;
    for ( auto& o : out.objects() )
        o = delta( o, t );
    return out;
}

[[nodiscard]] TimeInf mte( const Configuration& c );

[[nodiscard]] inline TimeInf mte( const Object& o )
{
    return std::visit(
            []( const auto& b ) -> TimeInf {
                using T = std::decay_t<decltype( b )>;
                if constexpr ( std::is_same_v<T, Timer> || std::is_same_v<T, DelayTimer> )
                    return b.value;
                else if constexpr ( std::is_same_v<T, OnOffTimer> )
                    return b.active ? b.value : INF;
                else if constexpr ( std::is_same_v<T, HierComponent> )
                    return min( mte( b.tstate ), mte( b.assembly ) );
                else if constexpr ( std::is_same_v<T, TimedComponent> )
                    return mte( b.tstate );
                else
                    return INF;
            },
            o.body );
}

/// Maximum time elapse before some action must happen.
inline TimeInf mte( const Configuration& c )
{
    TimeInf result = INF;
    for ( const auto& o : c )
        result = min( result, mte( o ) );
    return result;
}

// ---------------------------------------------------------------------------
// Consistency

namespace detail
{

/// A connector endpoint resolves to a port of a component at the same level,
/// or to an outer/inner port of the enclosing hierarchical component.
inline const Port& resolve_port( const Configuration& level, const Object* enclosing, const ObjectId& id )
{
    for ( const auto& o : level )
    {
        if ( !is_component( o ) )
            continue;
        if ( const auto* p = component_port( o, Scope::prov, id ) )
            return *p;
        if ( const auto* p = component_port( o, Scope::req, id ) )
            return *p;
    }
    if ( enclosing )
        for ( auto s : { Scope::prov, Scope::req, Scope::innerreq } )
            if ( const auto* p = component_port( *enclosing, s, id ) )
                return *p;
    throw ResolutionError( id, "connector endpoint '" + id.str() + "' does not resolve to a port" );
}

inline bool consistent_level( const Configuration& level, const Object* enclosing )
{
    for ( const auto& o : level )
    {
        const ObjectId* src = nullptr;
        const ObjectId* dst = nullptr;
        if ( o.is<Connector>() )
        {
            src = &o.as<Connector>().source;
            dst = &o.as<Connector>().target;
        }
        else if ( o.is<DelegateConnector>() )
        {
            src = &o.as<DelegateConnector>().source;
            dst = &o.as<DelegateConnector>().target;
        }
        if ( src && resolve_port( level, enclosing, *src ).value != resolve_port( level, enclosing, *dst ).value )
            return false;
    }
    for ( const auto& o : level )
        if ( o.is<HierComponent>() && !consistent_level( o.as<HierComponent>().assembly, &o ) )
            return false;
    return true;
}

} // namespace detail

/// True iff all connected ports agree in value, recursively through
/// assemblies.
[[nodiscard]] inline bool consistent( const Configuration& c )
{
    return detail::consistent_level( c, nullptr );
}

/// A component is consistent when its assembly is; components without an
/// assembly always are.
[[nodiscard]] inline bool consistent_component( const Object& component )
{
    if ( !component.is<HierComponent>() )
        return true;
    return detail::consistent_level( component.as<HierComponent>().assembly, &component );
}

// ---------------------------------------------------------------------------
// Canonical keys and printing

using StateKey = std::string;

namespace detail
{

inline void write_key( std::string& out, const Configuration& c );

inline void write_time( std::string& out, TimeInf t )
{
    if ( t.is_inf() )
        out += 'I';
    else
        out += std::to_string( t.value() );
}

inline void write_key( std::string& out, const Object& o )
{
    out += o.id.str();
    out += ':';
    std::visit(
            [&out, &o]( const auto& b ) {
                using T = std::decay_t<decltype( b )>;
                if constexpr ( std::is_same_v<T, Port> )
                    out += b.value ? "P1" : "P0";
                else if constexpr ( std::is_same_v<T, Timer> )
                {
                    out += 'T';
                    write_time( out, b.value );
                }
                else if constexpr ( std::is_same_v<T, OnOffTimer> )
                {
                    out += b.active ? "O1," : "O0,";
                    write_time( out, b.value );
                }
                else if constexpr ( std::is_same_v<T, DelayTimer> )
                {
                    out += 'D';
                    write_time( out, b.value );
                    out += ',';
                    write_time( out, b.delay );
                }
                else if constexpr ( std::is_same_v<T, Clock> )
                {
                    out += b.status == ClockStatus::on ? "K1," : "K0,";
                    out += std::to_string( b.clock );
                    out += ',';
                    out += std::to_string( b.bound );
                }
                else if constexpr ( std::is_same_v<T, Connector> || std::is_same_v<T, DelegateConnector> )
                {
                    out += std::is_same_v<T, Connector> ? 'C' : 'G';
                    out += b.source.str();
                    out += '>';
                    out += b.target.str();
                }
                else
                {
                    out += std::is_same_v<T, BasicComponent> ? 'B' : std::is_same_v<T, TimedComponent> ? 'M' : 'H';
                    out += '{';
                    for ( auto s : all_scopes )
                        if ( const auto* sc = scope( o, s ) )
                        {
                            write_key( out, *sc );
                            out += '|';
                        }
                    out += '}';
                }
            },
            o.body );
}

inline void write_key( std::string& out, const Configuration& c )
{
    out += '[';
    for ( const auto& o : c )
    {
        write_key( out, o );
        out += ';';
    }
    out += ']';
}

} // namespace detail

/// Deterministic, order-independent key; equal keys iff equal configurations.
[[nodiscard]] inline StateKey canonicalize( const Configuration& c )
{
    StateKey key;
    key.reserve( 256 );
    detail::write_key( key, c );
    return key;
}

std::string to_string( const Configuration& c, int indent = 0 );

/// Object in Real-Time Maude-like notation, e.g. `< p : Port | value : true >`.
[[nodiscard]] inline std::string to_string( const Object& o, int indent = 0 )
{
    auto b2s = []( bool b ) { return b ? std::string{ "true" } : std::string{ "false" }; };
    std::string pad( static_cast<std::size_t>( indent ), ' ' );
    std::ostringstream os;
    os << pad << "< " << o.id << " : ";
    std::visit(
            [&]( const auto& b ) {
                using T = std::decay_t<decltype( b )>;
                if constexpr ( std::is_same_v<T, Port> )
                    os << "Port | value : " << b2s( b.value ) << " >";
                else if constexpr ( std::is_same_v<T, Timer> )
                    os << "Timer | value : " << b.value << " >";
                else if constexpr ( std::is_same_v<T, OnOffTimer> )
                    os << "OnOffTimer | value : " << b.value << ", active : " << b2s( b.active ) << " >";
                else if constexpr ( std::is_same_v<T, DelayTimer> )
                    os << "DelayTimer | value : " << b.value << ", delay : " << b.delay << " >";
                else if constexpr ( std::is_same_v<T, Clock> )
                    os << "Clock | clock : " << b.clock
                       << ", status : " << ( b.status == ClockStatus::on ? "on" : "off" ) << " >";
                else if constexpr ( std::is_same_v<T, Connector> )
                    os << "Connector | source : " << b.source << ", target : " << b.target << " >";
                else if constexpr ( std::is_same_v<T, DelegateConnector> )
                    os << "DelegateConnector | source : " << b.source << ", target : " << b.target << " >";
                else
                {
                    os << ( std::is_same_v<T, BasicComponent>   ? "BasicComponent"
                            : std::is_same_v<T, TimedComponent> ? "TimedComponent"
                                                                : "Component" )
                       << " |\n";
                    static constexpr const char* names[] = { "prov", "req", "tstate", "innerreq", "assembly" };
                    bool first = true;
                    for ( auto s : all_scopes )
                        if ( const auto* sc = scope( o, s ) )
                        {
                            if ( !first )
                                os << ",\n";
                            first = false;
                            os << pad << "    " << names[static_cast<int>( s )] << " :";
                            if ( sc->empty() )
                                os << " none";
                            else
                                os << "\n" << to_string( *sc, indent + 6 );
                        }
                    os << " >";
                }
            },
            o.body );
    return os.str();
}

inline std::string to_string( const Configuration& c, int indent )
{
    std::string out;
    bool first = true;
    for ( const auto& o : c )
    {
        if ( !first )
            out += '\n';
        first = false;
        out += to_string( o, indent );
    }
    return out;
}

} // namespace rtmc
