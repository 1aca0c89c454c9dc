#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace rtmc
{

/// Discrete time in milliseconds.
using TimeValue = std::uint64_t;

/// Truncated subtraction: never drops below zero.
[[nodiscard]] constexpr TimeValue monus( TimeValue a, TimeValue b ) noexcept
{
    return a > b ? a - b : 0;
}

/// A time value extended with a distinguished infinity, ordered above every
/// finite value.
class TimeInf
{
    TimeValue _value = 0;
    bool _inf = false;

    constexpr TimeInf( TimeValue v, bool inf ) : _value{ v }, _inf{ inf } {}

public:
    constexpr TimeInf() = default;
    constexpr TimeInf( TimeValue v ) : _value{ v } {} // NOLINT: implicit by design of the time sort

    [[nodiscard]] static constexpr TimeInf inf() noexcept { return { 0, true }; }

    [[nodiscard]] constexpr bool is_inf() const noexcept { return _inf; }
    [[nodiscard]] constexpr bool is_finite() const noexcept { return !_inf; }

    [[nodiscard]] constexpr TimeValue value() const
    {
        if ( _inf )
            throw std::logic_error( "value() of INF" );
        return _value;
    }

    friend constexpr bool operator==( const TimeInf& a, const TimeInf& b ) noexcept
    {
        return a._inf == b._inf && ( a._inf || a._value == b._value );
    }

    friend constexpr std::strong_ordering operator<=>( const TimeInf& a, const TimeInf& b ) noexcept
    {
        if ( a._inf || b._inf )
            return a._inf <=> b._inf;
        return a._value <=> b._value;
    }

    [[nodiscard]] std::string to_string() const { return _inf ? "INF" : std::to_string( _value ); }

    friend std::ostream& operator<<( std::ostream& os, const TimeInf& t ) { return os << t.to_string(); }
};

inline constexpr TimeInf INF = TimeInf::inf();

/// `INF monus t = INF`.
[[nodiscard]] constexpr TimeInf monus( TimeInf a, TimeValue b ) noexcept
{
    return a.is_inf() ? a : TimeInf{ monus( a.value(), b ) };
}

[[nodiscard]] constexpr TimeInf min( TimeInf a, TimeInf b ) noexcept
{
    return a <= b ? a : b;
}

} // namespace rtmc
