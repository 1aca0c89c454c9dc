#pragma once

// The adaptive digital-advertising case study: a hierarchical SYS component
// with two configurations and a nondeterministic environment ENV.

#include "engine.hpp"

namespace rtmc::advert
{

struct AdvertParams
{
    TimeValue reconf_duration = 250;
    TimeValue monitor1_timeout = 2000;
    TimeValue monitor2_timeout = 500;
    TimeValue env_period = 50;

    void validate() const
    {
        if ( reconf_duration == 0 || monitor1_timeout == 0 || monitor2_timeout == 0 || env_period == 0 )
            throw Error( "advert parameters must all be > 0" );
    }
};

struct AdvertModel
{
    Theory theory;
    Configuration initial;
};

namespace detail
{

inline Object port( const char* id, bool v )
{
    return { id, Port{ v } };
}

inline Object conn( const char* id, const char* src, const char* dst )
{
    return { id, Connector{ src, dst } };
}

inline Object dconn( const char* id, const char* src, const char* dst )
{
    return { id, DelegateConnector{ src, dst } };
}

inline Object config1_link() { return conn( "c3", "Interaction.alterContent", "Render.alterContent" ); }
inline Object config1_delegate() { return dconn( "d3", "MonitorOne.reconf", "SYS.reconf" ); }
inline Object config2_link() { return conn( "c5", "Presentation.alterContent", "Render.alterContent" ); }
inline Object config2_delegate() { return dconn( "d4", "MonitorTwo.reconf", "SYS.reconf" ); }

inline bool& port_value( Object& component, Scope s, const char* id )
{
    return scope( component, s )->at( id ).as<Port>().value;
}

inline bool port_value( const Object& component, Scope s, const char* id )
{
    return scope( component, s )->at( id ).as<Port>().value;
}

/// Monitor timer update shared by both monitors: count while the observed
/// port has `counting_value` and the monitor is active, otherwise park the
/// timer at INF. An expired timer is left alone.
inline std::function<void( Object& )> monitor_beh( const char* timer, const char* observed, bool counting_value,
                                                  TimeValue timeout )
{
    return [=]( Object& o ) {
        auto& tm = o.as<TimedComponent>().tstate.at( timer ).as<OnOffTimer>();
        bool b = port_value( o, Scope::req, observed );
        TimeInf t = tm.value;
        if ( ( b != counting_value || !tm.active ) && t != TimeInf{ 0 } )
            tm.value = INF;
        else if ( t.is_inf() )
            tm.value = timeout;
    };
}

inline const HierComponent& sys( const Configuration& c )
{
    return c.at( "SYS" ).as<HierComponent>();
}

inline bool in_config( const Configuration& c, const char* link, const char* delegate )
{
    const auto& a = sys( c ).assembly;
    return a.contains( link ) && a.contains( delegate );
}

} // namespace detail

[[nodiscard]] inline BehaviorTable advert_behaviors( const AdvertParams& p )
{
    using detail::port_value;
    BehaviorTable beh;
    beh["Camera"] = []( Object& o ) {
        port_value( o, Scope::prov, "Camera.persThere" ) = port_value( std::as_const( o ), Scope::req, "Camera.persThereIn" );
    };
    beh["Interaction"] = []( Object& o ) {
        bool v = port_value( std::as_const( o ), Scope::req, "Interaction.persThere" );
        port_value( o, Scope::prov, "Interaction.gesture" ) = v;
        port_value( o, Scope::prov, "Interaction.alterContent" ) = v;
    };
    beh["Render"] = []( Object& o ) {
        port_value( o, Scope::prov, "Render.imgChange" ) = port_value( std::as_const( o ), Scope::req, "Render.alterContent" );
    };
    beh["MonitorOne"] = detail::monitor_beh( "m1timer", "MonitorOne.gesture", false, p.monitor1_timeout );
    beh["MonitorTwo"] = detail::monitor_beh( "m2timer", "MonitorTwo.persThere", true, p.monitor2_timeout );
    beh["SYS"] = [d = p.reconf_duration]( Object& o ) {
        auto& h = o.as<HierComponent>();
        auto& t = h.tstate.at( "reconftimer" ).as<Timer>();
        if ( h.innerreq.at( "SYS.reconf" ).as<Port>().value && t.value.is_inf() )
            t.value = d;
    };
    return beh;
}

[[nodiscard]] inline Configuration advert_initial( const AdvertParams& p )
{
    using namespace detail;
    HierComponent sys;
    sys.prov = { port( "SYS.imgChange", true ) };
    sys.req = { port( "SYS.persThereIn", true ) };
    sys.tstate = { Object{ "reconftimer", Timer{ INF } } };
    sys.innerreq = { port( "SYS.reconf", false ) };
    sys.assembly = {
            Object{ "Camera", BasicComponent{ { port( "Camera.persThere", true ) }, { port( "Camera.persThereIn", true ) } } },
            Object{ "Interaction",
                    BasicComponent{ { port( "Interaction.gesture", true ), port( "Interaction.alterContent", true ) },
                                    { port( "Interaction.persThere", true ) } } },
            Object{ "Render", BasicComponent{ { port( "Render.imgChange", true ) }, { port( "Render.alterContent", true ) } } },
            Object{ "Presentation", BasicComponent{ { port( "Presentation.alterContent", true ) }, {} } },
            Object{ "MonitorOne", TimedComponent{ { port( "MonitorOne.reconf", false ) },
                                                  { port( "MonitorOne.gesture", true ) },
                                                  { Object{ "m1timer", OnOffTimer{ INF, true } } } } },
            Object{ "MonitorTwo", TimedComponent{ { port( "MonitorTwo.reconf", false ) },
                                                  { port( "MonitorTwo.persThere", true ) },
                                                  { Object{ "m2timer", OnOffTimer{ INF, false } } } } },
            conn( "c1", "Camera.persThere", "Interaction.persThere" ),
            conn( "c2", "Interaction.gesture", "MonitorOne.gesture" ),
            conn( "c4", "Camera.persThere", "MonitorTwo.persThere" ),
            config1_link(),
            config1_delegate(),
            dconn( "d1", "SYS.persThereIn", "Camera.persThereIn" ),
            dconn( "d2", "Render.imgChange", "SYS.imgChange" ),
    };

    Configuration c{
            Object{ "SYS", std::move( sys ) },
            Object{ "ENV", TimedComponent{ { port( "ENV.persThereIn", true ) },
                                           { port( "ENV.imgChange", true ) },
                                           { Object{ "envdtimer", DelayTimer{ 0, p.env_period } } } } },
            conn( "CONN1", "ENV.persThereIn", "SYS.persThereIn" ),
            conn( "CONN2", "SYS.imgChange", "ENV.imgChange" ),
    };
    check_unique_ids( c );
    return c;
}

namespace detail
{

/// `[monitorX-signal]` at assembly level: an expired active monitor timer
/// raises the monitor's reconfiguration port.
inline Rule monitor_signal( const char* label, const char* monitor, const char* timer, const char* reconf_port )
{
    auto fn = [=]( const Configuration& asmb ) {
        std::vector<Configuration> out;
        const Object* m = asmb.find( monitor );
        if ( !m )
            return out;
        const auto& tm = m->as<TimedComponent>().tstate.at( timer ).as<OnOffTimer>();
        if ( !tm.active || tm.value != TimeInf{ 0 } || port_value( *m, Scope::prov, reconf_port ) )
            return out;
        Configuration next = asmb;
        Object& mn = next.at( monitor );
        mn.as<TimedComponent>().tstate.at( timer ).as<OnOffTimer>() = OnOffTimer{ INF, false };
        port_value( mn, Scope::prov, reconf_port ) = true;
        out.push_back( std::move( next ) );
        return out;
    };
    return Rule{ label, Trigger::timer_expiry, std::move( fn ) };
}

struct ConfigSide
{
    std::function<Object()> link;
    std::function<Object()> delegate;
    const char* monitor;
    const char* timer;
    const char* reconf_port;
};

/// `[reconf-Ca-to-Cb]`: when the reconfiguration timer expires, swap the
/// connector sets, park the old monitor and activate the new one.
inline Rule reconfigure( const char* label, ConfigSide from, ConfigSide to, BehaviorTable beh )
{
    auto fn = [=]( const Configuration& c ) {
        std::vector<Configuration> out;
        const Object* s = c.find( "SYS" );
        if ( !s || !s->is<HierComponent>() )
            return out;
        const auto& h = s->as<HierComponent>();
        if ( h.tstate.at( "reconftimer" ).as<Timer>().value != TimeInf{ 0 } )
            return out;
        Object link = from.link();
        Object dlg = from.delegate();
        if ( !h.assembly.contains( link.id ) || !h.assembly.contains( dlg.id ) )
            return out;
        const auto& newtm = h.assembly.at( to.monitor ).as<TimedComponent>().tstate.at( to.timer ).as<OnOffTimer>();
        if ( newtm.active || !newtm.value.is_inf() )
            return out;

        Configuration next = c;
        auto& hn = next.at( "SYS" ).as<HierComponent>();
        hn.tstate.at( "reconftimer" ).as<Timer>().value = INF;
        hn.assembly.erase( link.id );
        hn.assembly.erase( dlg.id );
        hn.assembly.insert( to.link() );
        hn.assembly.insert( to.delegate() );

        Object& old_m = hn.assembly.at( from.monitor );
        old_m.as<TimedComponent>().tstate.at( from.timer ).as<OnOffTimer>() = OnOffTimer{ INF, false };
        port_value( old_m, Scope::prov, from.reconf_port ) = false;

        Object& new_m = hn.assembly.at( to.monitor );
        new_m.as<TimedComponent>().tstate.at( to.timer ).as<OnOffTimer>() = OnOffTimer{ INF, true };
        apply_beh( beh, new_m );
        out.push_back( std::move( next ) );
        return out;
    };
    return Rule{ label, Trigger::timer_expiry, std::move( fn ) };
}

inline Rule env_choice( const char* label, bool value )
{
    auto fn = [value]( const Configuration& c ) {
        std::vector<Configuration> out;
        const Object* env = c.find( "ENV" );
        if ( !env )
            return out;
        const auto& dt = env->as<TimedComponent>().tstate.at( "envdtimer" ).as<DelayTimer>();
        if ( dt.value != TimeInf{ 0 } )
            return out;
        Configuration next = c;
        Object& en = next.at( "ENV" );
        auto& t = en.as<TimedComponent>().tstate.at( "envdtimer" ).as<DelayTimer>();
        t.value = t.delay;
        port_value( en, Scope::prov, "ENV.persThereIn" ) = value;
        out.push_back( std::move( next ) );
        return out;
    };
    return Rule{ label, Trigger::timer_expiry, std::move( fn ) };
}

inline Rule relabel( Rule r, std::string label )
{
    r.label = std::move( label );
    return r;
}

} // namespace detail

[[nodiscard]] inline Labeling advert_labeling()
{
    using namespace detail;
    auto triggered = []( const char* link, const char* delegate, const char* monitor, const char* port ) {
        return [=]( const Configuration& c ) {
            const auto& h = sys( c );
            return in_config( c, link, delegate ) && port_value( h.assembly.at( monitor ), Scope::prov, port ) &&
                   h.tstate.at( "reconftimer" ).as<Timer>().value.is_inf();
        };
    };
    auto armed = []( const char* link, const char* delegate ) {
        return [=]( const Configuration& c ) {
            return in_config( c, link, delegate ) && sys( c ).tstate.at( "reconftimer" ).as<Timer>().value.is_finite();
        };
    };
    return Labeling{
            { "imgChange", []( const Configuration& c ) { return port_value( c.at( "ENV" ), Scope::req, "ENV.imgChange" ); } },
            { "persThereIn",
              []( const Configuration& c ) { return port_value( c.at( "ENV" ), Scope::prov, "ENV.persThereIn" ); } },
            { "in-C1", []( const Configuration& c ) { return in_config( c, "c3", "d3" ); } },
            { "in-C2", []( const Configuration& c ) { return in_config( c, "c5", "d4" ); } },
            { "reconfTriggeredInC1", triggered( "c3", "d3", "MonitorOne", "MonitorOne.reconf" ) },
            { "reconfTriggeredInC2", triggered( "c5", "d4", "MonitorTwo", "MonitorTwo.reconf" ) },
            { "reconfArmedInC1", armed( "c3", "d3" ) },
            { "reconfArmedInC2", armed( "c5", "d4" ) },
    };
}

[[nodiscard]] inline AdvertModel build_advert_theory( const AdvertParams& p = {} )
{
    using namespace detail;
    p.validate();
    BehaviorTable beh = advert_behaviors( p );
    AdvertModel m;
    m.initial = advert_initial( p );

    Rule transmit = make_transmit_rule( beh );
    m.theory.add_rule( transmit );
    m.theory.add_rule( lift_rule( transmit, "SYS", m.initial ) );
    for ( auto& r : make_delegate_rules( beh ) )
        m.theory.add_rule( std::move( r ) );
    m.theory.add_rule( relabel(
            lift_rule( monitor_signal( "monitorOne-signal", "MonitorOne", "m1timer", "MonitorOne.reconf" ), "SYS", m.initial ),
            "monitorOne-signal" ) );
    m.theory.add_rule( relabel(
            lift_rule( monitor_signal( "monitorTwo-signal", "MonitorTwo", "m2timer", "MonitorTwo.reconf" ), "SYS", m.initial ),
            "monitorTwo-signal" ) );

    ConfigSide c1{ config1_link, config1_delegate, "MonitorOne", "m1timer", "MonitorOne.reconf" };
    ConfigSide c2{ config2_link, config2_delegate, "MonitorTwo", "m2timer", "MonitorTwo.reconf" };
    m.theory.add_rule( reconfigure( "reconf-C1-to-C2", c1, c2, beh ) );
    m.theory.add_rule( reconfigure( "reconf-C2-to-C1", c2, c1, beh ) );
    m.theory.add_rule( env_choice( "env-true", true ) );
    m.theory.add_rule( env_choice( "env-false", false ) );
    m.theory.labeling = advert_labeling();
    return m;
}

/// The case-study requirements G1-G3.
namespace formulas
{
inline constexpr const char* G1 = "[] ( <>[<=800] ~persThereIn \\/ <>[<=1000] in-C1 )";
inline constexpr const char* G2 = "[] <>[<=10000] imgChange";
inline constexpr const char* G3_C1 = "[] ( ~reconfTriggeredInC1 \\/ [][<=200] in-C1 )";
inline constexpr const char* G3_C2 = "[] ( ~reconfTriggeredInC2 \\/ [][<=200] in-C2 )";
} // namespace formulas

} // namespace rtmc::advert
