#pragma once

// Command implementations behind the `rtmc` executable. Each takes a parsed
// RunConfig and output streams and returns the process exit code:
// 0 holds, 1 counterexample, 2 error or unsupported input.

#include "rtmc/advert.hpp"
#include "rtmc/mtl_oracle.hpp"
#include "rtmc/transform.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>

namespace rtmc::cli
{

enum class Engine
{
    ltl,
    oracle
};

enum class Output
{
    text,
    json
};

struct RunConfig
{
    std::string model = "advert";
    std::string params_file;
    std::string formula;
    Engine engine = Engine::ltl;
    std::size_t max_states = max_states_from_env();
    Output output = Output::text;
    std::string dump_graph;
    SafetyOverlap overlap = SafetyOverlap::priority;
    std::size_t steps = 20;
    std::uint64_t seed = 1;
};

inline constexpr int exit_holds = 0;
inline constexpr int exit_counterexample = 1;
inline constexpr int exit_error = 2;

[[nodiscard]] inline advert::AdvertParams params_from_json( const nlohmann::json& j )
{
    if ( !j.is_object() )
        throw Error( "parameter document must be a JSON object" );
    advert::AdvertParams p;
    for ( const auto& [key, value] : j.items() )
    {
        if ( !value.is_number_unsigned() )
            throw Error( "parameter '" + key + "' must be a non-negative integer" );
        auto v = value.get<TimeValue>();
        if ( key == "reconf_duration" )
            p.reconf_duration = v;
        else if ( key == "monitor1_timeout" )
            p.monitor1_timeout = v;
        else if ( key == "monitor2_timeout" )
            p.monitor2_timeout = v;
        else if ( key == "env_period" )
            p.env_period = v;
        else
            throw Error( "unknown parameter '" + key + "'" );
    }
    p.validate();
    return p;
}

[[nodiscard]] inline advert::AdvertParams load_params( const std::string& path )
{
    std::ifstream in{ path };
    if ( !in )
        throw Error( "cannot open parameter file '" + path + "'" );
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch ( const nlohmann::json::exception& e )
    {
        throw Error( "invalid parameter file '" + path + "': " + e.what() );
    }
    return params_from_json( j );
}

[[nodiscard]] inline advert::AdvertModel build_model( const RunConfig& cfg )
{
    if ( cfg.model != "advert" )
        throw Error( "unknown model '" + cfg.model + "' (available: advert)" );
    return advert::build_advert_theory( cfg.params_file.empty() ? advert::AdvertParams{} : load_params( cfg.params_file ) );
}

[[nodiscard]] inline nlohmann::json to_json( const Verdict& v )
{
    if ( v.holds() )
        return { { "result", "holds" } };
    auto steps = []( const std::vector<LassoStep>& s ) {
        auto arr = nlohmann::json::array();
        for ( const auto& x : s )
            arr.push_back( { { "state", x.state }, { "duration", x.duration } } );
        return arr;
    };
    return { { "result", "counterexample" },
             { "prefix", steps( v.counterexample->prefix ) },
             { "loop", steps( v.counterexample->loop ) } };
}

namespace detail
{

inline std::string labels_str( const TimedKripke& k, StateIndex s )
{
    std::string out;
    for ( const auto& p : k.label_set( s ) )
        out += ( out.empty() ? "" : "," ) + p;
    return "{" + out + "}";
}

inline void print_lasso( std::ostream& os, const TimedKripke& k, const Lasso& l )
{
    auto row = [&]( const LassoStep& st ) {
        os << "  s" << st.state << " " << labels_str( k, st.state ) << " --" << st.duration << "ms-->\n";
    };
    os << "prefix (" << l.prefix.size() << " steps):\n";
    for ( const auto& st : l.prefix )
        row( st );
    os << "loop (" << l.loop.size() << " steps):\n";
    for ( const auto& st : l.loop )
        row( st );
}

inline void write_graph( const TimedKripke& k, const std::string& path )
{
    std::ofstream out{ path };
    if ( !out )
        throw Error( "cannot write '" + path + "'" );
    write_dot( out, k );
}

template <class Fn>
int guarded( std::ostream& err, Fn&& fn )
{
    try
    {
        return fn();
    }
    catch ( const std::exception& e )
    {
        err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

} // namespace detail

/// Checks a formula against the model, transforming first when it is bounded.
inline int cmd_check( const RunConfig& cfg, std::ostream& out, std::ostream& err )
{
    return detail::guarded( err, [&] {
        if ( cfg.formula.empty() )
            throw Error( "check needs a formula" );
        auto start = std::chrono::steady_clock::now();
        auto model = build_model( cfg );
        Formula f = parse_formula( cfg.formula );
        MtlClass cls = classify_mtl( f );
        if ( auto* u = std::get_if<UnsupportedClass>( &cls ) )
            throw FormulaError( "unsupported formula: " + u->reason );

        TimedKripke k;
        Verdict v;
        std::string how;
        if ( cfg.engine == Engine::oracle )
        {
            k = explore( model.theory, model.initial, cfg.max_states );
            v = check_mtl_exhaustive( k, f );
            how = "exhaustive MTL oracle";
        }
        else if ( std::holds_alternative<PureLtlClass>( cls ) )
        {
            k = explore( model.theory, model.initial, cfg.max_states );
            v = model_check_ltl( k, f );
            how = "LTL";
        }
        else
        {
            auto tr = transform_for( model.theory, model.initial, f, cfg.overlap );
            k = explore( tr->theory, tr->initial, cfg.max_states );
            v = model_check_ltl( k, tr->ltl );
            how = "LTL on transformed theory: " + to_string( tr->ltl );
        }
        double secs = std::chrono::duration<double>( std::chrono::steady_clock::now() - start ).count();
        if ( !cfg.dump_graph.empty() )
            detail::write_graph( k, cfg.dump_graph );

        if ( cfg.output == Output::json )
        {
            out << to_json( v ).dump() << "\n";
            err << "states: " << k.size() << ", time: " << secs << " s\n";
        }
        else
        {
            out << "formula: " << to_string( f ) << "\n";
            out << "method: " << how << "\n";
            out << "states: " << k.size() << ", transitions: " << k.transitions.size() << "\n";
            out << "result: " << ( v.holds() ? "holds" : "counterexample" ) << "\n";
            if ( !v.holds() )
                detail::print_lasso( out, k, *v.counterexample );
            out << "time: " << secs << " s\n";
        }
        return v.holds() ? exit_holds : exit_counterexample;
    } );
}

/// Explores the model (transformed first when a bounded formula is given)
/// and prints graph statistics.
inline int cmd_explore( const RunConfig& cfg, std::ostream& out, std::ostream& err )
{
    return detail::guarded( err, [&] {
        auto model = build_model( cfg );
        Theory th = model.theory;
        Configuration init = model.initial;
        bool transformed = false;
        if ( !cfg.formula.empty() )
            if ( auto tr = transform_for( th, init, parse_formula( cfg.formula ), cfg.overlap ) )
            {
                th = std::move( tr->theory );
                init = std::move( tr->initial );
                transformed = true;
            }
        TimedKripke k = explore( th, init, cfg.max_states );
        std::size_t terminal = 0;
        for ( const auto& t : k.transitions )
            terminal += t.label == eps_label;
        out << "states: " << k.size() << "\n";
        out << "transitions: " << k.transitions.size() << "\n";
        out << "terminal states: " << terminal << "\n";
        if ( transformed )
        {
            TimeValue max_clock = 0;
            for ( const auto& s : k.states )
                max_clock = std::max( max_clock, s.at( kClockId ).as<Clock>().clock );
            out << "max clock: " << max_clock << "\n";
        }
        if ( !cfg.dump_graph.empty() )
        {
            detail::write_graph( k, cfg.dump_graph );
            out << "graph written to " << cfg.dump_graph << "\n";
        }
        return exit_holds;
    } );
}

/// Seeded random walk.
inline int cmd_simulate( const RunConfig& cfg, std::ostream& out, std::ostream& err )
{
    return detail::guarded( err, [&] {
        auto model = build_model( cfg );
        Trace tr = simulate( model.theory, model.initial, cfg.steps, cfg.seed );
        auto props = [&]( const Configuration& c ) {
            std::string s;
            for ( const auto& d : model.theory.labeling.defs() )
                if ( d.pred( c ) )
                    s += ( s.empty() ? "" : "," ) + d.name;
            return "{" + s + "}";
        };
        TimeValue now = 0;
        out << "t=0 init " << props( tr.initial ) << "\n";
        for ( const auto& st : tr.steps )
        {
            now += st.duration;
            out << "t=" << now << " " << st.label << " +" << st.duration << " " << props( st.config ) << "\n";
        }
        out << "elapsed: " << tr.elapsed() << "\n";
        return exit_holds;
    } );
}

/// Prints the wrapped rule inventory, new initial state and LTL formula.
inline int cmd_transform( const RunConfig& cfg, std::ostream& out, std::ostream& err )
{
    return detail::guarded( err, [&] {
        if ( cfg.formula.empty() )
            throw Error( "transform needs a formula" );
        auto model = build_model( cfg );
        auto tr = transform_for( model.theory, model.initial, parse_formula( cfg.formula ), cfg.overlap );
        if ( !tr )
        {
            out << "no transformation needed\n";
            return exit_holds;
        }
        out << "rules (" << tr->theory.rules.size() << "):\n";
        for ( const auto& r : tr->theory.rules )
            out << "  " << r.label << "\n";
        out << "initial:\n" << to_string( tr->initial, 2 ) << "\n";
        out << "ltl: " << to_string( tr->ltl ) << "\n";
        return exit_holds;
    } );
}

} // namespace rtmc::cli
