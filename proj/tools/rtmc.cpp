#include "cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main( int argc, char** argv )
{
    using namespace rtmc::cli;

    CLI::App app{ "Explicit-state model checker for real-time component rewrite theories" };
    app.require_subcommand( 1 );
    RunConfig cfg;

    const std::map<std::string, Engine> engines{ { "ltl", Engine::ltl }, { "oracle", Engine::oracle } };
    const std::map<std::string, Output> outputs{ { "text", Output::text }, { "json", Output::json } };
    const std::map<std::string, rtmc::SafetyOverlap> overlaps{ { "priority", rtmc::SafetyOverlap::priority },
                                                               { "paper-literal", rtmc::SafetyOverlap::literal } };

    auto add_model_opts = [&]( CLI::App* sub ) {
        sub->add_option( "--model", cfg.model, "Model name" )->capture_default_str();
        sub->add_option( "--params", cfg.params_file, "JSON file with model parameters" )->check( CLI::ExistingFile );
        sub->add_option( "--max-states", cfg.max_states, "State-space exploration limit (env RTMC_MAX_STATES)" )
            ->capture_default_str();
    };
    auto add_overlap = [&]( CLI::App* sub ) {
        sub->add_option( "--safety-overlap", cfg.overlap, "Resolution of overlapping safety rules" )
            ->transform( CLI::CheckedTransformer( overlaps, CLI::ignore_case ) );
    };

    auto* check = app.add_subcommand( "check", "Check a formula against the model" );
    add_model_opts( check );
    add_overlap( check );
    check->add_option( "--formula,-f", cfg.formula, "LTL or MTL formula" )->required();
    check->add_option( "--engine", cfg.engine, "ltl (transformation) or oracle (exhaustive MTL search)" )
        ->transform( CLI::CheckedTransformer( engines, CLI::ignore_case ) );
    check->add_option( "--output", cfg.output, "text or json" )
        ->transform( CLI::CheckedTransformer( outputs, CLI::ignore_case ) );
    check->add_option( "--dump-graph", cfg.dump_graph, "Write the explored graph as DOT" );

    auto* expl = app.add_subcommand( "explore", "Explore the state space and print statistics" );
    add_model_opts( expl );
    add_overlap( expl );
    expl->add_option( "--formula,-f", cfg.formula, "Explore the theory transformed for this formula" );
    expl->add_option( "--dump-graph", cfg.dump_graph, "Write the explored graph as DOT" );

    auto* sim = app.add_subcommand( "simulate", "Print a seeded random run" );
    add_model_opts( sim );
    sim->add_option( "--steps", cfg.steps, "Number of steps" )->capture_default_str();
    sim->add_option( "--seed", cfg.seed, "Random seed" )->capture_default_str();

    auto* trans = app.add_subcommand( "transform", "Show the transformed theory for a formula" );
    add_model_opts( trans );
    add_overlap( trans );
    trans->add_option( "--formula,-f", cfg.formula, "MTL formula" )->required();
    trans->add_flag( "--dump", "Print rule inventory, initial state and LTL formula (default)" );

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::ParseError& e )
    {
        int rc = app.exit( e );
        return rc == 0 ? 0 : exit_error;
    }

    if ( check->parsed() )
        return cmd_check( cfg, std::cout, std::cerr );
    if ( expl->parsed() )
        return cmd_explore( cfg, std::cout, std::cerr );
    if ( sim->parsed() )
        return cmd_simulate( cfg, std::cout, std::cerr );
    return cmd_transform( cfg, std::cout, std::cerr );
}
