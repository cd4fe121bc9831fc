// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#include <vorafilter/cli.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <vorafilter/als.hpp>
#include <vorafilter/ga.hpp>
#include <vorafilter/io.hpp>

namespace vora::cli
{

namespace fs = std::filesystem;
using json   = nlohmann::ordered_json;

namespace
{

class Sha256
{
public:
    Sha256() : _ctx( EVP_MD_CTX_new() ) { EVP_DigestInit_ex( _ctx, EVP_sha256(), nullptr ); }
    ~Sha256() { EVP_MD_CTX_free( _ctx ); }
    Sha256( const Sha256 & )            = delete;
    Sha256 &operator=( const Sha256 & ) = delete;

    void update( std::string_view data )
    {
        // Length prefix keeps field boundaries unambiguous.
        const std::string len = std::to_string( data.size() ) + ":";
        EVP_DigestUpdate( _ctx, len.data(), len.size() );
        EVP_DigestUpdate( _ctx, data.data(), data.size() );
    }

    std::string hex()
    {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int  size = 0;
        EVP_DigestFinal_ex( _ctx, digest, &size );
        std::string out;
        char        buf[3];
        for ( unsigned int i = 0; i < size; ++i )
        {
            std::snprintf( buf, sizeof buf, "%02x", digest[i] );
            out += buf;
        }
        return out;
    }

private:
    EVP_MD_CTX *_ctx;
};

struct Inputs
{
    WavelengthGrid                 grid;
    std::optional<SensorSet>       camera;
    SensorSet                      observer;
    std::optional<SceneSet>        scenes;
    std::string                    digest;
    json                           provenance;
};

CorrectionProtocol parse_protocol( const std::string &name )
{
    if ( name == "per-illuminant" )
        return CorrectionProtocol::PerIlluminant;
    if ( name == "global" )
        return CorrectionProtocol::Global;
    throw ShapeError( "unknown correction protocol '" + name + "'" );
}

Inputs load_inputs( const CommonOptions &options, bool need_camera, bool need_scenes )
{
    std::optional<io::DatasetManifest> manifest;
    Sha256                             sha;
    json                               provenance = json::object();

    if ( options.scenes )
    {
        const std::string text = io::read_text_file( *options.scenes );
        manifest = io::parse_manifest( text, options.scenes->parent_path() );
        sha.update( text );
        provenance["scenes"] = options.scenes->string();
    }
    else if ( need_scenes )
        throw ShapeError( "--scenes <manifest> is required" );

    WavelengthGrid grid;
    if ( options.grid )
        grid = io::parse_grid( *options.grid );
    else if ( manifest && manifest->get( "grid" ) )
        grid = io::parse_grid( *manifest->get( "grid" ) );

    std::optional<fs::path> camera_path = options.camera;
    if ( !camera_path && manifest )
        camera_path = manifest->path( "camera" );

    std::optional<SensorSet> camera;
    if ( camera_path )
    {
        const std::string text = io::read_text_file( *camera_path );
        sha.update( text );
        camera = io::load_sensor_set(
            io::parse_spectral_csv( text ), grid, camera_path->filename().string() );
        provenance["camera"] = camera_path->string();
    }
    else if ( need_camera )
        throw ShapeError( "--camera <file> is required" );

    std::string cmf = "cie1931";
    fs::path    cmf_base;
    if ( options.cmf )
        cmf = *options.cmf;
    else if ( manifest && manifest->get( "cmf" ) )
    {
        cmf      = *manifest->get( "cmf" );
        cmf_base = manifest->base_dir;
    }
    sha.update( cmf );
    if ( cmf.starts_with( "file:" ) )
    {
        fs::path p( cmf.substr( 5 ) );
        sha.update( io::read_text_file( p.is_relative() ? cmf_base / p : p ) );
    }
    provenance["cmf"] = cmf;
    SensorSet observer = io::load_observer( cmf, grid, cmf_base );

    std::optional<SceneSet> scenes;
    if ( manifest && need_scenes )
    {
        for ( const char *key : { "illuminants", "reflectances" } )
            if ( const auto p = manifest->path( key ) )
            {
                sha.update( io::read_text_file( *p ) );
                provenance[key] = p->string();
            }
        scenes = io::load_scenes( *manifest, grid );
    }

    provenance["grid"] = grid.describe();
    return { grid, std::move( camera ), std::move( observer ), std::move( scenes ), sha.hex(),
             std::move( provenance ) };
}

void write_file( const fs::path &path, const std::string &contents )
{
    std::ofstream f( path, std::ios::binary );
    if ( !f )
        throw Error( "cannot write " + path.string() );
    f << contents;
}

std::string filter_csv( const SpectralCurve &filter )
{
    Matrix col = filter.values();
    return io::write_spectral_csv(
        io::SpectralTable( filter.grid().wavelengths(), { "transmittance" }, std::move( col ) ) );
}

std::string trace_csv( const ConvergenceTrace &trace )
{
    std::string out = "iteration,vora_value,residual\n";
    for ( const auto &r : trace )
        out += std::to_string( r.iteration ) + "," + io::format_number( r.vora_value ) + "," +
               io::format_number( r.residual ) + "\n";
    return out;
}

std::string filter_trace_csv( const FilterSolution &s )
{
    std::vector<double>      iterations;
    std::vector<std::string> names;
    for ( double w : s.filter.grid().wavelengths() )
        names.push_back( io::format_number( w ) );
    Matrix rows( static_cast<Eigen::Index>( s.filter_history.size() ), s.filter.size() );
    for ( std::size_t i = 0; i < s.filter_history.size(); ++i )
    {
        iterations.push_back( s.trace[i].iteration );
        rows.row( static_cast<Eigen::Index>( i ) ) = s.filter_history[i].transpose();
    }
    return io::write_spectral_csv( io::SpectralTable( iterations, names, std::move( rows ) ) );
}

json stats_json( const EvaluationReport &r )
{
    return json{ { "vora_value", r.vora.value() },
                 { "mean", r.stats.mean },
                 { "median", r.stats.median },
                 { "p95", r.stats.p95 },
                 { "p99", r.stats.p99 },
                 { "max", r.stats.max },
                 { "samples", r.samples },
                 { "negative_xyz_components", r.negative_xyz_components } };
}

std::string table_header()
{
    char buf[160];
    std::snprintf(
        buf, sizeof buf, "%-12s %10s  %8s %8s %8s %8s %8s\n", "Method", "Vora-Value", "mean",
        "median", "95%", "99%", "max" );
    return buf;
}

std::string table_row( const std::string &method, const EvaluationReport &r )
{
    char buf[160];
    std::snprintf(
        buf, sizeof buf, "%-12s %10.4f  %8.3f %8.3f %8.3f %8.3f %8.3f\n", method.c_str(),
        r.vora.value(), r.stats.mean, r.stats.median, r.stats.p95, r.stats.p99, r.stats.max );
    return buf;
}

json matrix_json( const Matrix3 &m )
{
    json rows = json::array();
    for ( int r = 0; r < 3; ++r )
        rows.push_back( { m( r, 0 ), m( r, 1 ), m( r, 2 ) } );
    return rows;
}

template <typename Fn> int guarded( std::ostream &err, Fn &&fn )
{
    try
    {
        return fn();
    }
    catch ( const std::exception &e )
    {
        err << "error: " << e.what() << "\n";
        return kExitInputError;
    }
}

struct LoadedTrace
{
    std::string         label;
    std::vector<int>    iterations;
    std::vector<double> vora;
    std::optional<io::SpectralTable> filters;
};

LoadedTrace load_trace( const fs::path &path, std::string label, bool with_filters )
{
    const auto table = io::read_spectral_file( path );
    const auto &names = table.column_names();
    const auto it     = std::find( names.begin(), names.end(), "vora_value" );
    if ( it == names.end() )
        throw ParseError( path.string() + ": missing vora_value column", 0 );
    const int col = static_cast<int>( it - names.begin() );

    LoadedTrace t{ std::move( label ), {}, {}, std::nullopt };
    for ( int r = 0; r < table.rows(); ++r )
    {
        const double iter = table.wavelengths()[static_cast<std::size_t>( r )];
        if ( iter != std::floor( iter ) || iter < 0 )
            throw ParseError( path.string() + ": iteration must be a non-negative integer", r + 2 );
        t.iterations.push_back( static_cast<int>( iter ) );
        t.vora.push_back( table.columns()( r, col ) );
    }
    if ( with_filters )
    {
        auto filters = io::read_spectral_file( path.parent_path() / "filter_trace.csv" );
        if ( filters.rows() != table.rows() )
            throw ParseError( path.string() + ": filter_trace.csv row count differs", 0 );
        t.filters = std::move( filters );
    }
    return t;
}

} // namespace

int cmd_optimize( const OptimizeOptions &options, std::ostream &out, std::ostream &err )
{
    return guarded( err, [&] {
        const auto started = std::chrono::steady_clock::now();
        const bool evaluate_scenes = options.scenes.has_value();
        Inputs     in              = load_inputs( options, true, evaluate_scenes );
        const auto protocol        = parse_protocol( options.correction );

        InitialFilter init = OnesInit{};
        if ( options.init == "random" )
            init = RandomInit{ options.seed };
        else if ( options.init != "ones" )
            throw ShapeError( "--init must be ones or random" );
        if ( options.starts < 1 )
            throw ShapeError( "--starts must be at least 1" );

        json           config;
        FilterSolution solution = [&] {
            if ( options.optimizer == "als" )
            {
                AlsConfig c{ options.epsilon, options.max_iters, init };
                config = { { "epsilon", c.epsilon },
                           { "max_iterations", c.max_iterations },
                           { "init", options.init },
                           { "seed", options.seed },
                           { "starts", options.starts } };
                return options.starts > 1
                           ? optimize_als_multistart( *in.camera, in.observer, c, options.starts,
                                                      options.seed )
                           : optimize_als( *in.camera, in.observer, c );
            }
            if ( options.optimizer == "ga" )
            {
                if ( options.starts > 1 )
                    throw ShapeError( "--starts is only supported with --optimizer als" );
                GaConfig c;
                c.epsilon        = options.epsilon;
                c.max_iterations = options.max_iters;
                c.initial_filter = init;
                if ( options.step_rule == "fixed" )
                    c.step_rule = FixedStep{ options.step };
                else if ( options.step_rule == "backtracking" )
                    c.step_rule = Backtracking{ options.step, 0.5, 1e-4 };
                else
                    throw ShapeError( "--step-rule must be backtracking or fixed" );
                config = { { "epsilon", c.epsilon },
                           { "max_iterations", c.max_iterations },
                           { "init", options.init },
                           { "seed", options.seed },
                           { "step_rule", options.step_rule },
                           { "step", options.step } };
                return optimize_ga( *in.camera, in.observer, c );
            }
            throw ShapeError( "--optimizer must be als or ga" );
        }();

        fs::create_directories( options.out );
        write_file( options.out / "filter.csv", filter_csv( solution.filter ) );
        write_file( options.out / "trace.csv", trace_csv( solution.trace ) );
        write_file( options.out / "filter_trace.csv", filter_trace_csv( solution ) );

        const double baseline = vora_value( *in.camera, in.observer ).value();
        json report;
        report["input_digest"] = in.digest;
        report["inputs"]       = in.provenance;
        report["optimizer"]    = options.optimizer;
        report["config"]       = config;
        report["solution"]     = { { "vora_value", solution.score.value() },
                                   { "baseline_vora_value", baseline },
                                   { "iterations", solution.iterations },
                                   { "converged", solution.converged },
                                   { "correction", matrix_json( solution.correction.m ) },
                                   { "filter_file", "filter.csv" },
                                   { "trace_file", "trace.csv" } };

        std::string table;
        if ( in.scenes )
        {
            const auto base = evaluate( *in.camera, std::nullopt, in.observer, *in.scenes, protocol );
            const auto filt =
                evaluate( *in.camera, solution.filter, in.observer, *in.scenes, protocol );
            report["evaluation"] = { { "correction", options.correction },
                                     { "baseline", stats_json( base ) },
                                     { "filtered", stats_json( filt ) } };
            table = table_header() + table_row( "Baseline", base ) +
                    table_row( options.optimizer == "als" ? "Luther-ALS" : "Vora-GA", filt );
        }
        report["timing_ms"] = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - started )
                                  .count();
        write_file( options.out / "report.json", report.dump( 2 ) + "\n" );

        char line[200];
        std::snprintf(
            line, sizeof line, "%s: vora_value %.6f (baseline %.6f) after %d iterations%s\n",
            options.optimizer.c_str(), solution.score.value(), baseline, solution.iterations,
            solution.converged ? "" : " (not converged)" );
        out << line << table;
        return solution.converged ? kExitOk : kExitNonConvergence;
    } );
}

int cmd_evaluate( const EvaluateOptions &options, std::ostream &out, std::ostream &err )
{
    return guarded( err, [&] {
        Inputs     in       = load_inputs( options, true, true );
        const auto protocol = parse_protocol( options.correction );

        std::optional<SpectralCurve> filter;
        if ( options.filter )
        {
            const auto table = io::read_spectral_file( *options.filter );
            if ( table.data_columns() != 1 )
                throw ShapeError( "filter file needs exactly one data column" );
            filter = SpectralCurve( in.grid, table.resampled( 0, in.grid ) );
        }

        const auto report = evaluate( *in.camera, filter, in.observer, *in.scenes, protocol );

        fs::create_directories( options.out );
        const auto &s = report.stats;
        write_file(
            options.out / "evaluation.csv",
            "vora_value,mean,median,p95,p99,max\n" + io::format_number( report.vora.value() ) +
                "," + io::format_number( s.mean ) + "," + io::format_number( s.median ) + "," +
                io::format_number( s.p95 ) + "," + io::format_number( s.p99 ) + "," +
                io::format_number( s.max ) + "\n" );

        const std::string table =
            table_header() + table_row( filter ? "Filtered" : "Baseline", report );
        write_file( options.out / "evaluation.txt", table );
        out << table;
        if ( report.negative_xyz_components > 0 )
            out << report.negative_xyz_components
                << " corrected XYZ components were negative (kept signed)\n";
        return kExitOk;
    } );
}

int cmd_trace_compare( const TraceCompareOptions &options, std::ostream &out, std::ostream &err )
{
    return guarded( err, [&] {
        if ( options.traces.size() != 2 )
            throw ShapeError( "trace-compare needs exactly two trace files" );

        const bool with_de = options.scenes.has_value();
        std::optional<Inputs> in;
        if ( with_de )
            in = load_inputs( options, true, true );
        const auto protocol =
            with_de ? parse_protocol( options.correction ) : CorrectionProtocol::PerIlluminant;

        std::vector<LoadedTrace> traces;
        for ( std::size_t i = 0; i < 2; ++i )
        {
            std::string label = i < options.labels.size()
                                    ? options.labels[i]
                                    : options.traces[i].parent_path().filename().string();
            if ( label.empty() )
                label = i == 0 ? "a" : "b";
            traces.push_back( load_trace( options.traces[i], label, with_de ) );
        }

        std::string merged = "iteration,method,vora_value,mean_delta_e\n";
        for ( const auto &t : traces )
        {
            for ( std::size_t r = 0; r < t.iterations.size(); ++r )
            {
                std::string de;
                if ( with_de )
                {
                    const Matrix &rows = t.filters->columns();
                    if ( rows.cols() != in->grid.count() )
                        throw ShapeError( "filter trace does not match the wavelength grid" );
                    const SpectralCurve f(
                        in->grid, rows.row( static_cast<Eigen::Index>( r ) ).transpose() );
                    de = io::format_number(
                        evaluate( *in->camera, f, in->observer, *in->scenes, protocol ).stats.mean );
                }
                merged += std::to_string( t.iterations[r] ) + "," + t.label + "," +
                          io::format_number( t.vora[r] ) + "," + de + "\n";
            }
        }

        // Shorter trace is held at its final value.
        const std::size_t rows =
            std::max( traces[0].vora.size(), traces[1].vora.size() );
        std::string diff = "iteration,vora_" + traces[0].label + ",vora_" + traces[1].label +
                           ",difference\n";
        for ( std::size_t r = 0; r < rows; ++r )
        {
            const double a = traces[0].vora[std::min( r, traces[0].vora.size() - 1 )];
            const double b = traces[1].vora[std::min( r, traces[1].vora.size() - 1 )];
            diff += std::to_string( r ) + "," + io::format_number( a ) + "," +
                    io::format_number( b ) + "," + io::format_number( a - b ) + "\n";
        }

        fs::create_directories( options.out );
        write_file( options.out / "merged.csv", merged );
        write_file( options.out / "diff.csv", diff );

        const double common = std::max( traces[0].vora.back(), traces[1].vora.back() );
        for ( const auto &t : traces )
        {
            bool monotone = true;
            for ( std::size_t r = 1; r < t.vora.size(); ++r )
                monotone = monotone && t.vora[r] >= t.vora[r - 1] - 1e-12;
            int reached = -1;
            for ( std::size_t r = 0; r < t.vora.size() && reached < 0; ++r )
                if ( t.vora[r] >= common - options.tolerance )
                    reached = t.iterations[r];
            char line[200];
            std::snprintf(
                line, sizeof line, "%s: final %.6f, %s, within %.0e of %.6f at iteration %s\n",
                t.label.c_str(), t.vora.back(), monotone ? "nondecreasing" : "NOT monotone",
                options.tolerance, common,
                reached < 0 ? "never" : std::to_string( reached ).c_str() );
            out << line;
        }
        return kExitOk;
    } );
}

int run( int argc, const char *const *argv, std::ostream &out, std::ostream &err )
{
    CLI::App app{ "Colorimetric filter design: Vora-Value optimisation and evaluation" };
    app.require_subcommand( 1 );

    auto add_common = []( CLI::App *cmd, CommonOptions &o ) {
        cmd->add_option( "--camera", o.camera, "Camera sensitivity CSV (wavelength,r,g,b)" );
        cmd->add_option( "--cmf", o.cmf, "Observer: cie1931 or file:<path>" );
        cmd->add_option( "--scenes", o.scenes, "Dataset manifest (key = value)" );
        cmd->add_option( "--correction", o.correction, "per-illuminant or global" )
            ->check( CLI::IsMember( { "per-illuminant", "global" } ) );
        cmd->add_option( "--grid", o.grid, "Wavelength grid start,step,count" );
        cmd->add_option( "--out", o.out, "Output directory" );
    };

    OptimizeOptions opt;
    auto           *optimize = app.add_subcommand( "optimize", "Optimise a filter" );
    add_common( optimize, opt );
    optimize->add_option( "--optimizer", opt.optimizer, "als or ga" )
        ->check( CLI::IsMember( { "als", "ga" } ) );
    optimize->add_option( "--epsilon", opt.epsilon, "Stop when the Vora-Value gain is below this" );
    optimize->add_option( "--max-iters", opt.max_iters, "Iteration cap" );
    optimize->add_option( "--init", opt.init, "Initial filter: ones or random" )
        ->check( CLI::IsMember( { "ones", "random" } ) );
    optimize->add_option( "--seed", opt.seed, "Seed for random starts" );
    optimize->add_option( "--starts", opt.starts, "ALS multistart count" );
    optimize->add_option( "--step-rule", opt.step_rule, "GA step rule: backtracking or fixed" )
        ->check( CLI::IsMember( { "backtracking", "fixed" } ) );
    optimize->add_option( "--step", opt.step, "GA (initial) step size" );

    EvaluateOptions eval;
    auto           *evaluate_cmd = app.add_subcommand( "evaluate", "Delta E evaluation" );
    add_common( evaluate_cmd, eval );
    evaluate_cmd->add_option( "--filter", eval.filter, "Filter CSV (wavelength,transmittance)" );

    TraceCompareOptions cmp;
    auto *compare = app.add_subcommand( "trace-compare", "Merge two convergence traces" );
    add_common( compare, cmp );
    compare->add_option( "traces", cmp.traces, "Two trace.csv files" )->required()->expected( 2 );
    compare->add_option( "--labels", cmp.labels, "Method labels" )->delimiter( ',' );
    compare->add_option( "--tolerance", cmp.tolerance, "Closeness to the common final value" );

    try
    {
        app.parse( argc, argv );
    }
    catch ( const CLI::ParseError &e )
    {
        const int code = app.exit( e, out, err );
        return code == 0 ? kExitOk : kExitInputError;
    }

    if ( optimize->parsed() )
        return cmd_optimize( opt, out, err );
    if ( evaluate_cmd->parsed() )
        return cmd_evaluate( eval, out, err );
    return cmd_trace_compare( cmp, out, err );
}

} // namespace vora::cli
