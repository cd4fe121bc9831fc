// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#include <doctest.h>
#include <json.hpp>

#include <vorafilter/cli.hpp>
#include <vorafilter/colorimetry.hpp>
#include <vorafilter/io.hpp>
#include <vorafilter/metric.hpp>

#include <atomic>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

using namespace vora;
namespace fs = std::filesystem;

namespace
{

const std::string kData = VORAFILTER_TEST_DATA;

struct Run
{
    int         code;
    std::string out;
    std::string err;
};

Run run_cli( std::vector<std::string> args )
{
    args.insert( args.begin(), "vorafilter" );
    std::vector<const char *> argv;
    for ( const auto &a : args )
        argv.push_back( a.c_str() );
    std::ostringstream out, err;
    const int          code = cli::run( static_cast<int>( argv.size() ), argv.data(), out, err );
    return { code, out.str(), err.str() };
}

fs::path scratch_dir( const std::string &name )
{
    static std::atomic<int> counter{ 0 };
    const fs::path          p = fs::temp_directory_path() /
                       ( "vorafilter_test_" + std::to_string( ::getpid() ) + "_" +
                         std::to_string( counter++ ) + "_" + name );
    fs::remove_all( p );
    fs::create_directories( p );
    return p;
}

std::vector<double> trace_values( const fs::path &path )
{
    const auto          t = io::parse_spectral_csv( io::read_text_file( path ) );
    std::vector<double> v;
    for ( int r = 0; r < t.rows(); ++r )
        v.push_back( t.columns()( r, 0 ) );
    return v;
}

} // namespace

TEST_SUITE( "cli" )
{

TEST_CASE( "colorimetric camera converges in one iteration" )
{
    const fs::path dir = scratch_dir( "cmf" );
    // The CMFs themselves, written as a camera file.
    const auto table = io::builtin_cmf_table();
    io::SpectralTable cam( table.wavelengths(), { "r", "g", "b" }, table.columns() );
    std::ofstream( dir / "cmf_as_camera.csv" ) << io::write_spectral_csv( cam );

    const Run r = run_cli( { "optimize", "--camera", ( dir / "cmf_as_camera.csv" ).string(),
                             "--optimizer", "als", "--out", ( dir / "out" ).string() } );
    REQUIRE( r.code == cli::kExitOk );
    const auto report = nlohmann::json::parse( io::read_text_file( dir / "out/report.json" ) );
    CHECK( report["solution"]["iterations"] == 1 );
    CHECK( report["solution"]["vora_value"].get<double>() == doctest::Approx( 1.0 ).epsilon( 1e-12 ) );
    CHECK( report["optimizer"] == "als" );
    CHECK( report["input_digest"].get<std::string>().size() == 64 );
}

TEST_CASE( "optimize writes files whose scores are recomputable" )
{
    const fs::path dir = scratch_dir( "recompute" );
    const Run      r   = run_cli( { "optimize", "--scenes", kData + "/scenes.manifest", "--out",
                             dir.string() } );
    REQUIRE( r.code == cli::kExitOk );
    CHECK( r.out.find( "Luther-ALS" ) != std::string::npos );
    for ( const char *f : { "filter.csv", "trace.csv", "filter_trace.csv", "report.json" } )
        CHECK( fs::exists( dir / f ) );

    const auto report = nlohmann::json::parse( io::read_text_file( dir / "report.json" ) );
    const WavelengthGrid g;
    const SensorSet      x = io::builtin_cmf( g );
    const SensorSet      q = io::load_sensor_set(
        io::read_spectral_file( kData + "/synthetic_camera.csv" ), g );
    const auto filter_table = io::read_spectral_file( dir / "filter.csv" );
    CHECK( filter_table.column_names() == std::vector<std::string>{ "transmittance" } );
    const SpectralCurve f( g, filter_table.resampled( 0, g ) );
    CHECK( std::abs( vora_value( apply_filter( f, q ), x ).value() -
                     report["solution"]["vora_value"].get<double>() ) < 1e-10 );
    CHECK( std::abs( vora_value( q, x ).value() -
                     report["solution"]["baseline_vora_value"].get<double>() ) < 1e-10 );

    const auto scenes = io::load_scenes( io::read_manifest( kData + "/scenes.manifest" ), g );
    const auto filt   = evaluate( q, f, x, scenes );
    CHECK( std::abs( filt.stats.mean - report["evaluation"]["filtered"]["mean"].get<double>() ) < 1e-10 );
    CHECK( filt.stats.mean < report["evaluation"]["baseline"]["mean"].get<double>() );

    const auto trace = io::read_spectral_file( dir / "trace.csv" );
    CHECK( trace.column_names() == std::vector<std::string>{ "vora_value", "residual" } );
    CHECK( trace.rows() == report["solution"]["iterations"].get<int>() + 1 );
}

TEST_CASE( "runs are byte-identical" )
{
    const fs::path a = scratch_dir( "det_a" ), b = scratch_dir( "det_b" );
    for ( const auto &d : { a, b } )
        REQUIRE( run_cli( { "optimize", "--camera", kData + "/synthetic_camera.csv", "--init",
                            "random", "--seed", "7", "--starts", "3", "--out", d.string() } )
                     .code == cli::kExitOk );
    for ( const char *f : { "filter.csv", "trace.csv", "filter_trace.csv" } )
        CHECK( io::read_text_file( a / f ) == io::read_text_file( b / f ) );
}

TEST_CASE( "GA and ALS reports agree" )
{
    const fs::path als = scratch_dir( "als" ), ga = scratch_dir( "ga" );
    REQUIRE( run_cli( { "optimize", "--camera", kData + "/synthetic_camera.csv", "--out", als.string() } ).code == 0 );
    REQUIRE( run_cli( { "optimize", "--camera", kData + "/synthetic_camera.csv", "--optimizer", "ga",
                        "--out", ga.string() } ).code == 0 );
    const auto ra = nlohmann::json::parse( io::read_text_file( als / "report.json" ) );
    const auto rg = nlohmann::json::parse( io::read_text_file( ga / "report.json" ) );
    CHECK( std::abs( ra["solution"]["vora_value"].get<double>() -
                     rg["solution"]["vora_value"].get<double>() ) < 1e-4 );
    CHECK( rg["config"]["step_rule"] == "backtracking" );
}

TEST_CASE( "non-convergence exits with 2" )
{
    const fs::path dir = scratch_dir( "cap" );
    const Run      r   = run_cli( { "optimize", "--camera", kData + "/synthetic_camera.csv",
                             "--max-iters", "2", "--out", dir.string() } );
    CHECK( r.code == cli::kExitNonConvergence );
    CHECK( fs::exists( dir / "filter.csv" ) );
}

TEST_CASE( "input errors exit with 1" )
{
    const fs::path dir = scratch_dir( "errors" );
    std::ofstream( dir / "ragged.csv" ) << "400,1,2,3\n410,1,2\n";
    std::ofstream( dir / "two.csv" ) << "400,1,2\n500,1,3\n600,2,1\n700,1,1\n";

    Run r = run_cli( { "optimize", "--camera", ( dir / "missing.csv" ).string(), "--out", dir.string() } );
    CHECK( r.code == cli::kExitInputError );
    CHECK( r.err.find( "error:" ) != std::string::npos );

    r = run_cli( { "optimize", "--camera", ( dir / "ragged.csv" ).string(), "--out", dir.string() } );
    CHECK( r.code == cli::kExitInputError );
    CHECK( r.err.find( "line 2" ) != std::string::npos );

    CHECK( run_cli( { "optimize", "--camera", ( dir / "two.csv" ).string(), "--grid", "400,100,4",
                      "--out", dir.string() } ).code == cli::kExitInputError );
    CHECK( run_cli( { "optimize", "--out", dir.string() } ).code == cli::kExitInputError );
    CHECK( run_cli( { "optimize", "--camera", kData + "/synthetic_camera.csv", "--cmf", "cie1964",
                      "--out", dir.string() } ).code == cli::kExitInputError );
    CHECK( run_cli( { "optimize", "--camera", kData + "/synthetic_camera.csv", "--optimizer", "newton" } )
               .code == cli::kExitInputError );
    CHECK( run_cli( { "optimize", "--camera", kData + "/synthetic_camera.csv", "--epsilon", "-1",
                      "--out", dir.string() } ).code == cli::kExitInputError );
    CHECK( run_cli( { "optimize", "--camera", kData + "/synthetic_camera.csv", "--grid", "390,10,32",
                      "--out", dir.string() } ).code == cli::kExitInputError );
    CHECK( run_cli( { "evaluate", "--camera", kData + "/synthetic_camera.csv", "--out", dir.string() } )
               .code == cli::kExitInputError );
    CHECK( run_cli( { "bogus" } ).code == cli::kExitInputError );
    CHECK( run_cli( {} ).code == cli::kExitInputError );
}

TEST_CASE( "evaluate with the observer as camera gives zero stats" )
{
    const fs::path dir = scratch_dir( "eval_zero" );
    const auto     table = io::builtin_cmf_table();
    std::ofstream( dir / "cam.csv" ) << io::write_spectral_csv(
        io::SpectralTable( table.wavelengths(), { "r", "g", "b" }, table.columns() ) );
    const Run r = run_cli( { "evaluate", "--camera", ( dir / "cam.csv" ).string(), "--scenes",
                             kData + "/scenes.manifest", "--out", dir.string() } );
    REQUIRE( r.code == cli::kExitOk );
    const auto csv = io::parse_spectral_csv( io::read_text_file( dir / "evaluation.csv" ) );
    CHECK( csv.column_names() == std::vector<std::string>{ "mean", "median", "p95", "p99", "max" } );
    CHECK( csv.wavelengths()[0] == doctest::Approx( 1.0 ) );
    CHECK( csv.columns().cwiseAbs().maxCoeff() < 1e-8 );
    CHECK( fs::exists( dir / "evaluation.txt" ) );
}

TEST_CASE( "evaluate on the n = 4 manifest matches the hand-computed scene" )
{
    const fs::path dir = scratch_dir( "eval_toy" );
    const Run      r   = run_cli( { "evaluate", "--scenes", kData + "/toy.manifest", "--out", dir.string() } );
    REQUIRE( r.code == cli::kExitOk );
    const auto csv = io::parse_spectral_csv( io::read_text_file( dir / "evaluation.csv" ) );
    CHECK( csv.wavelengths()[0] == doctest::Approx( 2045.0 / 2847.0 ).epsilon( 1e-13 ) );
    CHECK( csv.columns()( 0, 0 ) == doctest::Approx( 25.86405069988985 ).epsilon( 1e-11 ) );
    CHECK( csv.columns()( 0, 1 ) == doctest::Approx( 22.766492752570997 ).epsilon( 1e-11 ) );
    CHECK( csv.columns()( 0, 4 ) == doctest::Approx( 48.782950186136205 ).epsilon( 1e-11 ) );
}

TEST_CASE( "evaluate with a filter file" )
{
    const fs::path dir = scratch_dir( "eval_filter" );
    REQUIRE( run_cli( { "optimize", "--scenes", kData + "/scenes.manifest", "--out", dir.string() } ).code == 0 );
    const Run r = run_cli( { "evaluate", "--scenes", kData + "/scenes.manifest", "--filter",
                             ( dir / "filter.csv" ).string(), "--out", ( dir / "eval" ).string() } );
    REQUIRE( r.code == cli::kExitOk );
    const auto report = nlohmann::json::parse( io::read_text_file( dir / "report.json" ) );
    const auto csv    = io::parse_spectral_csv( io::read_text_file( dir / "eval/evaluation.csv" ) );
    CHECK( csv.columns()( 0, 0 ) ==
           doctest::Approx( report["evaluation"]["filtered"]["mean"].get<double>() ).epsilon( 1e-12 ) );
    CHECK( csv.wavelengths()[0] ==
           doctest::Approx( report["solution"]["vora_value"].get<double>() ).epsilon( 1e-12 ) );
}

TEST_CASE( "trace-compare" )
{
    const fs::path als = scratch_dir( "tc_als" ), ga = scratch_dir( "tc_ga" ), out = scratch_dir( "tc_out" );
    REQUIRE( run_cli( { "optimize", "--camera", kData + "/synthetic_camera.csv", "--out", als.string() } ).code == 0 );
    REQUIRE( run_cli( { "optimize", "--camera", kData + "/synthetic_camera.csv", "--optimizer", "ga",
                        "--max-iters", "40", "--out", ga.string() } ).code == cli::kExitNonConvergence );

    SUBCASE( "identical traces give zero differences" )
    {
        const Run r = run_cli( { "trace-compare", ( als / "trace.csv" ).string(),
                                 ( als / "trace.csv" ).string(), "--labels", "x,y", "--out", out.string() } );
        REQUIRE( r.code == cli::kExitOk );
        const auto diff = io::parse_spectral_csv( io::read_text_file( out / "diff.csv" ) );
        CHECK( diff.columns().col( 2 ).cwiseAbs().maxCoeff() == 0.0 );
        CHECK( r.out.find( "nondecreasing" ) != std::string::npos );
    }

    SUBCASE( "merged file is long format and monotone per method" )
    {
        const Run r = run_cli( { "trace-compare", ( als / "trace.csv" ).string(),
                                 ( ga / "trace.csv" ).string(), "--labels", "als,ga", "--out",
                                 out.string() } );
        REQUIRE( r.code == cli::kExitOk );
        const std::string merged = io::read_text_file( out / "merged.csv" );
        CHECK( merged.rfind( "iteration,method,vora_value,mean_delta_e\n", 0 ) == 0 );
        std::istringstream lines( merged );
        std::string        line;
        std::getline( lines, line );
        std::map<std::string, std::vector<double>> by_method;
        while ( std::getline( lines, line ) )
        {
            const auto c1 = line.find( ',' ), c2 = line.find( ',', c1 + 1 ), c3 = line.find( ',', c2 + 1 );
            by_method[line.substr( c1 + 1, c2 - c1 - 1 )].push_back(
                std::stod( line.substr( c2 + 1, c3 - c2 - 1 ) ) );
            CHECK( c3 == line.size() - 1 ); // no Delta E without scenes
        }
        REQUIRE( by_method.size() == 2 );
        CHECK( by_method["als"] == trace_values( als / "trace.csv" ) );
        for ( const auto &[name, v] : by_method )
            for ( std::size_t i = 1; i < v.size(); ++i )
                CHECK( v[i] >= v[i - 1] - 1e-12 );
    }

    SUBCASE( "mean Delta E per iteration with scenes" )
    {
        const Run r = run_cli( { "trace-compare", ( als / "trace.csv" ).string(),
                                 ( ga / "trace.csv" ).string(), "--scenes", kData + "/scenes.manifest",
                                 "--out", out.string() } );
        REQUIRE( r.code == cli::kExitOk );
        const std::string merged = io::read_text_file( out / "merged.csv" );
        const auto        last   = merged.find_last_of( ',' );
        CHECK( std::stod( merged.substr( last + 1 ) ) > 0.0 );
    }

    SUBCASE( "malformed traces exit with 1" )
    {
        std::ofstream( out / "bad.csv" ) << "iteration,vora_value,residual\n0,0.9\n";
        CHECK( run_cli( { "trace-compare", ( als / "trace.csv" ).string(), ( out / "bad.csv" ).string(),
                          "--out", out.string() } ).code == cli::kExitInputError );
        std::ofstream( out / "nocol.csv" ) << "iteration,score\n0,0.9\n1,0.95\n";
        CHECK( run_cli( { "trace-compare", ( als / "trace.csv" ).string(), ( out / "nocol.csv" ).string(),
                          "--out", out.string() } ).code == cli::kExitInputError );
        CHECK( run_cli( { "trace-compare", ( als / "trace.csv" ).string() } ).code == cli::kExitInputError );
    }
}

} // TEST_SUITE
