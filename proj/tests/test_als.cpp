// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#include <doctest.h>

#include <vorafilter/als.hpp>
#include <vorafilter/io.hpp>
#include <vorafilter/metric.hpp>

#include "oracles.hpp"

using namespace vora;
using namespace vora::test;

TEST_SUITE( "als" )
{

TEST_CASE( "config validation" )
{
    AlsConfig c;
    CHECK( c.epsilon == 1e-9 );
    CHECK( c.max_iterations == 10000 );
    CHECK( std::holds_alternative<OnesInit>( c.initial_filter ) );
    CHECK_NOTHROW( c.validate() );
    c.epsilon = 0;
    CHECK_THROWS_AS( c.validate(), ShapeError );
    c.epsilon        = 1e-9;
    c.max_iterations = 0;
    CHECK_THROWS_AS( c.validate(), ShapeError );
}

TEST_CASE( "initial filters" )
{
    const WavelengthGrid g;
    CHECK( make_initial_filter( OnesInit{}, g ).values() == Vector::Ones( 31 ) );
    const SpectralCurve a = make_initial_filter( RandomInit{ 4 }, g );
    const SpectralCurve b = make_initial_filter( RandomInit{ 4 }, g );
    CHECK( a.values() == b.values() );
    CHECK( a.values().minCoeff() > 0.0 );
    CHECK( a.values().maxCoeff() <= 1.0 );
    CHECK_FALSE( make_initial_filter( RandomInit{ 5 }, g ).values() == a.values() );
    CHECK_THROWS_AS(
        make_initial_filter( SpectralCurve::constant( WavelengthGrid( 400, 5, 61 ), 1.0 ), g ),
        GridMismatch );
}

TEST_CASE( "solve_m recovers the identity and known inverses" )
{
    Rng                  rng( 31 );
    const WavelengthGrid g;
    const OrthoBasis     v    = orthonormalize( SensorSet( g, random_camera( rng, g ) ) );
    const SpectralCurve  ones = SpectralCurve::constant( g, 1.0 );

    CHECK( ( solve_m( ones, SensorSet( g, v.basis ), v ).m - Matrix3::Identity() )
               .cwiseAbs()
               .maxCoeff() < 1e-12 );

    const Matrix3 a = random_transform( rng );
    const Matrix3 m = solve_m( ones, SensorSet( g, v.basis * a ), v ).m;
    CHECK( ( m - cofactor_inverse( a ) ).cwiseAbs().maxCoeff() < 1e-10 );
}

TEST_CASE( "solve_m is a least-squares minimiser" )
{
    Rng                  rng( 32 );
    const WavelengthGrid g;
    const OrthoBasis     v = orthonormalize( io::builtin_cmf() );
    for ( int k = 0; k < 20; ++k )
    {
        const SensorSet     q( g, random_camera( rng, g ) );
        const SpectralCurve f( g, random_filter( rng, 31 ) );
        const auto          m  = solve_m( f, q, v );
        const SensorMat     fq = f.values().asDiagonal() * q.channels();
        CHECK( ( fq.transpose() * ( fq * m.m - v.basis ) ).cwiseAbs().maxCoeff() < 1e-9 );

        const double best = luther_residual( f, q, m, v );
        for ( int p = 0; p < 20; ++p )
        {
            CorrectionMatrix other = m;
            for ( int e = 0; e < 9; ++e )
                other.m( e / 3, e % 3 ) += uniform( rng, -1e-3, 1e-3 );
            CHECK( luther_residual( f, q, other, v ) > best );
        }
    }
}

TEST_CASE( "solve_m rejects a filter that zeroes a channel" )
{
    const SensorSet x = io::builtin_cmf();
    Vector          f = Vector::Zero( 31 );
    f.head( 2 ).setOnes();
    CHECK_THROWS_AS( solve_m( SpectralCurve( x.grid(), f ), x, orthonormalize( x ) ), RankDeficient );
}

TEST_CASE( "solve_f closed form" )
{
    Rng                  rng( 33 );
    const WavelengthGrid g;
    const OrthoBasis     v = orthonormalize( SensorSet( g, random_camera( rng, g ) ) );

    const SpectralCurve one = solve_f( SensorSet( g, v.basis ), {}, v );
    CHECK( ( one.values().array() - 1.0 ).abs().maxCoeff() < 1e-14 );
    const SpectralCurve half = solve_f( SensorSet( g, 2.0 * v.basis ), {}, v );
    CHECK( ( half.values().array() - 0.5 ).abs().maxCoeff() < 1e-14 );
}

TEST_CASE( "solve_f matches a scalar grid search" )
{
    Rng                  rng( 34 );
    const WavelengthGrid g;
    const SensorSet      x = io::builtin_cmf();
    const OrthoBasis     v = orthonormalize( x );
    const SensorSet      q( g, random_camera( rng, g ) );
    CorrectionMatrix     m{ 0.3 * random_transform( rng ) };
    const SpectralCurve  f  = solve_f( q, m, v );
    const SensorMat      qm = q.channels() * m.m;
    for ( int i = 0; i < 31; ++i )
    {
        double best = 0.0, best_err = INFINITY;
        for ( int s = -100000; s <= 100000; ++s )
        {
            const double t   = s * 1e-4;
            double       err = 0.0;
            for ( int c = 0; c < 3; ++c )
                err += ( t * qm( i, c ) - v.basis( i, c ) ) * ( t * qm( i, c ) - v.basis( i, c ) );
            if ( err < best_err )
            {
                best_err = err;
                best     = t;
            }
        }
        if ( std::abs( f[i] ) < 10.0 )
            CHECK( std::abs( f[i] - best ) < 1e-3 );
    }
}

TEST_CASE( "solve_f zeroes degenerate rows" )
{
    const WavelengthGrid g( 400, 100, 4 );
    SensorMat            q( 4, 3 );
    q << 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0;
    SensorMat x = q;
    x.row( 3 ) << 1, 1, 1;
    const SpectralCurve f =
        solve_f( SensorSet( g, q ), {}, orthonormalize( SensorSet( g, x ) ) );
    CHECK( f[3] == 0.0 );
}

TEST_CASE( "colorimetric camera converges in one iteration" )
{
    const SensorSet      x = io::builtin_cmf();
    const FilterSolution s = optimize_als( x, x, {} );
    CHECK( s.converged );
    CHECK( s.iterations == 1 );
    CHECK( s.score.value() == doctest::Approx( 1.0 ).epsilon( 1e-12 ) );
    CHECK( ( s.filter.values().array() - 1.0 ).abs().maxCoeff() < 1e-12 );
}

TEST_CASE( "solution invariants on random cameras" )
{
    Rng             rng( 35 );
    const SensorSet x = io::builtin_cmf();
    for ( int k = 0; k < 15; ++k )
    {
        const SensorSet      q( x.grid(), random_camera( rng, x.grid() ) );
        const FilterSolution s = optimize_als( q, x, {} );
        CHECK( s.converged );
        CHECK( s.trace.size() == static_cast<std::size_t>( s.iterations ) + 1 );
        CHECK( s.filter_history.size() == s.trace.size() );
        CHECK( s.filter.values().cwiseAbs().maxCoeff() == 1.0 );
        CHECK( std::abs( s.score.value() - vora_value( apply_filter( s.filter, q ), x ) ) < 1e-12 );
        CHECK( s.score.value() >= s.trace.front().vora_value - 1e-12 );
        for ( std::size_t i = 1; i < s.trace.size(); ++i )
        {
            CHECK( s.trace[i].vora_value >= s.trace[i - 1].vora_value - 1e-12 );
            CHECK( s.trace[i].iteration == static_cast<int>( i ) );
        }
        // M comes from the last solve_m, one filter update behind the
        // reported filter, so it is near but not at the least-squares M.
        const OrthoBasis v    = orthonormalize( x );
        const double     best = luther_residual( s.filter, q, solve_m( s.filter, q, v ), v );
        const double     got  = luther_residual( s.filter, q, s.correction, v );
        CHECK( got >= best - 1e-15 );
        CHECK( got - best < 1e-6 * best );
    }
}

TEST_CASE( "trace depends on the target only through its column space" )
{
    Rng             rng( 36 );
    const SensorSet x = io::builtin_cmf();
    const SensorSet q( x.grid(), random_camera( rng, x.grid() ) );
    AlsConfig       c;
    c.max_iterations = 50;
    const auto a     = optimize_als( q, x, c );
    const auto b     = optimize_als( q, x.transformed( random_transform( rng ) ), c );
    REQUIRE( a.trace.size() == b.trace.size() );
    for ( std::size_t i = 0; i < a.trace.size(); ++i )
        CHECK( std::abs( a.trace[i].vora_value - b.trace[i].vora_value ) < 1e-10 );
}

TEST_CASE( "max_iterations cap reports non-convergence" )
{
    Rng             rng( 37 );
    const SensorSet x = io::builtin_cmf();
    const SensorSet q( x.grid(), random_camera( rng, x.grid() ) );
    AlsConfig       c;
    c.max_iterations = 3;
    const auto s     = optimize_als( q, x, c );
    CHECK_FALSE( s.converged );
    CHECK( s.iterations == 3 );
    CHECK( s.trace.size() == 4 );
}

TEST_CASE( "rank loss mid-run carries the iteration index" )
{
    // Channel 3 lives only on row 3, where the target basis is zero, so the
    // first filter update zeroes it out.
    const WavelengthGrid g( 400, 100, 5 );
    SensorMat            q( 5, 3 ), x( 5, 3 );
    q << 1, 0, 0, 0, 1, 0, 1, 1, 0, 0, 0, 1, 1, 0, 0;
    x << 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1;
    try
    {
        optimize_als( SensorSet( g, q ), SensorSet( g, x ), {} );
        FAIL( "expected RankDeficient" );
    }
    catch ( const RankDeficient &e )
    {
        REQUIRE( e.iteration().has_value() );
        CHECK( *e.iteration() >= 1 );
        CHECK( std::string( e.what() ).find( "iteration" ) != std::string::npos );
    }
}

TEST_CASE( "input validation" )
{
    const SensorSet x = io::builtin_cmf();
    CHECK_THROWS_AS( optimize_als( io::builtin_cmf( WavelengthGrid( 400, 5, 61 ) ), x, {} ), GridMismatch );
    CHECK_THROWS_AS(
        optimize_als( SensorSet::unchecked( x.grid(), SensorMat::Ones( 31, 3 ) ), x, {} ),
        RankDeficient );
    AlsConfig c;
    c.epsilon = -1;
    CHECK_THROWS_AS( optimize_als( x, x, c ), ShapeError );
}

TEST_CASE( "multistart keeps the best start and is reproducible" )
{
    Rng             rng( 38 );
    const SensorSet x = io::builtin_cmf();
    const SensorSet q( x.grid(), random_camera( rng, x.grid() ) );
    const auto      single = optimize_als( q, x, {} );
    const auto      a      = optimize_als_multistart( q, x, {}, 4, 99 );
    const auto      b      = optimize_als_multistart( q, x, {}, 4, 99 );
    CHECK( a.score.value() >= single.score.value() );
    CHECK( a.filter.values() == b.filter.values() );
    CHECK( a.score.value() == b.score.value() );
    CHECK_THROWS_AS( optimize_als_multistart( q, x, {}, 0, 1 ), ShapeError );
}

TEST_CASE( "fixed point at tight tolerance" )
{
    Rng             rng( 39 );
    const SensorSet x = io::builtin_cmf();
    const auto      v = orthonormalize( x );
    AlsConfig       c;
    c.epsilon        = 1e-18;
    c.max_iterations = 100000;
    for ( int k = 0; k < 5; ++k )
    {
        const SensorSet q( x.grid(), random_camera( rng, x.grid() ) );
        const auto      s = optimize_als( q, x, c );
        Vector          f = solve_f( q, solve_m( s.filter, q, v ), v ).values();
        normalize_filter( f );
        CHECK( ( f - s.filter.values() ).cwiseAbs().maxCoeff() < 1e-8 );
    }
}

} // TEST_SUITE
