// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#include <vorafilter/als.hpp>

#include <Eigen/Dense>

#include <future>
#include <optional>
#include <sstream>

namespace vora
{

namespace
{

constexpr double kMonotoneSlack  = 1e-12;
constexpr double kDegenerateRow  = 1e-20;

// 1 - nu for diag(f) Q, evaluated as ||(I - U U^T) V||^2 / 3. Near nu = 1 this
// small quantity keeps full relative precision where nu itself would not, so
// iteration gains are taken as differences of deficits.
double vora_deficit( const Vector &f, const SensorSet &q, const OrthoBasis &v, int iteration )
{
    SensorMat fq = f.asDiagonal() * q.channels();
    try
    {
        require_full_rank( fq, "filtered camera" );
    }
    catch ( const RankDeficient &e )
    {
        throw RankDeficient(
            std::string( e.what() ) + " at iteration " + std::to_string( iteration ),
            iteration );
    }
    const SensorMat u = orthonormal_columns( fq, "filtered camera" );
    const SensorMat r = v.basis - u * ( u.transpose() * v.basis );
    const double    deficit = r.squaredNorm() / 3.0;
    VoraScore( 1.0 - deficit ); // range check
    return deficit;
}

} // namespace

void AlsConfig::validate() const
{
    if ( !( epsilon > 0.0 ) )
        throw ShapeError( "ALS epsilon must be positive" );
    if ( max_iterations < 1 )
        throw ShapeError( "ALS max_iterations must be at least 1" );
}

CorrectionMatrix solve_m( const SpectralCurve &f, const SensorSet &q, const OrthoBasis &v )
{
    require_same_grid( f.grid(), q.grid(), "solve_m" );
    require_same_grid( q.grid(), v.grid, "solve_m" );
    const SensorMat fq = f.values().asDiagonal() * q.channels();
    require_full_rank( fq, "filtered camera" );
    // Same minimiser as the normal equations, without squaring the condition number.
    return { fq.householderQr().solve( v.basis ) };
}

SpectralCurve solve_f( const SensorSet &q, const CorrectionMatrix &m, const OrthoBasis &v )
{
    require_same_grid( q.grid(), v.grid, "solve_f" );
    const SensorMat qm = q.channels() * m.m;
    Vector          f( q.size() );
    for ( int i = 0; i < q.size(); ++i )
    {
        const double norm2 = qm.row( i ).squaredNorm();
        f[i] = norm2 < kDegenerateRow ? 0.0 : qm.row( i ).dot( v.basis.row( i ) ) / norm2;
    }
    return SpectralCurve( q.grid(), std::move( f ) );
}

FilterSolution optimize_als( const SensorSet &q, const SensorSet &x, const AlsConfig &config )
{
    config.validate();
    require_same_grid( q.grid(), x.grid(), "optimize_als" );
    require_full_rank( q.channels(), q.name().empty() ? "camera" : q.name() );
    const OrthoBasis v = orthonormalize( x );

    SpectralCurve    f = make_initial_filter( config.initial_filter, q.grid() );
    double           deficit = vora_deficit( f.values(), q, v, 0 );
    CorrectionMatrix m = solve_m( f, q, v );

    ConvergenceTrace    trace{ { 0, 1.0 - deficit, luther_residual( f, q, m, v ) } };
    std::vector<Vector> history{ f.values() };
    normalize_filter( history.back() );

    int  iteration = 0;
    bool converged = false;
    while ( iteration < config.max_iterations )
    {
        ++iteration;
        m = solve_m( f, q, v );
        f = solve_f( q, m, v );

        const double next = vora_deficit( f.values(), q, v, iteration );
        const double gain = deficit - next;
        if ( gain < -kMonotoneSlack )
        {
            std::ostringstream msg;
            msg.precision( 17 );
            msg << "ALS Vora-Value decreased by " << -gain << " at iteration " << iteration;
            throw InternalError( msg.str() );
        }
        deficit = next;
        trace.push_back( { iteration, 1.0 - deficit, luther_residual( f, q, m, v ) } );
        history.push_back( f.values() );
        normalize_filter( history.back() );

        if ( gain < config.epsilon )
        {
            converged = true;
            break;
        }
    }

    Vector           filter = f.values();
    CorrectionMatrix correction{ m.m * normalize_filter( filter ) };
    SpectralCurve    final_filter( q.grid(), std::move( filter ) );
    VoraScore        final_score = vora_value( apply_filter( final_filter, q ), x );

    return FilterSolution{
        std::move( final_filter ),
        correction,
        final_score,
        std::move( trace ),
        iteration,
        converged,
        std::move( history ) };
}

FilterSolution optimize_als_multistart(
    const SensorSet &q,
    const SensorSet &x,
    const AlsConfig &config,
    int              starts,
    std::uint64_t    seed )
{
    if ( starts < 1 )
        throw ShapeError( "multistart needs at least one start" );

    std::vector<std::future<FilterSolution>> runs;
    runs.reserve( starts );
    for ( int s = 0; s < starts; ++s )
    {
        AlsConfig c = config;
        if ( s > 0 )
            c.initial_filter = RandomInit{ seed + static_cast<std::uint64_t>( s ) };
        runs.push_back( std::async( std::launch::async, [&q, &x, c] {
            return optimize_als( q, x, c );
        } ) );
    }

    std::optional<FilterSolution> best;
    std::exception_ptr            first_error;
    for ( auto &r : runs )
    {
        try
        {
            FilterSolution s = r.get();
            if ( !best || s.score.value() > best->score.value() )
                best = std::move( s );
        }
        catch ( const RankDeficient & )
        {
            // A random start can zero out a channel; other starts still count.
            if ( !first_error )
                first_error = std::current_exception();
        }
    }
    if ( !best )
        std::rethrow_exception( first_error );
    return std::move( *best );
}

} // namespace vora
