// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#include <vorafilter/ga.hpp>

#include <vorafilter/als.hpp>

#include <optional>

#include <Eigen/Dense>

namespace vora
{

namespace
{

// Smallest trial step before backtracking declares the point stationary.
constexpr double kMinStep = 1e-20;

struct Evaluation
{
    double score;
    double residual;
};

/// nu(diag(f) Q, V) and the minimised Luther residual, or nullopt if the
/// filtered camera is rank deficient.
std::optional<Evaluation> evaluate( const Vector &f, const SensorSet &q, const OrthoBasis &v )
{
    const SensorMat fq = f.asDiagonal() * q.channels();
    try
    {
        require_full_rank( fq, "filtered camera" );
    }
    catch ( const RankDeficient & )
    {
        return std::nullopt;
    }
    const SensorMat u        = orthonormal_columns( fq, "filtered camera" );
    const Matrix3   overlap  = u.transpose() * v.basis;
    const double    score    = VoraScore( overlap.squaredNorm() / 3.0 ).value();
    const double    residual = ( u * overlap - v.basis ).squaredNorm();
    return Evaluation{ score, residual };
}

/// d nu / d f_i = (2/3) q_i^T [A^+ P{X} (I - P{A})]_{:,i} with A = diag(f) Q,
/// from dP = (I - P) dA A^+ + (A^+)^T dA^T (I - P).
Vector gradient( const Vector &f, const SensorMat &q, const SensorMat &v )
{
    // With A = U R: (A^+)^T = U R^-T and P{A} = U U^T.
    const SensorMat a = f.asDiagonal() * q;
    Eigen::HouseholderQR<SensorMat> qr( a );
    const SensorMat u = qr.householderQ() * SensorMat::Identity( a.rows(), 3 );
    const Matrix3   r = qr.matrixQR().topRows<3>().triangularView<Eigen::Upper>();
    const SensorMat pinv_t =
        r.triangularView<Eigen::Upper>().solve( u.transpose() ).transpose();
    const SensorMat y = v * ( v.transpose() * pinv_t ); // P{X} (A^+)^T
    const SensorMat w = y - u * ( u.transpose() * y );
    return ( 2.0 / 3.0 ) * q.cwiseProduct( w ).rowwise().sum();
}

} // namespace

void GaConfig::validate() const
{
    if ( !( epsilon > 0.0 ) )
        throw ShapeError( "GA epsilon must be positive" );
    if ( max_iterations < 1 )
        throw ShapeError( "GA max_iterations must be at least 1" );
    if ( const auto *b = std::get_if<Backtracking>( &step_rule ) )
    {
        if ( !( b->initial_step > 0.0 ) || !( b->sufficient_increase > 0.0 ) )
            throw ShapeError( "backtracking parameters must be positive" );
        if ( !( b->shrink > 0.0 && b->shrink < 1.0 ) )
            throw ShapeError( "backtracking shrink factor must be in (0, 1)" );
    }
    else if ( !( std::get<FixedStep>( step_rule ).step > 0.0 ) )
        throw ShapeError( "fixed step size must be positive" );
}

Vector vora_gradient( const SpectralCurve &f, const SensorSet &q, const SensorSet &x )
{
    require_same_grid( f.grid(), q.grid(), "vora_gradient" );
    require_same_grid( q.grid(), x.grid(), "vora_gradient" );
    const SensorMat fq = f.values().asDiagonal() * q.channels();
    require_full_rank( fq, "filtered camera" );
    return gradient( f.values(), q.channels(), orthonormalize( x ).basis );
}

FilterSolution optimize_ga( const SensorSet &q, const SensorSet &x, const GaConfig &config )
{
    config.validate();
    require_same_grid( q.grid(), x.grid(), "optimize_ga" );
    require_full_rank( q.channels(), q.name().empty() ? "camera" : q.name() );
    const OrthoBasis v = orthonormalize( x );

    Vector f = make_initial_filter( config.initial_filter, q.grid() ).values();
    auto   current = evaluate( f, q, v );
    if ( !current )
        throw RankDeficient( "initial filtered camera is rank deficient", 0 );

    ConvergenceTrace    trace{ { 0, current->score, current->residual } };
    std::vector<Vector> history{ f };
    normalize_filter( history.back() );

    int  iteration = 0;
    bool converged = false;
    while ( iteration < config.max_iterations )
    {
        ++iteration;
        const Vector g = gradient( f, q.channels(), v.basis );

        Vector                    next;
        std::optional<Evaluation> trial;
        if ( const auto *rule = std::get_if<Backtracking>( &config.step_rule ) )
        {
            const double slope = g.squaredNorm();
            for ( double t = rule->initial_step; t >= kMinStep; t *= rule->shrink )
            {
                next  = f + t * g;
                trial = evaluate( next, q, v );
                if ( trial &&
                     trial->score >= current->score + rule->sufficient_increase * t * slope )
                    break;
                trial.reset();
            }
            if ( !trial )
            {
                // No ascent step exists along the gradient: stationary point.
                trace.push_back( { iteration, current->score, current->residual } );
                history.push_back( history.back() );
                converged = true;
                break;
            }
        }
        else
        {
            next  = f + std::get<FixedStep>( config.step_rule ).step * g;
            trial = evaluate( next, q, v );
            if ( !trial )
                throw RankDeficient(
                    "filtered camera became rank deficient at iteration " +
                        std::to_string( iteration ),
                    iteration );
        }

        const double gain = trial->score - current->score;
        f                 = std::move( next );
        current           = trial;
        trace.push_back( { iteration, current->score, current->residual } );
        history.push_back( f );
        normalize_filter( history.back() );

        if ( gain < config.epsilon )
        {
            converged = true;
            break;
        }
    }

    const SpectralCurve unscaled( q.grid(), f );
    const CorrectionMatrix m      = solve_m( unscaled, q, v );
    Vector                 filter = f;
    CorrectionMatrix       correction{ m.m * normalize_filter( filter ) };
    SpectralCurve          final_filter( q.grid(), std::move( filter ) );
    VoraScore              final_score = vora_value( apply_filter( final_filter, q ), x );

    return FilterSolution{
        std::move( final_filter ),
        correction,
        final_score,
        std::move( trace ),
        iteration,
        converged,
        std::move( history ) };
}

} // namespace vora
