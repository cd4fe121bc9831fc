// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#include <vorafilter/metric.hpp>

#include <algorithm>
#include <sstream>

namespace vora
{

namespace
{
constexpr double kClampSlack = 1e-12;
}

VoraScore::VoraScore( double value ) : _value( value )
{
    if ( !( value >= -kClampSlack && value <= 1.0 + kClampSlack ) )
    {
        std::ostringstream msg;
        msg.precision( 17 );
        msg << "Vora-Value " << value << " outside [0, 1]";
        throw InternalError( msg.str() );
    }
    _value = std::clamp( value, 0.0, 1.0 );
}

VoraScore vora_value( const SensorSet &q, const SensorSet &x )
{
    require_same_grid( q.grid(), x.grid(), "vora_value" );
    const Matrix pq = projector( q.channels(), q.name().empty() ? "camera" : q.name() );
    const Matrix px = projector( x.channels(), x.name().empty() ? "observer" : x.name() );
    // trace(A B) for symmetric A, B is the elementwise inner product.
    return VoraScore( pq.cwiseProduct( px ).sum() / 3.0 );
}

double luther_residual(
    const SpectralCurve    &f,
    const SensorSet        &q,
    const CorrectionMatrix &m,
    const OrthoBasis       &v )
{
    require_same_grid( f.grid(), q.grid(), "luther_residual" );
    require_same_grid( q.grid(), v.grid, "luther_residual" );
    return ( f.values().asDiagonal() * q.channels() * m.m - v.basis ).squaredNorm();
}

ResidualIdentity
residual_identity_check( const SpectralCurve &f, const SensorSet &q, const SensorSet &x )
{
    const SensorSet  fq = apply_filter( f, q );
    const OrthoBasis v  = orthonormalize( x );

    const Matrix p = projector( fq.channels(), "filtered camera" );
    const double lhs =
        ( p * v.basis - v.basis ).squaredNorm();
    const double rhs = 3.0 - 3.0 * vora_value( fq, x ).value();
    return { lhs, rhs };
}

} // namespace vora
