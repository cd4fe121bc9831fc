// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#include <vorafilter/spectra.hpp>

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace vora
{

RankDeficient::RankDeficient( const std::string &what, std::optional<int> iteration )
    : Error( what ), _iteration( iteration )
{}

ParseError::ParseError( const std::string &what, int line )
    : Error( line > 0 ? "line " + std::to_string( line ) + ": " + what : what )
    , _line( line )
{}

WavelengthGrid::WavelengthGrid() : WavelengthGrid( 400.0, 10.0, 31 ) {}

WavelengthGrid::WavelengthGrid( double start, double step, int count )
    : _start( start ), _step( step ), _count( count )
{
    if ( !std::isfinite( start ) || !std::isfinite( step ) || step <= 0.0 )
        throw ShapeError( "wavelength grid step must be positive and finite" );
    if ( count < 3 )
        throw ShapeError( "wavelength grid needs at least 3 samples" );
}

std::vector<double> WavelengthGrid::wavelengths() const
{
    std::vector<double> out( _count );
    for ( int i = 0; i < _count; ++i )
        out[i] = wavelength( i );
    return out;
}

bool WavelengthGrid::operator==( const WavelengthGrid &other ) const
{
    return _count == other._count && std::abs( _start - other._start ) < 1e-9 &&
           std::abs( _step - other._step ) < 1e-9;
}

std::string WavelengthGrid::describe() const
{
    std::ostringstream s;
    s << _start << "-" << end() << " nm step " << _step << " (" << _count
      << " samples)";
    return s.str();
}

SpectralCurve::SpectralCurve( WavelengthGrid grid, Vector values )
    : _grid( grid ), _values( std::move( values ) )
{
    if ( _values.size() != _grid.count() )
        throw ShapeError(
            "spectral curve has " + std::to_string( _values.size() ) +
            " values for a grid of " + std::to_string( _grid.count() ) );
    if ( !_values.allFinite() )
        throw ShapeError( "spectral curve contains non-finite values" );
}

SpectralCurve SpectralCurve::constant( const WavelengthGrid &grid, double value )
{
    return SpectralCurve( grid, Vector::Constant( grid.count(), value ) );
}

SensorSet::SensorSet( WavelengthGrid grid, SensorMat channels, std::string name )
    : SensorSet( grid, std::move( channels ), std::move( name ), NoCheck{} )
{
    require_full_rank( _channels, _name.empty() ? "sensor set" : _name );
}

SensorSet::SensorSet(
    WavelengthGrid grid, SensorMat channels, std::string name, NoCheck )
    : _grid( grid ), _channels( std::move( channels ) ), _name( std::move( name ) )
{
    if ( _channels.rows() != _grid.count() )
        throw ShapeError(
            "sensor set has " + std::to_string( _channels.rows() ) +
            " rows for a grid of " + std::to_string( _grid.count() ) );
    if ( !_channels.allFinite() )
        throw ShapeError( "sensor set contains non-finite values" );
}

SensorSet
SensorSet::unchecked( WavelengthGrid grid, SensorMat channels, std::string name )
{
    return SensorSet( grid, std::move( channels ), std::move( name ), NoCheck{} );
}

SensorSet SensorSet::transformed( const Matrix3 &t ) const
{
    return SensorSet( _grid, _channels * t, _name );
}

void require_full_rank( const Eigen::Ref<const SensorMat> &s, const std::string &what )
{
    if ( s.rows() < 3 )
        throw RankDeficient( what + " has fewer than 3 rows" );
    if ( !s.allFinite() )
        throw RankDeficient( what + " contains non-finite values" );

    Eigen::JacobiSVD<SensorMat> svd( s );
    const Vector3 &sv = svd.singularValues();
    if ( !( sv[0] > 0.0 ) || sv[2] <= kRankTolerance * sv[0] )
    {
        std::ostringstream msg;
        msg << what << " is rank deficient (singular values " << sv[0] << ", "
            << sv[1] << ", " << sv[2] << ")";
        throw RankDeficient( msg.str() );
    }
}

Matrix3 inverse3( const Matrix3 &a, const std::string &what )
{
    Eigen::PartialPivLU<Matrix3> lu( a );
    Matrix3 u = lu.matrixLU().triangularView<Eigen::Upper>();
    double  scale = a.cwiseAbs().maxCoeff();
    double  pivot = u.diagonal().cwiseAbs().minCoeff();
    if ( !( scale > 0.0 ) || pivot <= kRankTolerance * kRankTolerance * scale )
        throw RankDeficient( what + " is singular" );
    return lu.inverse();
}

namespace
{

struct ThinQr
{
    SensorMat q;
    Matrix3   r;
};

ThinQr thin_qr( const Eigen::Ref<const SensorMat> &s )
{
    Eigen::HouseholderQR<SensorMat> qr( s );
    ThinQr out{ qr.householderQ() * SensorMat::Identity( s.rows(), 3 ),
                qr.matrixQR().topRows<3>().triangularView<Eigen::Upper>() };
    for ( int c = 0; c < 3; ++c )
    {
        if ( out.r( c, c ) < 0.0 )
        {
            out.r.row( c ) *= -1.0;
            out.q.col( c ) *= -1.0;
        }
    }
    return out;
}

} // namespace

SensorMat orthonormal_columns( const Eigen::Ref<const SensorMat> &s, const std::string &what )
{
    require_full_rank( s, what );
    return thin_qr( s ).q;
}

Matrix projector( const Eigen::Ref<const SensorMat> &s, const std::string &what )
{
    const SensorMat u = orthonormal_columns( s, what );
    return u * u.transpose();
}

OrthoBasis orthonormalize( const SensorSet &x )
{
    const std::string what = x.name().empty() ? "sensor set" : x.name();
    require_full_rank( x.channels(), what );
    // Positive diagonal of R: an already orthonormal X maps to itself.
    ThinQr qr = thin_qr( x.channels() );
    return { x.grid(), std::move( qr.q ), inverse3( qr.r, what + " R factor" ) };
}

void require_same_grid(
    const WavelengthGrid &a, const WavelengthGrid &b, const std::string &what )
{
    if ( !( a == b ) )
        throw GridMismatch(
            what + ": grids differ (" + a.describe() + " vs " + b.describe() + ")" );
}

SensorSet apply_filter( const SpectralCurve &f, const SensorSet &q )
{
    require_same_grid( f.grid(), q.grid(), "apply_filter" );
    SensorMat out = f.values().asDiagonal() * q.channels();
    return SensorSet::unchecked(
        q.grid(), std::move( out ), q.name().empty() ? "" : "filtered " + q.name() );
}

Vector interpolate(
    std::span<const double>         wavelengths,
    const Eigen::Ref<const Vector> &values,
    const WavelengthGrid           &target )
{
    const auto n = static_cast<Eigen::Index>( wavelengths.size() );
    if ( n < 2 || values.size() != n )
        throw ShapeError( "interpolation needs at least two matching samples" );

    constexpr double tol = 1e-9;
    if ( target.start() < wavelengths.front() - tol ||
         target.end() > wavelengths.back() + tol )
    {
        std::ostringstream msg;
        msg << "target " << target.describe() << " extends outside source range "
            << wavelengths.front() << "-" << wavelengths.back() << " nm";
        throw OutOfRange( msg.str() );
    }

    Vector       out( target.count() );
    Eigen::Index k = 0;
    for ( int i = 0; i < target.count(); ++i )
    {
        const double w = target.wavelength( i );
        while ( k + 1 < n - 1 && wavelengths[k + 1] < w - tol )
            ++k;
        if ( std::abs( w - wavelengths[k] ) <= tol )
            out[i] = values[k];
        else if ( std::abs( w - wavelengths[k + 1] ) <= tol )
            out[i] = values[k + 1];
        else
        {
            const double t = ( w - wavelengths[k] ) / ( wavelengths[k + 1] - wavelengths[k] );
            out[i]         = values[k] + t * ( values[k + 1] - values[k] );
        }
    }
    return out;
}

SpectralCurve resample( const SpectralCurve &c, const WavelengthGrid &target )
{
    if ( c.grid() == target )
        return c;
    const auto w = c.grid().wavelengths();
    return SpectralCurve( target, interpolate( w, c.values(), target ) );
}

} // namespace vora
