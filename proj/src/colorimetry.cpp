// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#include <vorafilter/colorimetry.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace vora
{

namespace
{

using Responses = Eigen::Matrix<double, Eigen::Dynamic, 3>;

constexpr double kDelta = 6.0 / 29.0;

double lab_companding( double t )
{
    // Linear segment below delta^3 also carries negative ratios through.
    if ( t > kDelta * kDelta * kDelta )
        return std::cbrt( t );
    return t / ( 3.0 * kDelta * kDelta ) + 4.0 / 29.0;
}

Vector3 lab_from_xyz( const Vector3 &xyz, const Vector3 &white )
{
    const double fx = lab_companding( xyz[0] / white[0] );
    const double fy = lab_companding( xyz[1] / white[1] );
    const double fz = lab_companding( xyz[2] / white[2] );
    return { 116.0 * fy - 16.0, 500.0 * ( fx - fy ), 200.0 * ( fy - fz ) };
}

void require_white( const Vector3 &white )
{
    if ( !( white.minCoeff() > 0.0 ) || !white.allFinite() )
        throw InvalidWhitePoint( "white point components must be strictly positive" );
}

Matrix3 fit_matrix( const Responses &camera, const Responses &xyz )
{
    if ( camera.rows() != xyz.rows() )
        throw ShapeError( "camera and XYZ sample counts differ" );
    if ( camera.rows() < 3 )
        throw RankDeficient( "correction fit needs at least 3 response pairs" );
    require_full_rank( camera, "camera response matrix" );
    return camera.householderQr().solve( xyz );
}

Responses stack( const std::vector<ColorTriple> &triples, ColorSpace expected )
{
    Responses out( static_cast<Eigen::Index>( triples.size() ), 3 );
    for ( std::size_t i = 0; i < triples.size(); ++i )
    {
        if ( triples[i].space != expected )
            throw SpaceMismatch(
                std::string( "expected " ) + to_string( expected ) + " but got " +
                to_string( triples[i].space ) );
        out.row( static_cast<Eigen::Index>( i ) ) = triples[i].components.transpose();
    }
    return out;
}

double percentile( const std::vector<double> &sorted, double p )
{
    const double rank = p * static_cast<double>( sorted.size() - 1 );
    const auto   lo   = static_cast<std::size_t>( std::floor( rank ) );
    const auto   hi   = std::min( lo + 1, sorted.size() - 1 );
    return sorted[lo] + ( rank - static_cast<double>( lo ) ) * ( sorted[hi] - sorted[lo] );
}

} // namespace

const char *to_string( ColorSpace space )
{
    switch ( space )
    {
        case ColorSpace::CameraRGB: return "CameraRGB";
        case ColorSpace::XYZ: return "XYZ";
        case ColorSpace::CIELAB: return "CIELAB";
    }
    return "unknown";
}

ColorTriple::ColorTriple( ColorSpace s, const Vector3 &c ) : space( s ), components( c )
{
    if ( !components.allFinite() )
        throw ShapeError( "color triple contains non-finite components" );
}

SceneSet::SceneSet(
    WavelengthGrid             g,
    std::vector<SpectralCurve> ills,
    std::vector<SpectralCurve> refls )
    : grid( g ), illuminants( std::move( ills ) ), reflectances( std::move( refls ) )
{
    if ( illuminants.empty() || reflectances.empty() )
        throw ShapeError( "scene set needs at least one illuminant and one reflectance" );
    for ( const auto &c : illuminants )
        require_same_grid( c.grid(), grid, "scene illuminant" );
    for ( const auto &c : reflectances )
        require_same_grid( c.grid(), grid, "scene reflectance" );
}

DeltaEStats summarize( std::vector<double> errors )
{
    if ( errors.empty() )
        throw ShapeError( "cannot summarize an empty error sample" );
    // Summation in input order keeps the mean reproducible.
    const double mean =
        std::accumulate( errors.begin(), errors.end(), 0.0 ) / static_cast<double>( errors.size() );
    std::sort( errors.begin(), errors.end() );
    return { mean,
             percentile( errors, 0.5 ),
             percentile( errors, 0.95 ),
             percentile( errors, 0.99 ),
             errors.back() };
}

ColorTriple sensor_response(
    const SensorSet     &sensors,
    const SpectralCurve &illuminant,
    const SpectralCurve &reflectance,
    ColorSpace           space )
{
    require_same_grid( sensors.grid(), illuminant.grid(), "sensor_response" );
    require_same_grid( sensors.grid(), reflectance.grid(), "sensor_response" );
    const Vector signal = illuminant.values().cwiseProduct( reflectance.values() );
    return ColorTriple( space, sensors.channels().transpose() * signal );
}

CorrectionMatrix fit_correction(
    const std::vector<ColorTriple> &camera_responses,
    const std::vector<ColorTriple> &xyz_targets )
{
    return { fit_matrix(
        stack( camera_responses, ColorSpace::CameraRGB ),
        stack( xyz_targets, ColorSpace::XYZ ) ) };
}

ColorTriple xyz_to_lab( const ColorTriple &xyz, const ColorTriple &white )
{
    if ( xyz.space != ColorSpace::XYZ || white.space != ColorSpace::XYZ )
        throw SpaceMismatch( "xyz_to_lab expects XYZ inputs" );
    require_white( white.components );
    return ColorTriple( ColorSpace::CIELAB, lab_from_xyz( xyz.components, white.components ) );
}

double delta_e( const ColorTriple &a, const ColorTriple &b )
{
    if ( a.space != ColorSpace::CIELAB || b.space != ColorSpace::CIELAB )
        throw SpaceMismatch( "delta_e expects CIELAB inputs" );
    return ( a.components - b.components ).norm();
}

EvaluationReport evaluate(
    const SensorSet                    &camera,
    const std::optional<SpectralCurve> &filter,
    const SensorSet                    &observer,
    const SceneSet                     &scenes,
    CorrectionProtocol                  protocol )
{
    require_same_grid( camera.grid(), observer.grid(), "evaluate" );
    require_same_grid( camera.grid(), scenes.grid, "evaluate" );

    const SensorSet effective = filter ? apply_filter( *filter, camera ) : camera;
    require_full_rank( effective.channels(), filter ? "filtered camera" : "camera" );

    const auto n_ill  = scenes.illuminants.size();
    const auto n_refl = static_cast<Eigen::Index>( scenes.reflectances.size() );

    Matrix reflectances( camera.size(), n_refl );
    for ( Eigen::Index r = 0; r < n_refl; ++r )
        reflectances.col( r ) = scenes.reflectances[static_cast<std::size_t>( r )].values();

    std::vector<Responses> rgb( n_ill ), xyz( n_ill );
    std::vector<Vector3>   whites( n_ill );
    for ( std::size_t i = 0; i < n_ill; ++i )
    {
        const Vector &e = scenes.illuminants[i].values();
        rgb[i]          = reflectances.transpose() * ( e.asDiagonal() * effective.channels() );
        xyz[i]          = reflectances.transpose() * ( e.asDiagonal() * observer.channels() );
        whites[i]       = observer.channels().transpose() * e;
        require_white( whites[i] );
    }

    std::vector<Matrix3> corrections( n_ill );
    if ( protocol == CorrectionProtocol::Global )
    {
        Responses all_rgb( n_refl * static_cast<Eigen::Index>( n_ill ), 3 );
        Responses all_xyz( all_rgb.rows(), 3 );
        for ( std::size_t i = 0; i < n_ill; ++i )
        {
            all_rgb.middleRows( static_cast<Eigen::Index>( i ) * n_refl, n_refl ) = rgb[i];
            all_xyz.middleRows( static_cast<Eigen::Index>( i ) * n_refl, n_refl ) = xyz[i];
        }
        std::fill( corrections.begin(), corrections.end(), fit_matrix( all_rgb, all_xyz ) );
    }
    else
    {
        for ( std::size_t i = 0; i < n_ill; ++i )
            corrections[i] = fit_matrix( rgb[i], xyz[i] );
    }

    EvaluationReport report;
    report.protocol = protocol;
    report.delta_e.reserve( n_ill * static_cast<std::size_t>( n_refl ) );
    for ( std::size_t i = 0; i < n_ill; ++i )
    {
        const Responses corrected = rgb[i] * corrections[i];
        report.negative_xyz_components +=
            static_cast<std::size_t>( ( corrected.array() < 0.0 ).count() );
        for ( Eigen::Index r = 0; r < n_refl; ++r )
        {
            const Vector3 est   = lab_from_xyz( corrected.row( r ).transpose(), whites[i] );
            const Vector3 truth = lab_from_xyz( xyz[i].row( r ).transpose(), whites[i] );
            report.delta_e.push_back( ( est - truth ).norm() );
        }
    }

    report.samples = report.delta_e.size();
    report.stats   = summarize( report.delta_e );
    report.vora    = vora_value( effective, observer );
    return report;
}

} // namespace vora
