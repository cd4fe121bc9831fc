// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <vorafilter/metric.hpp>

namespace vora
{

enum class ColorSpace
{
    CameraRGB,
    XYZ,
    CIELAB
};

const char *to_string( ColorSpace space );

struct ColorTriple
{
    ColorTriple( ColorSpace space, const Vector3 &components );

    ColorSpace space;
    Vector3    components;
};

struct SceneSet
{
    SceneSet(
        WavelengthGrid             grid,
        std::vector<SpectralCurve> illuminants,
        std::vector<SpectralCurve> reflectances );

    WavelengthGrid             grid;
    std::vector<SpectralCurve> illuminants;
    std::vector<SpectralCurve> reflectances;
};

struct DeltaEStats
{
    double mean   = 0.0;
    double median = 0.0;
    double p95    = 0.0;
    double p99    = 0.0;
    double max    = 0.0;
};

/// Summary statistics of a non-empty error sample. Percentiles interpolate
/// linearly between order statistics (rank p (N - 1)).
DeltaEStats summarize( std::vector<double> errors );

enum class CorrectionProtocol
{
    /// One least-squares matrix per illuminant over its reflectances.
    PerIlluminant,
    /// A single matrix over every illuminant/reflectance pair.
    Global
};

struct EvaluationReport
{
    DeltaEStats stats;
    VoraScore   vora{ 0.0 };
    std::size_t samples = 0;
    /// Corrected XYZ components below zero fed into the Lab conversion.
    std::size_t negative_xyz_components = 0;
    CorrectionProtocol protocol = CorrectionProtocol::PerIlluminant;
    std::vector<double> delta_e;
};

/// sensors^T (illuminant .* reflectance).
ColorTriple sensor_response(
    const SensorSet     &sensors,
    const SpectralCurve &illuminant,
    const SpectralCurve &reflectance,
    ColorSpace           space = ColorSpace::CameraRGB );

/// Least-squares 3x3 M with camera * M ~= xyz, rows being samples.
CorrectionMatrix fit_correction(
    const std::vector<ColorTriple> &camera_responses,
    const std::vector<ColorTriple> &xyz_targets );

ColorTriple xyz_to_lab( const ColorTriple &xyz, const ColorTriple &white );

/// Euclidean CIELAB distance (Delta E*ab).
double delta_e( const ColorTriple &a, const ColorTriple &b );

EvaluationReport evaluate(
    const SensorSet                    &camera,
    const std::optional<SpectralCurve> &filter,
    const SensorSet                    &observer,
    const SceneSet                     &scenes,
    CorrectionProtocol protocol = CorrectionProtocol::PerIlluminant );

} // namespace vora
