// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <vorafilter/errors.hpp>

namespace vora
{

using Matrix    = Eigen::MatrixXd;
using Vector    = Eigen::VectorXd;
using Matrix3   = Eigen::Matrix3d;
using Vector3   = Eigen::Vector3d;
using SensorMat = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Relative singular-value threshold below which a matrix is rank deficient.
inline constexpr double kRankTolerance = 1e-10;

/// Uniformly spaced wavelength sampling, in nanometres.
class WavelengthGrid
{
public:
    /// 400-700 nm at 10 nm, 31 samples.
    WavelengthGrid();
    WavelengthGrid( double start, double step, int count );

    double start() const { return _start; }
    double step() const { return _step; }
    int    count() const { return _count; }
    double end() const { return _start + _step * ( _count - 1 ); }
    double wavelength( int i ) const { return _start + _step * i; }

    std::vector<double> wavelengths() const;

    /// Grids compare equal when start and step agree to 1e-9 nm and counts match.
    bool operator==( const WavelengthGrid &other ) const;

    std::string describe() const;

private:
    double _start;
    double _step;
    int    _count;
};

/// One spectral function sampled on a grid: a filter, illuminant or reflectance.
class SpectralCurve
{
public:
    SpectralCurve( WavelengthGrid grid, Vector values );

    /// A curve with every sample equal to `value`.
    static SpectralCurve constant( const WavelengthGrid &grid, double value );

    const WavelengthGrid &grid() const { return _grid; }
    const Vector         &values() const { return _values; }
    int                   size() const { return _grid.count(); }
    double operator[]( int i ) const { return _values[i]; }

private:
    WavelengthGrid _grid;
    Vector         _values;
};

/// Three-channel spectral sensitivities; rows are wavelengths.
///
/// Construction validates that the three columns are linearly independent.
/// Use `SensorSet::unchecked` for intermediate results (a filtered camera)
/// whose rank is re-validated by the consumer.
class SensorSet
{
public:
    SensorSet( WavelengthGrid grid, SensorMat channels, std::string name = {} );

    static SensorSet
    unchecked( WavelengthGrid grid, SensorMat channels, std::string name = {} );

    const WavelengthGrid &grid() const { return _grid; }
    const SensorMat      &channels() const { return _channels; }
    const std::string    &name() const { return _name; }
    int                   size() const { return _grid.count(); }

    /// Same sensors with channels mixed by a 3x3 transform (columns S * T).
    SensorSet transformed( const Matrix3 &t ) const;

private:
    struct NoCheck
    {};
    SensorSet( WavelengthGrid grid, SensorMat channels, std::string name, NoCheck );

    WavelengthGrid _grid;
    SensorMat      _channels;
    std::string    _name;
};

/// Orthonormal basis V = X T of the column space of a sensor set.
struct OrthoBasis
{
    WavelengthGrid grid;
    SensorMat      basis;
    Matrix3        source_transform;
};

struct CorrectionMatrix
{
    Matrix3 m = Matrix3::Identity();
};

/// Throws RankDeficient if `s` does not have three independent columns.
/// `what` names the matrix in the error message.
void require_full_rank( const Eigen::Ref<const SensorMat> &s, const std::string &what );

/// Inverse of a 3x3 matrix via LU with partial pivoting.
Matrix3 inverse3( const Matrix3 &a, const std::string &what = "3x3 matrix" );

/// Orthonormal basis of the column space of a full-rank n x 3 matrix
/// (thin Householder QR, diagonal of R made positive).
SensorMat orthonormal_columns( const Eigen::Ref<const SensorMat> &s, const std::string &what );

/// Orthogonal projector s (s^T s)^-1 s^T onto the column space of `s`,
/// evaluated as U U^T from an orthonormal basis U of that space.
Matrix projector( const Eigen::Ref<const SensorMat> &s, const std::string &what = "matrix" );

OrthoBasis orthonormalize( const SensorSet &x );

/// diag(f) Q. The result is not rank checked.
SensorSet apply_filter( const SpectralCurve &f, const SensorSet &q );

/// Piecewise-linear resampling onto `target`; no extrapolation.
SpectralCurve resample( const SpectralCurve &c, const WavelengthGrid &target );

/// Piecewise-linear interpolation of samples at strictly increasing
/// `wavelengths` onto `target`. Target nodes that coincide with a source
/// wavelength (to 1e-9 nm) take the source value exactly.
Vector interpolate(
    std::span<const double>    wavelengths,
    const Eigen::Ref<const Vector> &values,
    const WavelengthGrid      &target );

void require_same_grid(
    const WavelengthGrid &a, const WavelengthGrid &b, const std::string &what );

} // namespace vora
