// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <vorafilter/colorimetry.hpp>

namespace vora::io
{

/// Wavelength-first spectral table: one row per wavelength, k data columns.
class SpectralTable
{
public:
    SpectralTable(
        std::vector<double> wavelengths, std::vector<std::string> column_names, Matrix columns );

    const std::vector<double>      &wavelengths() const { return _wavelengths; }
    const std::vector<std::string> &column_names() const { return _column_names; }
    const Matrix                   &columns() const { return _columns; }
    int rows() const { return static_cast<int>( _wavelengths.size() ); }
    int data_columns() const { return static_cast<int>( _columns.cols() ); }

    /// Whether wavelength spacing is uniform (to 1e-9 nm).
    bool is_uniform() const { return _grid.has_value(); }

    /// Throws ShapeError for non-uniform tables; resample those instead.
    const WavelengthGrid &grid() const;

    /// Column `c` interpolated onto `target`.
    Vector resampled( int column, const WavelengthGrid &target ) const;

private:
    std::vector<double>           _wavelengths;
    std::vector<std::string>      _column_names;
    Matrix                        _columns;
    std::optional<WavelengthGrid> _grid;
};

/// Parses comma-separated text: `#` comment lines and blank lines are
/// skipped, a leading row whose first cell is not numeric is a header.
SpectralTable parse_spectral_csv( std::string_view text );

/// Serialises with shortest round-trip number formatting.
std::string write_spectral_csv( const SpectralTable &table );

SpectralTable read_spectral_file( const std::filesystem::path &path );

/// Table with exactly three data columns, resampled and rank validated.
SensorSet load_sensor_set(
    const SpectralTable &table, const WavelengthGrid &target, std::string name = {} );

/// Every data column as a curve on `target`.
std::vector<SpectralCurve> load_curves( const SpectralTable &table, const WavelengthGrid &target );

/// CIE 1931 2-degree observer, 380-780 nm at 5 nm, as tabulated by the CIE.
SpectralTable builtin_cmf_table();

/// CIE 1931 2-degree observer on `grid` (default 400-700 nm / 10 nm).
SensorSet builtin_cmf( const WavelengthGrid &grid = WavelengthGrid() );

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number( double value );

/// Parses a complete decimal number; nullopt on any trailing text.
std::optional<double> parse_number( std::string_view text );

/// Key-value dataset description:
///
///     # comment
///     camera = canon5d2.csv
///     cmf = cie1931            (or file:path.csv)
///     illuminants = illuminants.csv
///     reflectances = reflectances.csv
///     grid = 400,10,31         (start, step, count; optional)
///
/// Relative paths resolve against the manifest's directory.
struct DatasetManifest
{
    std::filesystem::path                base_dir;
    std::map<std::string, std::string>   entries;

    std::optional<std::string>           get( const std::string &key ) const;
    std::optional<std::filesystem::path> path( const std::string &key ) const;
};

DatasetManifest parse_manifest( std::string_view text, std::filesystem::path base_dir );
DatasetManifest read_manifest( const std::filesystem::path &path );

/// Parses "start,step,count".
WavelengthGrid parse_grid( std::string_view text );

/// `cie1931` or `file:<path>`; relative file paths resolve against `base_dir`.
SensorSet load_observer(
    const std::string &choice, const WavelengthGrid &grid, const std::filesystem::path &base_dir = {} );

/// Illuminants and reflectances named by a manifest.
SceneSet load_scenes( const DatasetManifest &manifest, const WavelengthGrid &grid );

std::string read_text_file( const std::filesystem::path &path );

} // namespace vora::io
