// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#include <vorafilter/io.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vora::io
{

namespace
{

std::string_view trim( std::string_view s )
{
    const auto first = s.find_first_not_of( " \t\r" );
    if ( first == std::string_view::npos )
        return {};
    const auto last = s.find_last_not_of( " \t\r" );
    return s.substr( first, last - first + 1 );
}

std::vector<std::string_view> split_cells( std::string_view line )
{
    std::vector<std::string_view> cells;
    std::size_t                   pos = 0;
    while ( true )
    {
        const auto comma = line.find( ',', pos );
        cells.push_back( trim( line.substr( pos, comma - pos ) ) );
        if ( comma == std::string_view::npos )
            break;
        pos = comma + 1;
    }
    return cells;
}

std::optional<WavelengthGrid> uniform_grid( const std::vector<double> &w )
{
    if ( w.size() < 3 )
        return std::nullopt;
    const double step = w[1] - w[0];
    for ( std::size_t i = 1; i < w.size(); ++i )
        if ( std::abs( ( w[i] - w[i - 1] ) - step ) > 1e-9 )
            return std::nullopt;
    return WavelengthGrid( w.front(), step, static_cast<int>( w.size() ) );
}

} // namespace

std::string format_number( double value )
{
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars( buf.data(), buf.data() + buf.size(), value );
    return std::string( buf.data(), end );
}

std::optional<double> parse_number( std::string_view text )
{
    text = trim( text );
    if ( !text.empty() && text.front() == '+' )
        text.remove_prefix( 1 );
    double value = 0.0;
    auto [end, ec] = std::from_chars( text.data(), text.data() + text.size(), value );
    if ( text.empty() || ec != std::errc() || end != text.data() + text.size() )
        return std::nullopt;
    return value;
}

SpectralTable::SpectralTable(
    std::vector<double> wavelengths, std::vector<std::string> column_names, Matrix columns )
    : _wavelengths( std::move( wavelengths ) )
    , _column_names( std::move( column_names ) )
    , _columns( std::move( columns ) )
{
    if ( _wavelengths.empty() )
        throw ShapeError( "spectral table is empty" );
    if ( _columns.rows() != static_cast<Eigen::Index>( _wavelengths.size() ) )
        throw ShapeError( "spectral table row count does not match wavelengths" );
    if ( _columns.cols() != static_cast<Eigen::Index>( _column_names.size() ) )
        throw ShapeError( "spectral table column count does not match names" );
    for ( std::size_t i = 1; i < _wavelengths.size(); ++i )
        if ( !( _wavelengths[i] > _wavelengths[i - 1] ) )
            throw ShapeError( "spectral table wavelengths are not strictly increasing" );
    _grid = uniform_grid( _wavelengths );
}

const WavelengthGrid &SpectralTable::grid() const
{
    if ( !_grid )
        throw ShapeError( "spectral table has non-uniform wavelength spacing" );
    return *_grid;
}

Vector SpectralTable::resampled( int column, const WavelengthGrid &target ) const
{
    return interpolate( _wavelengths, _columns.col( column ), target );
}

SpectralTable parse_spectral_csv( std::string_view text )
{
    std::vector<std::string>         names;
    std::vector<double>              wavelengths;
    std::vector<std::vector<double>> rows;
    std::size_t                      width      = 0;
    bool                             seen_first = false;

    int         line_no = 0;
    std::size_t pos     = 0;
    while ( pos <= text.size() )
    {
        const auto eol  = text.find( '\n', pos );
        const auto line = trim( text.substr( pos, eol == std::string_view::npos ? eol : eol - pos ) );
        pos             = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if ( line.empty() || line.front() == '#' )
            continue;

        const auto cells = split_cells( line );
        if ( !seen_first )
        {
            seen_first = true;
            width      = cells.size();
            if ( !parse_number( cells.front() ) )
            {
                for ( std::size_t c = 1; c < cells.size(); ++c )
                    names.emplace_back( cells[c] );
                continue;
            }
        }

        if ( cells.size() != width )
            throw ParseError(
                "expected " + std::to_string( width ) + " cells, found " +
                    std::to_string( cells.size() ),
                line_no );

        std::vector<double> values;
        for ( std::size_t c = 0; c < cells.size(); ++c )
        {
            const auto v = parse_number( cells[c] );
            if ( !v || !std::isfinite( *v ) )
                throw ParseError(
                    "cell " + std::to_string( c + 1 ) + " is not a finite number: '" +
                        std::string( cells[c] ) + "'",
                    line_no );
            values.push_back( *v );
        }

        if ( !wavelengths.empty() && !( values.front() > wavelengths.back() ) )
            throw ParseError(
                values.front() == wavelengths.back()
                    ? "duplicated wavelength " + format_number( values.front() )
                    : "wavelength " + format_number( values.front() ) + " is not increasing",
                line_no );

        wavelengths.push_back( values.front() );
        rows.emplace_back( values.begin() + 1, values.end() );
    }

    if ( rows.empty() )
        throw ParseError( "no data rows", 0 );
    if ( width < 2 )
        throw ParseError( "no data columns after the wavelength column", 0 );

    const auto k = static_cast<Eigen::Index>( width - 1 );
    if ( names.empty() )
        for ( Eigen::Index c = 0; c < k; ++c )
            names.push_back( "c" + std::to_string( c + 1 ) );

    Matrix columns( static_cast<Eigen::Index>( rows.size() ), k );
    for ( std::size_t r = 0; r < rows.size(); ++r )
        for ( Eigen::Index c = 0; c < k; ++c )
            columns( static_cast<Eigen::Index>( r ), c ) = rows[r][static_cast<std::size_t>( c )];

    return SpectralTable( std::move( wavelengths ), std::move( names ), std::move( columns ) );
}

std::string write_spectral_csv( const SpectralTable &table )
{
    std::string out = "wavelength";
    for ( const auto &name : table.column_names() )
        out += "," + name;
    out += "\n";
    for ( int r = 0; r < table.rows(); ++r )
    {
        out += format_number( table.wavelengths()[static_cast<std::size_t>( r )] );
        for ( int c = 0; c < table.data_columns(); ++c )
            out += "," + format_number( table.columns()( r, c ) );
        out += "\n";
    }
    return out;
}

std::string read_text_file( const std::filesystem::path &path )
{
    std::ifstream in( path, std::ios::binary );
    if ( !in )
        throw Error( "cannot open " + path.string() );
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

SpectralTable read_spectral_file( const std::filesystem::path &path )
{
    try
    {
        return parse_spectral_csv( read_text_file( path ) );
    }
    catch ( const ParseError &e )
    {
        throw ParseError( path.string() + ": " + e.what(), e.line() );
    }
}

SensorSet
load_sensor_set( const SpectralTable &table, const WavelengthGrid &target, std::string name )
{
    if ( table.data_columns() != 3 )
        throw ShapeError(
            "sensor table needs exactly 3 data columns, found " +
            std::to_string( table.data_columns() ) );
    SensorMat channels( target.count(), 3 );
    for ( int c = 0; c < 3; ++c )
        channels.col( c ) = table.resampled( c, target );
    return SensorSet( target, std::move( channels ), std::move( name ) );
}

std::vector<SpectralCurve> load_curves( const SpectralTable &table, const WavelengthGrid &target )
{
    std::vector<SpectralCurve> out;
    out.reserve( static_cast<std::size_t>( table.data_columns() ) );
    for ( int c = 0; c < table.data_columns(); ++c )
        out.emplace_back( target, table.resampled( c, target ) );
    return out;
}

std::optional<std::string> DatasetManifest::get( const std::string &key ) const
{
    const auto it = entries.find( key );
    if ( it == entries.end() )
        return std::nullopt;
    return it->second;
}

std::optional<std::filesystem::path> DatasetManifest::path( const std::string &key ) const
{
    const auto value = get( key );
    if ( !value )
        return std::nullopt;
    std::filesystem::path p( *value );
    return p.is_absolute() ? p : base_dir / p;
}

DatasetManifest parse_manifest( std::string_view text, std::filesystem::path base_dir )
{
    DatasetManifest manifest{ std::move( base_dir ), {} };
    int             line_no = 0;
    std::size_t     pos     = 0;
    while ( pos <= text.size() )
    {
        const auto eol  = text.find( '\n', pos );
        const auto line = trim( text.substr( pos, eol == std::string_view::npos ? eol : eol - pos ) );
        pos             = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        if ( line.empty() || line.front() == '#' )
            continue;
        const auto eq = line.find( '=' );
        if ( eq == std::string_view::npos )
            throw ParseError( "expected key = value", line_no );
        const auto key = trim( line.substr( 0, eq ) );
        if ( key.empty() )
            throw ParseError( "empty key", line_no );
        manifest.entries[std::string( key )] = std::string( trim( line.substr( eq + 1 ) ) );
    }
    return manifest;
}

DatasetManifest read_manifest( const std::filesystem::path &path )
{
    return parse_manifest( read_text_file( path ), path.parent_path() );
}

WavelengthGrid parse_grid( std::string_view text )
{
    const auto cells = split_cells( text );
    if ( cells.size() == 3 )
    {
        const auto start = parse_number( cells[0] );
        const auto step  = parse_number( cells[1] );
        const auto count = parse_number( cells[2] );
        if ( start && step && count && *count == std::floor( *count ) )
            return WavelengthGrid( *start, *step, static_cast<int>( *count ) );
    }
    throw ShapeError( "grid must be 'start,step,count', got '" + std::string( text ) + "'" );
}

SensorSet load_observer(
    const std::string &choice, const WavelengthGrid &grid, const std::filesystem::path &base_dir )
{
    if ( choice == "cie1931" )
        return builtin_cmf( grid );
    if ( choice.starts_with( "file:" ) )
    {
        std::filesystem::path p( choice.substr( 5 ) );
        if ( p.is_relative() )
            p = base_dir / p;
        return load_sensor_set( read_spectral_file( p ), grid, "observer " + p.filename().string() );
    }
    throw ShapeError( "unknown observer '" + choice + "' (expected cie1931 or file:<path>)" );
}

SceneSet load_scenes( const DatasetManifest &manifest, const WavelengthGrid &grid )
{
    const auto ills  = manifest.path( "illuminants" );
    const auto refls = manifest.path( "reflectances" );
    if ( !ills || !refls )
        throw ShapeError( "scene manifest must name 'illuminants' and 'reflectances'" );
    return SceneSet(
        grid,
        load_curves( read_spectral_file( *ills ), grid ),
        load_curves( read_spectral_file( *refls ), grid ) );
}

} // namespace vora::io
