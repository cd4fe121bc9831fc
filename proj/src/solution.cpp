// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#include <vorafilter/solution.hpp>

#include <random>

namespace vora
{

SpectralCurve make_initial_filter( const InitialFilter &init, const WavelengthGrid &grid )
{
    struct Visitor
    {
        const WavelengthGrid &grid;

        SpectralCurve operator()( const OnesInit & ) const
        {
            return SpectralCurve::constant( grid, 1.0 );
        }

        SpectralCurve operator()( const RandomInit &r ) const
        {
            std::mt19937_64                        rng( r.seed );
            std::uniform_real_distribution<double> unit( 0.0, 1.0 );
            Vector                                 v( grid.count() );
            for ( auto &e : v )
                e = 1.0 - unit( rng );
            return SpectralCurve( grid, std::move( v ) );
        }

        SpectralCurve operator()( const SpectralCurve &c ) const
        {
            require_same_grid( c.grid(), grid, "initial filter" );
            return c;
        }
    };
    return std::visit( Visitor{ grid }, init );
}

double normalize_filter( Vector &f )
{
    Eigen::Index k;
    f.cwiseAbs().maxCoeff( &k );
    const double c = f[k];
    if ( c == 0.0 )
        return 1.0;
    f /= c;
    f[k] = 1.0;
    return c;
}

} // namespace vora
