// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#pragma once

#include <vorafilter/solution.hpp>

namespace vora
{

struct AlsConfig
{
    /// Stop once the Vora-Value gain of an iteration drops below this.
    double        epsilon        = 1e-9;
    int           max_iterations = 10000;
    InitialFilter initial_filter = OnesInit{};

    /// Throws ShapeError on non-positive epsilon or max_iterations.
    void validate() const;
};

/// Least-squares M minimising ||diag(f) Q M - V||_F.
CorrectionMatrix solve_m( const SpectralCurve &f, const SensorSet &q, const OrthoBasis &v );

/// Row-wise least-squares filter for fixed M:
/// f_i = ((QM)_i . V_i) / ((QM)_i . (QM)_i). Rows whose squared norm is
/// below 1e-20 get f_i = 0.
SpectralCurve solve_f( const SensorSet &q, const CorrectionMatrix &m, const OrthoBasis &v );

/// Alternating least squares on the orthonormalised observer basis.
/// Throws RankDeficient (with iteration index) if the filter removes a channel.
FilterSolution optimize_als( const SensorSet &q, const SensorSet &x, const AlsConfig &config );

/// Runs `starts` independent ALS optimisations concurrently: the first from
/// `config.initial_filter`, the rest from RandomInit seeded from `seed`.
/// Returns the best score; ties go to the lowest start index.
FilterSolution optimize_als_multistart(
    const SensorSet &q,
    const SensorSet &x,
    const AlsConfig &config,
    int              starts,
    std::uint64_t    seed );

} // namespace vora
