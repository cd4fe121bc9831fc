// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <vorafilter/metric.hpp>

namespace vora
{

/// Start from the neutral all-ones filter.
struct OnesInit
{};

/// Start from a filter with entries drawn uniformly from (0, 1].
struct RandomInit
{
    std::uint64_t seed = 0;
};

using InitialFilter = std::variant<OnesInit, RandomInit, SpectralCurve>;

SpectralCurve make_initial_filter( const InitialFilter &init, const WavelengthGrid &grid );

struct TraceRecord
{
    int    iteration;
    double vora_value;
    double residual;
};

/// One record per iteration, starting with the initial state at iteration 0.
using ConvergenceTrace = std::vector<TraceRecord>;

struct FilterSolution
{
    /// Scaled so its largest-magnitude entry is exactly 1.
    SpectralCurve    filter;
    CorrectionMatrix correction;
    VoraScore        score;
    ConvergenceTrace trace;
    int              iterations = 0;
    bool             converged  = false;
    /// Filter after each iteration (same scaling as `filter`), index-aligned
    /// with `trace`.
    std::vector<Vector> filter_history;
};

/// Rescales `f` so its largest-magnitude entry becomes 1 and returns the
/// divisor used. Vora-Values are unchanged.
double normalize_filter( Vector &f );

} // namespace vora
