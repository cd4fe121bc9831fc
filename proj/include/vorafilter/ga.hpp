// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#pragma once

#include <vorafilter/solution.hpp>

namespace vora
{

struct FixedStep
{
    double step = 1.0;
};

/// Armijo backtracking: accept t when nu(f + t g) >= nu(f) + c t |g|^2.
struct Backtracking
{
    double initial_step       = 1.0;
    double shrink             = 0.5;
    double sufficient_increase = 1e-4;
};

using StepRule = std::variant<Backtracking, FixedStep>;

struct GaConfig
{
    StepRule      step_rule      = Backtracking{};
    double        epsilon        = 1e-9;
    int           max_iterations = 10000;
    InitialFilter initial_filter = OnesInit{};

    void validate() const;
};

/// Gradient of nu(diag(f) Q, X) with respect to each filter entry.
Vector vora_gradient( const SpectralCurve &f, const SensorSet &q, const SensorSet &x );

/// Gradient ascent on nu(diag(f) Q, X). The stopping rule matches
/// optimize_als: stop once an iteration gains less than epsilon.
FilterSolution optimize_ga( const SensorSet &q, const SensorSet &x, const GaConfig &config );

} // namespace vora
