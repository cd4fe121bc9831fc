// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vora::cli
{

inline constexpr int kExitOk             = 0;
inline constexpr int kExitInputError     = 1;
inline constexpr int kExitNonConvergence = 2;

struct CommonOptions
{
    std::optional<std::filesystem::path> camera;
    /// cie1931 or file:<path>; defaults to the manifest's cmf, else cie1931.
    std::optional<std::string>           cmf;
    std::optional<std::filesystem::path> scenes;
    std::string                          correction = "per-illuminant";
    /// "start,step,count"; defaults to the manifest's grid, else 400,10,31.
    std::optional<std::string>           grid;
    std::filesystem::path                out = ".";
};

struct OptimizeOptions : CommonOptions
{
    std::string   optimizer = "als";
    double        epsilon   = 1e-9;
    int           max_iters = 10000;
    std::string   init      = "ones";
    std::uint64_t seed      = 20201;
    int           starts    = 1;
    std::string   step_rule = "backtracking";
    double        step      = 1.0;
};

struct EvaluateOptions : CommonOptions
{
    std::optional<std::filesystem::path> filter;
};

struct TraceCompareOptions : CommonOptions
{
    std::vector<std::filesystem::path> traces;
    std::vector<std::string>           labels;
    double                             tolerance = 1e-4;
};

/// Writes filter.csv, trace.csv, filter_trace.csv and report.json into
/// `out`. Returns kExitOk, kExitNonConvergence or kExitInputError.
int cmd_optimize( const OptimizeOptions &options, std::ostream &out, std::ostream &err );

/// Writes evaluation.csv (one row) and evaluation.txt (table).
int cmd_evaluate( const EvaluateOptions &options, std::ostream &out, std::ostream &err );

/// Writes merged.csv (long format) and diff.csv for two traces.
int cmd_trace_compare( const TraceCompareOptions &options, std::ostream &out, std::ostream &err );

/// Parses argv and dispatches to a subcommand.
int run( int argc, const char *const *argv, std::ostream &out, std::ostream &err );

} // namespace vora::cli
