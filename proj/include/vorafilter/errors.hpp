// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace vora
{

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A sensor matrix (camera, observer, filtered camera or response set) does
/// not have three linearly independent columns.
class RankDeficient : public Error
{
public:
    explicit RankDeficient(
        const std::string &what, std::optional<int> iteration = std::nullopt );

    /// Optimizer iteration at which the rank loss was detected, if any.
    std::optional<int> iteration() const { return _iteration; }

private:
    std::optional<int> _iteration;
};

class GridMismatch : public Error
{
public:
    using Error::Error;
};

class OutOfRange : public Error
{
public:
    using Error::Error;
};

class ParseError : public Error
{
public:
    ParseError( const std::string &what, int line );

    /// 1-based line number in the parsed text, 0 when not line-specific.
    int line() const { return _line; }

private:
    int _line;
};

class ShapeError : public Error
{
public:
    using Error::Error;
};

class InvalidWhitePoint : public Error
{
public:
    using Error::Error;
};

class SpaceMismatch : public Error
{
public:
    using Error::Error;
};

/// Raised when a numerical invariant is violated by more than round-off.
class InternalError : public Error
{
public:
    using Error::Error;
};

} // namespace vora
