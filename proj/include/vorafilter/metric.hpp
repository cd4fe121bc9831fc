// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the vorafilter Project.

#pragma once

#include <vorafilter/spectra.hpp>

namespace vora
{

/// Subspace similarity between two sensor sets, in [0, 1].
class VoraScore
{
public:
    /// Values within 1e-12 outside [0, 1] are clamped; anything further out
    /// raises InternalError.
    explicit VoraScore( double value );

    double value() const { return _value; }
    operator double() const { return _value; }

private:
    double _value;
};

/// (1/3) trace(P{Q} P{X}).
VoraScore vora_value( const SensorSet &q, const SensorSet &x );

/// Squared Frobenius norm of diag(f) Q M - V.
double luther_residual(
    const SpectralCurve    &f,
    const SensorSet        &q,
    const CorrectionMatrix &m,
    const OrthoBasis       &v );

struct ResidualIdentity
{
    /// ||(P{FQ} - I) V||_F^2, the Luther residual minimised over M.
    double lhs;
    /// 3 - 3 nu(FQ, X).
    double rhs;
};

/// Evaluates both sides of the identity relating the orthonormal Luther
/// residual to the Vora-Value, each through its own route.
ResidualIdentity
residual_identity_check( const SpectralCurve &f, const SensorSet &q, const SensorSet &x );

} // namespace vora
