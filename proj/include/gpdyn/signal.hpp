#pragma once

#include "gpdyn/types.hpp"

namespace gpdyn {

/// Second-order low-pass biquad coefficients (direct form, unity DC gain).
struct BiquadCoeffs {
  double b0, b1, b2;  // feedforward
  double a1, a2;      // feedback (a0 normalized to 1)
};

/// Designs a second-order Butterworth low-pass section via the bilinear
/// transform. Requires 0 < cutoff_hz < sample_hz / 2.
BiquadCoeffs butterworth_lowpass(double cutoff_hz, double sample_hz);

/// Single forward pass of the biquad over the signal.
Vec filter_forward(const BiquadCoeffs& c, const Vec& x);

/// Zero-phase filtering: forward pass followed by a time-reversed pass.
Vec filtfilt(const BiquadCoeffs& c, const Vec& x);

}  // namespace gpdyn
