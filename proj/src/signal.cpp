#include "gpdyn/signal.hpp"

#include <cmath>

namespace gpdyn {

BiquadCoeffs butterworth_lowpass(double cutoff_hz, double sample_hz) {
  require(cutoff_hz > 0.0 && cutoff_hz < 0.5 * sample_hz,
          "cutoff must lie in (0, sample_rate/2)");
  const double k = std::tan(M_PI * cutoff_hz / sample_hz);
  const double sqrt2 = std::sqrt(2.0);
  const double norm = 1.0 / (1.0 + sqrt2 * k + k * k);
  BiquadCoeffs c;
  c.b0 = k * k * norm;
  c.b1 = 2.0 * c.b0;
  c.b2 = c.b0;
  c.a1 = 2.0 * (k * k - 1.0) * norm;
  c.a2 = (1.0 - sqrt2 * k + k * k) * norm;
  return c;
}

Vec filter_forward(const BiquadCoeffs& c, const Vec& x) {
  Vec y(x.size());
  double w1 = 0.0, w2 = 0.0;  // direct form II state
  for (int i = 0; i < x.size(); ++i) {
    const double w0 = x[i] - c.a1 * w1 - c.a2 * w2;
    y[i] = c.b0 * w0 + c.b1 * w1 + c.b2 * w2;
    w2 = w1;
    w1 = w0;
  }
  return y;
}

Vec filtfilt(const BiquadCoeffs& c, const Vec& x) {
  const Vec forward = filter_forward(c, x);
  return filter_forward(c, forward.reverse()).reverse();
}

}  // namespace gpdyn
