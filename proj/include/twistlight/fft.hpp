#pragma once

#include <Eigen/Core>

#include "twistlight/grid.hpp"

namespace twistlight::fft {

// Unnormalised forward, 1/N-normalised inverse; FFTW sign convention
// (forward kernel exp(-2 pi i k n / N)). Zero frequency stays at index 0.
void forward(ComplexArray<double>& a);
void inverse(ComplexArray<double>& a);
void forward(ComplexArray<float>& a);
void inverse(ComplexArray<float>& a);

/// Independent forward 1-D transforms of every row.
void forward_rows(ComplexArray<double>& a);
void forward_rows(ComplexArray<float>& a);

/// Frequency of each bin in FFT order, cycles per meter.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> frequencies(Index n, Scalar pitch) {
  Eigen::Array<Scalar, Eigen::Dynamic, 1> f(n);
  for (Index k = 0; k < n; ++k) f(k) = Scalar(k < (n + 1) / 2 ? k : k - n) / (Scalar(n) * pitch);
  return f;
}

}  // namespace twistlight::fft
