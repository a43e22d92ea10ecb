#pragma once

#include <complex>

#include "corstitch/grid.hpp"

namespace corstitch {

using Complex = std::complex<double>;
using ComplexGrid = Grid<Complex>;

// 2-D discrete Fourier transforms backed by FFTW. Plans are cached per (rows, cols,
// direction) behind a mutex; execution on caller-owned buffers is thread-safe.

/// Unnormalized forward transform: X[k] = sum_n x[n] exp(-2*pi*i*k.n/N).
ComplexGrid fft2(const RealGrid& input);
ComplexGrid fft2(const ComplexGrid& input);

/// Inverse transform scaled by 1/(rows*cols), so ifft2(fft2(x)) == x.
ComplexGrid ifft2(const ComplexGrid& input);

}  // namespace corstitch
