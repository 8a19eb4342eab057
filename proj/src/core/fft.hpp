#pragma once

#include <complex>
#include <span>
#include <vector>

namespace swnav {

// Forward complex DFT, X[j] = sum_k x[k] exp(-i 2 pi j k / N), unnormalized.
// Backed by FFTW; plans are cached per length behind a mutex so concurrent
// workers can call freely.
std::vector<std::complex<double>> fft_forward(
    std::span<const std::complex<double>> x);

}  // namespace swnav
