#pragma once

#include <complex>
#include <span>
#include <vector>

namespace speechkit::dsp {

/// Real-to-complex FFT of x zero-padded/truncated to n; returns n/2 + 1 bins.
std::vector<std::complex<double>> rfft(std::span<const double> x, std::size_t n);

/// Inverse of rfft, normalized by 1/n; returns n real samples.
std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t n);

std::size_t next_pow2(std::size_t n);

}  // namespace speechkit::dsp
