#pragma once

#include <complex>
#include <span>
#include <vector>

namespace eegdecode {

/// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

/// Half spectrum (nfft/2 + 1 bins) of x zero-padded to nfft.
std::vector<std::complex<double>> rfft(std::span<const double> x, std::size_t nfft);

/// Inverse of rfft; returns nfft real samples.
std::vector<double> irfft(const std::vector<std::complex<double>>& half, std::size_t nfft);

/// Full linear convolution (length x.size() + h.size() - 1) via FFT.
std::vector<double> fft_convolve(std::span<const double> x, std::span<const double> h);

}  // namespace eegdecode
