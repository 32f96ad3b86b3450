#include "eegdecode/fft.hpp"

#include <unsupported/Eigen/FFT>

namespace eegdecode {

namespace {

// Plans are cached inside the FFT object, keyed by size.
Eigen::FFT<double>& half_spectrum_fft() {
  thread_local Eigen::FFT<double> fft = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    return f;
  }();
  return fft;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<std::complex<double>> rfft(std::span<const double> x, std::size_t nfft) {
  std::vector<double> padded(nfft, 0.0);
  std::copy_n(x.begin(), std::min(x.size(), nfft), padded.begin());
  std::vector<std::complex<double>> out;
  half_spectrum_fft().fwd(out, padded);
  return out;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& half, std::size_t nfft) {
  std::vector<double> out;
  half_spectrum_fft().inv(out, half, static_cast<Eigen::Index>(nfft));
  return out;
}

std::vector<double> fft_convolve(std::span<const double> x, std::span<const double> h) {
  const std::size_t n = x.size() + h.size() - 1;
  const std::size_t nfft = next_pow2(n);
  auto fx = rfft(x, nfft);
  const auto fh = rfft(h, nfft);
  for (std::size_t i = 0; i < fx.size(); ++i) fx[i] *= fh[i];
  auto y = irfft(fx, nfft);
  y.resize(n);
  return y;
}

}  // namespace eegdecode
