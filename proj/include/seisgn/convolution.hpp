#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace seisgn {

/// Full linear convolution, length a.size() + b.size() - 1.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

/// FFT convolution of traces of one fixed length n (output length 2n - 1).
/// Not thread-safe: each worker needs its own instance.
class SpectralConvolver {
 public:
  using Spectrum = std::vector<std::complex<double>>;

  explicit SpectralConvolver(std::size_t n);
  ~SpectralConvolver();
  SpectralConvolver(const SpectralConvolver&) = delete;
  SpectralConvolver& operator=(const SpectralConvolver&) = delete;

  std::size_t input_length() const { return n_; }
  std::size_t output_length() const { return 2 * n_ - 1; }
  std::size_t spectrum_length() const { return fft_size_ / 2 + 1; }

  Spectrum transform(std::span<const double> trace);
  /// Inverse transform of a product spectrum, truncated to output_length().
  void inverse(const Spectrum& spectrum, std::span<double> out);

 private:
  std::size_t n_;
  std::size_t fft_size_;
  double* real_ = nullptr;
  void* complex_ = nullptr;
  void* forward_ = nullptr;
  void* backward_ = nullptr;
};

}  // namespace seisgn
