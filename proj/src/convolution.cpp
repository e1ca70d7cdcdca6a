#include "seisgn/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "seisgn/error.hpp"

namespace seisgn {
namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("convolve: empty input trace");
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += ai * b[j];
  }
  return out;
}

SpectralConvolver::SpectralConvolver(std::size_t n) : n_(n) {
  if (n == 0) throw ValidationError("SpectralConvolver: zero trace length");
  fft_size_ = 1;
  while (fft_size_ < 2 * n - 1) fft_size_ *= 2;
  real_ = fftw_alloc_real(fft_size_);
  auto* c = fftw_alloc_complex(fft_size_ / 2 + 1);
  complex_ = c;
  std::lock_guard lock(planner_mutex());
  forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(fft_size_), real_, c, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(fft_size_), c, real_, FFTW_ESTIMATE);
}

SpectralConvolver::~SpectralConvolver() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
  fftw_free(real_);
  fftw_free(complex_);
}

SpectralConvolver::Spectrum SpectralConvolver::transform(std::span<const double> trace) {
  if (trace.size() != n_) throw ValidationError("SpectralConvolver: trace length mismatch");
  std::copy(trace.begin(), trace.end(), real_);
  std::fill(real_ + n_, real_ + fft_size_, 0.0);
  fftw_execute(static_cast<fftw_plan>(forward_));
  const auto* c = static_cast<const fftw_complex*>(complex_);
  Spectrum s(spectrum_length());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = {c[k][0], c[k][1]};
  return s;
}

void SpectralConvolver::inverse(const Spectrum& spectrum, std::span<double> out) {
  if (spectrum.size() != spectrum_length() || out.size() != output_length()) {
    throw ValidationError("SpectralConvolver: spectrum or output length mismatch");
  }
  auto* c = static_cast<fftw_complex*>(complex_);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    c[k][0] = spectrum[k].real();
    c[k][1] = spectrum[k].imag();
  }
  fftw_execute(static_cast<fftw_plan>(backward_));
  const double scale = 1.0 / static_cast<double>(fft_size_);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = real_[k] * scale;
}

}  // namespace seisgn
