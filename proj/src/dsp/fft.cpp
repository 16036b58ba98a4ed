#include "fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace speechkit::dsp {

namespace {

// FFTW planning is not thread-safe; execution on plan-owned buffers is
// serialized here with the plan itself.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<std::complex<double>> rfft(std::span<const double> x, std::size_t n) {
  if (n == 0) throw std::invalid_argument("rfft: n == 0");
  std::lock_guard<std::mutex> lock(fftw_mutex());
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  std::memset(in, 0, sizeof(double) * n);
  std::memcpy(in, x.data(), sizeof(double) * std::min(x.size(), n));
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  fftw_execute(plan);
  std::vector<std::complex<double>> spectrum(n / 2 + 1);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    spectrum[k] = {out[k][0], out[k][1]};
  }
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);
  return spectrum;
}

std::vector<double> irfft(std::span<const std::complex<double>> spectrum, std::size_t n) {
  if (n == 0) throw std::invalid_argument("irfft: n == 0");
  if (spectrum.size() != n / 2 + 1) throw std::invalid_argument("irfft: bad spectrum size");
  std::lock_guard<std::mutex> lock(fftw_mutex());
  fftw_complex* in = fftw_alloc_complex(n / 2 + 1);
  double* out = fftw_alloc_real(n);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    in[k][0] = spectrum[k].real();
    in[k][1] = spectrum[k].imag();
  }
  fftw_plan plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  fftw_execute(plan);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = out[i] / static_cast<double>(n);
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);
  return x;
}

}  // namespace speechkit::dsp
