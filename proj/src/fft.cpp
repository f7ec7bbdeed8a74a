#include "geosep/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace geosep {

FftBuffer::FftBuffer(std::size_t n) : n_(n) {
  auto* p = static_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * (n ? n : 1)));
  if (!p) throw std::bad_alloc();
  data_.reset(p);
  zero();
}

void FftBuffer::Free::operator()(std::complex<double>* p) const { fftw_free(p); }

void FftBuffer::zero() {
  if (n_) std::memset(static_cast<void*>(data_.get()), 0, sizeof(fftw_complex) * n_);
}

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Plans are cached per shape and direction. They are created on a scratch
// array with FFTW_ESTIMATE and executed with the new-array interface, which
// is valid because every FftBuffer has FFTW's own alignment.
fftw_plan plan_for(int n0, int n1, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto key = std::make_tuple(n0, n1, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  FftBuffer scratch(static_cast<std::size_t>(n0) * n1);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan plan = fftw_plan_dft_2d(n0, n1, p, p, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                    FFTW_ESTIMATE);
  if (!plan) throw std::runtime_error("fftw plan creation failed");
  cache.emplace(key, plan);
  return plan;
}

}  // namespace

void fft2d(FftBuffer& buf, int n0, int n1, int sign) {
  if (buf.size() < static_cast<std::size_t>(n0) * n1)
    throw std::invalid_argument("fft2d: buffer smaller than shape");
  fftw_plan plan = plan_for(n0, n1, sign);
  auto* p = reinterpret_cast<fftw_complex*>(buf.data());
  fftw_execute_dft(plan, p, p);
}

int fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int f : {2, 3, 5, 7})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

}  // namespace geosep
