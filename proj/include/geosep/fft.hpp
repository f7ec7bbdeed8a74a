#pragma once

#include <complex>
#include <cstddef>
#include <memory>

namespace geosep {

// FFTW-allocated complex buffer; alignment is fixed so plans, and therefore
// results, do not depend on where the allocator placed the data.
class FftBuffer {
 public:
  FftBuffer() = default;
  explicit FftBuffer(std::size_t n);
  std::complex<double>* data() { return data_.get(); }
  const std::complex<double>* data() const { return data_.get(); }
  std::size_t size() const { return n_; }
  std::complex<double>& operator[](std::size_t i) { return data_.get()[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return data_.get()[i]; }
  void zero();

 private:
  struct Free {
    void operator()(std::complex<double>* p) const;
  };
  std::unique_ptr<std::complex<double>[], Free> data_;
  std::size_t n_ = 0;
};

// Unnormalized in-place 2-D DFT of an n0 x n1 row-major array (n1 fastest).
// sign = -1: sum x e^{-2 pi i k.n / N};  sign = +1: sum x e^{+2 pi i k.n / N}.
void fft2d(FftBuffer& buf, int n0, int n1, int sign);

// Smallest m >= n of the form 2^a 3^b 5^c 7^d.
int fft_size(int n);

}  // namespace geosep
