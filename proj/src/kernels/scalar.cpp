#include "synlat/kernels.hpp"

namespace synlat::kernels::scalar {

void matvec(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y) {
  for (std::size_t i = 0; i < rows; ++i) y[i] = cplx{};
  for (std::size_t j = 0; j < cols; ++j) {
    const cplx* col = a + j * rows;
    const double xr = x[j].real();
    const double xi = x[j].imag();
    for (std::size_t i = 0; i < rows; ++i) {
      const double ar = col[i].real();
      const double ai = col[i].imag();
      y[i] = cplx(y[i].real() + (ar * xr - ai * xi), y[i].imag() + (ai * xr + ar * xi));
    }
  }
}

void matvec_adjoint(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y) {
  for (std::size_t j = 0; j < cols; ++j) {
    const cplx* col = a + j * rows;
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      // conj(a) * x
      re += col[i].real() * x[i].real() + col[i].imag() * x[i].imag();
      im += col[i].real() * x[i].imag() - col[i].imag() * x[i].real();
    }
    y[j] = cplx(re, im);
  }
}

void hadamard(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = cplx(ar * br - ai * bi, ar * bi + ai * br);
  }
}

void abs2(const cplx* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
}

double norm_sq(const cplx* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

}  // namespace synlat::kernels::scalar
