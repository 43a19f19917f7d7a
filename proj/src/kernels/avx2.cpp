#include "synlat/kernels.hpp"

#if defined(SYNLAT_HAVE_AVX2_TU)

#include <immintrin.h>

// Two std::complex<double> per __m256d: [re0, im0, re1, im1].

namespace synlat::kernels::avx2 {
namespace {

inline __m256d load2(const cplx* p) { return _mm256_loadu_pd(reinterpret_cast<const double*>(p)); }
inline void store2(cplx* p, __m256d v) { _mm256_storeu_pd(reinterpret_cast<double*>(p), v); }
inline __m256d swap_reim(__m256d v) { return _mm256_permute_pd(v, 0x5); }

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

}  // namespace

void matvec(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y) {
  std::size_t i = 0;
  // four rows per pass: two accumulator pairs
  for (; i + 4 <= rows; i += 4) {
    __m256d re0 = _mm256_setzero_pd(), im0 = _mm256_setzero_pd();
    __m256d re1 = _mm256_setzero_pd(), im1 = _mm256_setzero_pd();
    for (std::size_t j = 0; j < cols; ++j) {
      const cplx* col = a + j * rows + i;
      const __m256d xr = _mm256_broadcast_sd(reinterpret_cast<const double*>(x + j));
      const __m256d xi = _mm256_broadcast_sd(reinterpret_cast<const double*>(x + j) + 1);
      const __m256d a0 = load2(col);
      const __m256d a1 = load2(col + 2);
      re0 = _mm256_fmadd_pd(a0, xr, re0);
      im0 = _mm256_fmadd_pd(swap_reim(a0), xi, im0);
      re1 = _mm256_fmadd_pd(a1, xr, re1);
      im1 = _mm256_fmadd_pd(swap_reim(a1), xi, im1);
    }
    store2(y + i, _mm256_addsub_pd(re0, im0));
    store2(y + i + 2, _mm256_addsub_pd(re1, im1));
  }
  for (; i + 2 <= rows; i += 2) {
    __m256d re0 = _mm256_setzero_pd(), im0 = _mm256_setzero_pd();
    for (std::size_t j = 0; j < cols; ++j) {
      const __m256d xr = _mm256_broadcast_sd(reinterpret_cast<const double*>(x + j));
      const __m256d xi = _mm256_broadcast_sd(reinterpret_cast<const double*>(x + j) + 1);
      const __m256d a0 = load2(a + j * rows + i);
      re0 = _mm256_fmadd_pd(a0, xr, re0);
      im0 = _mm256_fmadd_pd(swap_reim(a0), xi, im0);
    }
    store2(y + i, _mm256_addsub_pd(re0, im0));
  }
  for (; i < rows; ++i) {
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      const cplx& v = a[j * rows + i];
      re += v.real() * x[j].real() - v.imag() * x[j].imag();
      im += v.imag() * x[j].real() + v.real() * x[j].imag();
    }
    y[i] = cplx(re, im);
  }
}

void matvec_adjoint(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y) {
  for (std::size_t j = 0; j < cols; ++j) {
    const cplx* col = a + j * rows;
    __m256d same = _mm256_setzero_pd();   // [ar*xr, ai*xi]
    __m256d cross = _mm256_setzero_pd();  // [ar*xi, ai*xr]
    std::size_t i = 0;
    for (; i + 2 <= rows; i += 2) {
      const __m256d av = load2(col + i);
      const __m256d xv = load2(x + i);
      same = _mm256_fmadd_pd(av, xv, same);
      cross = _mm256_fmadd_pd(av, swap_reim(xv), cross);
    }
    // re = sum(ar xr + ai xi); im = sum(ar xi - ai xr)
    alignas(32) double s[4];
    alignas(32) double c[4];
    _mm256_store_pd(s, same);
    _mm256_store_pd(c, cross);
    double re = (s[0] + s[2]) + (s[1] + s[3]);
    double im = (c[0] + c[2]) - (c[1] + c[3]);
    for (; i < rows; ++i) {
      re += col[i].real() * x[i].real() + col[i].imag() * x[i].imag();
      im += col[i].real() * x[i].imag() - col[i].imag() * x[i].real();
    }
    y[j] = cplx(re, im);
  }
}

void hadamard(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d av = load2(a + i);
    const __m256d bv = load2(b + i);
    const __m256d br = _mm256_movedup_pd(bv);
    const __m256d bi = _mm256_permute_pd(bv, 0xF);
    store2(out + i, _mm256_fmaddsub_pd(av, br, _mm256_mul_pd(swap_reim(av), bi)));
  }
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    out[i] = cplx(ar * br - ai * bi, ar * bi + ai * br);
  }
}

void abs2(const cplx* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v0 = load2(x + i);
    const __m256d v1 = load2(x + i + 2);
    // lane-wise hadd gives [|x0|^2, |x2|^2, |x1|^2, |x3|^2]
    const __m256d h = _mm256_hadd_pd(_mm256_mul_pd(v0, v0), _mm256_mul_pd(v1, v1));
    _mm256_storeu_pd(out + i, _mm256_permute4x64_pd(h, 0b11011000));
  }
  for (; i < n; ++i) out[i] = x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
}

double norm_sq(const cplx* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = load2(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
  return s;
}

}  // namespace synlat::kernels::avx2

#else

#include <stdexcept>

namespace synlat::kernels::avx2 {

[[noreturn]] static void unavailable() { throw std::runtime_error("AVX2 kernels not built for this target"); }

void matvec(const cplx*, std::size_t, std::size_t, const cplx*, cplx*) { unavailable(); }
void matvec_adjoint(const cplx*, std::size_t, std::size_t, const cplx*, cplx*) { unavailable(); }
void hadamard(const cplx*, const cplx*, cplx*, std::size_t) { unavailable(); }
void abs2(const cplx*, double*, std::size_t) { unavailable(); }
double norm_sq(const cplx*, std::size_t) { unavailable(); }

}  // namespace synlat::kernels::avx2

#endif
