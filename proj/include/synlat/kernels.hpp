#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops used by the propagators and observables.
//
// Every kernel has a portable scalar reference in `synlat::kernels::scalar`
// and, on x86-64, an AVX2+FMA variant in `synlat::kernels::avx2`. The free
// functions in `synlat::kernels` dispatch to the best variant supported by the
// running CPU. Matrices are dense, column-major (Eigen's default layout).

namespace synlat::kernels {

using cplx = std::complex<double>;

enum class Isa { Scalar, Avx2 };

/// ISA used by the dispatching entry points.
Isa active_isa();
/// True when the CPU and the build both provide the AVX2 variants.
bool avx2_available();
/// Pin dispatch to a given ISA (tests, reproducibility runs). Requesting Avx2
/// on a machine without it throws std::runtime_error.
void force_isa(Isa isa);
/// Undo force_isa and return to CPU detection.
void reset_isa();
std::string_view isa_name(Isa isa);

/// y = A x, A is rows x cols column-major.
void matvec(std::span<const cplx> a, std::size_t rows, std::size_t cols,
            std::span<const cplx> x, std::span<cplx> y);
/// y = A^H x, A is rows x cols column-major (so y has cols entries).
void matvec_adjoint(std::span<const cplx> a, std::size_t rows, std::size_t cols,
                    std::span<const cplx> x, std::span<cplx> y);
/// out_i = a_i * b_i. `out` may alias `a`.
void hadamard(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out);
/// out_i = |x_i|^2
void abs2(std::span<const cplx> x, std::span<double> out);
/// sum_i |x_i|^2
double norm_sq(std::span<const cplx> x);

namespace scalar {
void matvec(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y);
void matvec_adjoint(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y);
void hadamard(const cplx* a, const cplx* b, cplx* out, std::size_t n);
void abs2(const cplx* x, double* out, std::size_t n);
double norm_sq(const cplx* x, std::size_t n);
}  // namespace scalar

namespace avx2 {
void matvec(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y);
void matvec_adjoint(const cplx* a, std::size_t rows, std::size_t cols, const cplx* x, cplx* y);
void hadamard(const cplx* a, const cplx* b, cplx* out, std::size_t n);
void abs2(const cplx* x, double* out, std::size_t n);
double norm_sq(const cplx* x, std::size_t n);
}  // namespace avx2

}  // namespace synlat::kernels
