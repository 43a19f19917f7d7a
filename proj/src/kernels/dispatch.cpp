#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "synlat/kernels.hpp"

namespace synlat::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(SYNLAT_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  // SYNLAT_FORCE_SCALAR=1 pins the reference kernels for a whole process.
  if (const char* env = std::getenv("SYNLAT_FORCE_SCALAR"); env && std::strcmp(env, "0") != 0) {
    return Isa::Scalar;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

void check_sizes(std::size_t a, std::size_t rows, std::size_t cols, std::size_t x, std::size_t xneed,
                 std::size_t y, std::size_t yneed) {
  if (a != rows * cols || x != xneed || y != yneed) {
    throw std::invalid_argument("kernels: operand sizes do not match " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  }
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool avx2_available() { return cpu_has_avx2(); }

void force_isa(Isa isa) {
  if (isa == Isa::Avx2 && !cpu_has_avx2()) throw std::runtime_error("AVX2 kernels are not available on this CPU");
  current().store(isa, std::memory_order_relaxed);
}

void reset_isa() { current().store(detect(), std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void matvec(std::span<const cplx> a, std::size_t rows, std::size_t cols, std::span<const cplx> x,
            std::span<cplx> y) {
  check_sizes(a.size(), rows, cols, x.size(), cols, y.size(), rows);
  if (active_isa() == Isa::Avx2) {
    avx2::matvec(a.data(), rows, cols, x.data(), y.data());
  } else {
    scalar::matvec(a.data(), rows, cols, x.data(), y.data());
  }
}

void matvec_adjoint(std::span<const cplx> a, std::size_t rows, std::size_t cols, std::span<const cplx> x,
                    std::span<cplx> y) {
  check_sizes(a.size(), rows, cols, x.size(), rows, y.size(), cols);
  if (active_isa() == Isa::Avx2) {
    avx2::matvec_adjoint(a.data(), rows, cols, x.data(), y.data());
  } else {
    scalar::matvec_adjoint(a.data(), rows, cols, x.data(), y.data());
  }
}

void hadamard(std::span<const cplx> a, std::span<const cplx> b, std::span<cplx> out) {
  if (a.size() != b.size() || a.size() != out.size()) throw std::invalid_argument("hadamard: size mismatch");
  if (active_isa() == Isa::Avx2) {
    avx2::hadamard(a.data(), b.data(), out.data(), a.size());
  } else {
    scalar::hadamard(a.data(), b.data(), out.data(), a.size());
  }
}

void abs2(std::span<const cplx> x, std::span<double> out) {
  if (x.size() != out.size()) throw std::invalid_argument("abs2: size mismatch");
  if (active_isa() == Isa::Avx2) {
    avx2::abs2(x.data(), out.data(), x.size());
  } else {
    scalar::abs2(x.data(), out.data(), x.size());
  }
}

double norm_sq(std::span<const cplx> x) {
  return active_isa() == Isa::Avx2 ? avx2::norm_sq(x.data(), x.size()) : scalar::norm_sq(x.data(), x.size());
}

}  // namespace synlat::kernels
