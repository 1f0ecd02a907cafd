#pragma once
// Dense and sparse double-precision kernels used by the Lanczos solver.
//
// Every kernel has a scalar reference implementation. ISA-specific variants
// (currently AVX2+FMA) are compiled into separate translation units and
// selected once at runtime from the CPU feature flags. The environment
// variable IMPENT_KERNELS=scalar|avx2 overrides the choice.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace impent::kernels {

enum class Isa { Scalar, Avx2 };

/// Compressed-sparse-row view. Column indices are 32-bit so the AVX2 path can
/// use hardware gathers.
struct CsrView {
  std::size_t rows = 0;
  const std::uint64_t* row_ptr = nullptr;
  const std::uint32_t* col = nullptr;
  const double* val = nullptr;
};

struct KernelTable {
  Isa isa;
  const char* name;
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*scal)(double a, double* x, std::size_t n);
  // y = A x
  void (*spmv)(const CsrView& a, const double* x, double* y);
};

const KernelTable& scalar_table();
/// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_table();

bool cpu_supports(Isa isa);
/// The table chosen at first use (feature detection + IMPENT_KERNELS override).
const KernelTable& active();
/// Test hook: replaces the active table for the rest of the process.
void force(Isa isa);
std::string_view isa_name(Isa isa);

// Span wrappers over the active table.
double dot(std::span<const double> x, std::span<const double> y);
double norm(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scal(double a, std::span<double> x);
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y);

}  // namespace impent::kernels
