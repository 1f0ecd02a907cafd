#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"

namespace impent::kernels {

namespace {

const KernelTable kScalar{Isa::Scalar, "scalar", &scalar::dot, &scalar::axpy, &scalar::scal,
                          &scalar::spmv};

#if defined(IMPENT_HAVE_AVX2)
const KernelTable kAvx2{Isa::Avx2, "avx2", &avx2::dot, &avx2::axpy, &avx2::scal, &avx2::spmv};
#endif

const KernelTable* select_default() {
  const char* env = std::getenv("IMPENT_KERNELS");
  if (env != nullptr && std::string(env) == "scalar") return &kScalar;
  if (const KernelTable* t = avx2_table()) return t;
  return &kScalar;
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> table{select_default()};
  return table;
}

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(IMPENT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* avx2_table() {
#if defined(IMPENT_HAVE_AVX2)
  if (cpu_supports(Isa::Avx2)) return &kAvx2;
#endif
  return nullptr;
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void force(Isa isa) {
  if (isa == Isa::Scalar) {
    slot().store(&kScalar, std::memory_order_release);
  } else if (const KernelTable* t = avx2_table()) {
    slot().store(t, std::memory_order_release);
  }
}

std::string_view isa_name(Isa isa) { return isa == Isa::Scalar ? "scalar" : "avx2"; }

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  return active().dot(x.data(), y.data(), x.size());
}

double norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  active().axpy(a, x.data(), y.data(), x.size());
}

void scal(double a, std::span<double> x) { active().scal(a, x.data(), x.size()); }

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y) {
  assert(y.size() == a.rows);
  (void)x;
  active().spmv(a, x.data(), y.data());
}

}  // namespace impent::kernels
