#pragma once
// Per-ISA entry points. Only dispatch.cpp and the tests should need these.

#include "impent/kernels.hpp"

namespace impent::kernels::scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
void spmv(const CsrView& a, const double* x, double* y);
}  // namespace impent::kernels::scalar

#if defined(IMPENT_HAVE_AVX2)
namespace impent::kernels::avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scal(double a, double* x, std::size_t n);
void spmv(const CsrView& a, const double* x, double* y);
}  // namespace impent::kernels::avx2
#endif
