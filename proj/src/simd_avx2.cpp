// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

// AVX2 variants of the vector kernels. Compiled with -mavx2 in its own TU;
// only reached after a runtime cpuid check in simd.cpp.

#if defined(__x86_64__)

#include <cmath>
#include <immintrin.h>
#include <span>

namespace deck::simd::avx2 {

double reduce_max(std::span<const double> x) {
  std::size_t n = x.size();
  std::size_t i = 0;
  double m = -INFINITY;
  if (n >= 4) {
    __m256d vm = _mm256_loadu_pd(x.data());
    for (i = 4; i + 4 <= n; i += 4)
      vm = _mm256_max_pd(vm, _mm256_loadu_pd(x.data() + i));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, vm);
    m = lanes[0];
    for (int k = 1; k < 4; ++k)
      if (lanes[k] > m) m = lanes[k];
  }
  for (; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

double reduce_sum(std::span<const double> x) {
  std::size_t n = x.size();
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x.data() + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
  for (; i < n; ++i) s += x[i];
  return s;
}

void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out) {
  std::size_t n = x.size();
  std::size_t i = 0;
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  for (; i + 4 <= n; i += 4) {
    // mul+add rather than fmadd: keeps rounding identical to the scalar
    // reference, which the equivalence tests assert exactly
    __m256d vx = _mm256_mul_pd(va, _mm256_loadu_pd(x.data() + i));
    __m256d vy = _mm256_mul_pd(vb, _mm256_loadu_pd(y.data() + i));
    _mm256_storeu_pd(out.data() + i, _mm256_add_pd(vx, vy));
  }
  for (; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void scale(std::span<const double> x, double s, std::span<double> out) {
  std::size_t n = x.size();
  std::size_t i = 0;
  const __m256d vs = _mm256_set1_pd(s);
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out.data() + i,
                     _mm256_mul_pd(vs, _mm256_loadu_pd(x.data() + i)));
  for (; i < n; ++i) out[i] = s * x[i];
}

double exp_shifted(std::span<const double> x, double shift,
                   std::span<double> out) {
  // exp itself stays scalar (identical values to the reference); the shift
  // and the sum accumulation are vectorized.
  std::size_t n = x.size();
  std::size_t i = 0;
  const __m256d vshift = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  alignas(32) double tmp[4];
  for (; i + 4 <= n; i += 4) {
    _mm256_store_pd(tmp, _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), vshift));
    for (int k = 0; k < 4; ++k) tmp[k] = std::exp(tmp[k]);
    __m256d e = _mm256_load_pd(tmp);
    _mm256_storeu_pd(out.data() + i, e);
    acc = _mm256_add_pd(acc, e);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double sum = (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
  for (; i < n; ++i) {
    out[i] = std::exp(x[i] - shift);
    sum += out[i];
  }
  return sum;
}

} // namespace deck::simd::avx2

#endif // __x86_64__
