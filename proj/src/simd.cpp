// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#include "deck/simd.hpp"

#include <cmath>

namespace deck::simd {

namespace scalar {

double reduce_max(std::span<const double> x) {
  double m = -INFINITY;
  for (double v : x) {
    if (v > m) m = v;
  }
  return m;
}

double reduce_sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
}

void scale(std::span<const double> x, double s, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = s * x[i];
}

double exp_shifted(std::span<const double> x, double shift,
                   std::span<double> out) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - shift);
    sum += out[i];
  }
  return sum;
}

} // namespace scalar

#if defined(__x86_64__)
namespace avx2 {
double reduce_max(std::span<const double> x);
double reduce_sum(std::span<const double> x);
void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out);
void scale(std::span<const double> x, double s, std::span<double> out);
double exp_shifted(std::span<const double> x, double shift,
                   std::span<double> out);
} // namespace avx2

static bool have_avx2() {
  static const bool ok = __builtin_cpu_supports("avx2");
  return ok;
}
#endif

double reduce_max(std::span<const double> x) {
#if defined(__x86_64__)
  if (have_avx2()) return avx2::reduce_max(x);
#endif
  return scalar::reduce_max(x);
}

double reduce_sum(std::span<const double> x) {
#if defined(__x86_64__)
  if (have_avx2()) return avx2::reduce_sum(x);
#endif
  return scalar::reduce_sum(x);
}

void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out) {
#if defined(__x86_64__)
  if (have_avx2()) return avx2::axpby(a, x, b, y, out);
#endif
  scalar::axpby(a, x, b, y, out);
}

void scale(std::span<const double> x, double s, std::span<double> out) {
#if defined(__x86_64__)
  if (have_avx2()) return avx2::scale(x, s, out);
#endif
  scalar::scale(x, s, out);
}

double exp_shifted(std::span<const double> x, double shift,
                   std::span<double> out) {
#if defined(__x86_64__)
  if (have_avx2()) return avx2::exp_shifted(x, shift, out);
#endif
  return scalar::exp_shifted(x, shift, out);
}

std::string_view active_backend() {
#if defined(__x86_64__)
  if (have_avx2()) return "avx2";
#endif
  return "scalar";
}

} // namespace deck::simd
