// Copyright 2026 The DeCK Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Vector kernels over vocabulary-length arrays. Every kernel has a scalar
// reference implementation; on x86-64 an AVX2 variant is selected at runtime
// when the CPU supports it. Reductions use a fixed lane-combination order so
// results are reproducible run to run on the same machine.

namespace deck::simd {

// Scalar reference kernels. Always available; the dispatched entry points
// below must agree with these (equivalence-tested).
namespace scalar {

double reduce_max(std::span<const double> x);
double reduce_sum(std::span<const double> x);

// out[i] = a*x[i] + b*y[i]
void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out);

// out[i] = s * x[i]
void scale(std::span<const double> x, double s, std::span<double> out);

// out[i] = exp(x[i] - shift); returns sum of outputs
double exp_shifted(std::span<const double> x, double shift,
                   std::span<double> out);

} // namespace scalar

// Dispatched entry points.
double reduce_max(std::span<const double> x);
double reduce_sum(std::span<const double> x);
void axpby(double a, std::span<const double> x, double b,
           std::span<const double> y, std::span<double> out);
void scale(std::span<const double> x, double s, std::span<double> out);
double exp_shifted(std::span<const double> x, double shift,
                   std::span<double> out);

// "avx2" or "scalar"
std::string_view active_backend();

} // namespace deck::simd
