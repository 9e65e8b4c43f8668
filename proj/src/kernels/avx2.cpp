// Copyright 2026 The ddsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <immintrin.h>

#include <cmath>

#include "variants.hpp"

namespace ddsim::kernels::detail {
namespace {

inline double reduce(__m256d acc) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

void ou_integrate(std::span<const OuStep> steps, const double* normals,
                  std::size_t width, double* value, double* cumulative) {
  for (std::size_t lane = 0; lane < width; ++lane) cumulative[lane] = 0.0;
  const std::size_t vec_width = width - width % 4;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const OuStep& s = steps[k];
    const double* z = normals + k * width;
    const double* prev = cumulative + k * width;
    double* next = cumulative + (k + 1) * width;
    const __m256d decay = _mm256_set1_pd(s.decay);
    const __m256d scale = _mm256_set1_pd(s.scale);
    const __m256d half = _mm256_set1_pd(s.half_width);
    std::size_t lane = 0;
    for (; lane < vec_width; lane += 4) {
      const __m256d f0 = _mm256_loadu_pd(value + lane);
      const __m256d kick = _mm256_mul_pd(scale, _mm256_loadu_pd(z + lane));
      const __m256d f1 = _mm256_fmadd_pd(decay, f0, kick);
      const __m256d c = _mm256_fmadd_pd(half, _mm256_add_pd(f0, f1),
                                        _mm256_loadu_pd(prev + lane));
      _mm256_storeu_pd(next + lane, c);
      _mm256_storeu_pd(value + lane, f1);
    }
    for (; lane < width; ++lane) {
      const double f0 = value[lane];
      const double f1 = std::fma(s.decay, f0, s.scale * z[lane]);
      next[lane] = std::fma(s.half_width, f0 + f1, prev[lane]);
      value[lane] = f1;
    }
  }
}

double lane_sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double total = reduce(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

double squared_deviation(const double* x, std::size_t n, double center) {
  const __m256d c = _mm256_set1_pd(center);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), c);
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double total = reduce(acc);
  for (; i < n; ++i) {
    const double d = x[i] - center;
    total = std::fma(d, d, total);
  }
  return total;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double total = reduce(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total = std::fma(d, d, total);
  }
  return total;
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table{Isa::Avx2, &ou_integrate, &lane_sum,
                                 &squared_deviation, &squared_distance};
  return table;
}

}  // namespace ddsim::kernels::detail
