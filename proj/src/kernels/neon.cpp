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

#include <arm_neon.h>

#include <cmath>

#include "variants.hpp"

// Two float64x2 registers stand in for the four scalar accumulators so the
// reduction order matches the scalar reference.

namespace ddsim::kernels::detail {
namespace {

inline double reduce(float64x2_t lo, float64x2_t hi) {
  return (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(hi, 0)) +
         (vgetq_lane_f64(lo, 1) + vgetq_lane_f64(hi, 1));
}

void ou_integrate(std::span<const OuStep> steps, const double* normals,
                  std::size_t width, double* value, double* cumulative) {
  for (std::size_t lane = 0; lane < width; ++lane) cumulative[lane] = 0.0;
  const std::size_t vec_width = width - width % 2;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const OuStep& s = steps[k];
    const double* z = normals + k * width;
    const double* prev = cumulative + k * width;
    double* next = cumulative + (k + 1) * width;
    const float64x2_t decay = vdupq_n_f64(s.decay);
    const float64x2_t scale = vdupq_n_f64(s.scale);
    const float64x2_t half = vdupq_n_f64(s.half_width);
    std::size_t lane = 0;
    for (; lane < vec_width; lane += 2) {
      const float64x2_t f0 = vld1q_f64(value + lane);
      const float64x2_t kick = vmulq_f64(scale, vld1q_f64(z + lane));
      const float64x2_t f1 = vfmaq_f64(kick, decay, f0);
      const float64x2_t c =
          vfmaq_f64(vld1q_f64(prev + lane), half, vaddq_f64(f0, f1));
      vst1q_f64(next + lane, c);
      vst1q_f64(value + lane, f1);
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
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vld1q_f64(x + i));
    hi = vaddq_f64(hi, vld1q_f64(x + i + 2));
  }
  double total = reduce(lo, hi);
  for (; i < n; ++i) total += x[i];
  return total;
}

double squared_deviation(const double* x, std::size_t n, double center) {
  const float64x2_t c = vdupq_n_f64(center);
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(x + i), c);
    const float64x2_t d1 = vsubq_f64(vld1q_f64(x + i + 2), c);
    lo = vfmaq_f64(lo, d0, d0);
    hi = vfmaq_f64(hi, d1, d1);
  }
  double total = reduce(lo, hi);
  for (; i < n; ++i) {
    const double d = x[i] - center;
    total = std::fma(d, d, total);
  }
  return total;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    const float64x2_t d1 =
        vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    lo = vfmaq_f64(lo, d0, d0);
    hi = vfmaq_f64(hi, d1, d1);
  }
  double total = reduce(lo, hi);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total = std::fma(d, d, total);
  }
  return total;
}

}  // namespace

const KernelTable& neon_kernels() {
  static const KernelTable table{Isa::Neon, &ou_integrate, &lane_sum,
                                 &squared_deviation, &squared_distance};
  return table;
}

}  // namespace ddsim::kernels::detail
