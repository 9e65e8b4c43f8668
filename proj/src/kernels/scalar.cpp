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

#include <cmath>

#include "ddsim/kernels.hpp"

namespace ddsim::kernels {
namespace {

void ou_integrate(std::span<const OuStep> steps, const double* normals,
                  std::size_t width, double* value, double* cumulative) {
  for (std::size_t lane = 0; lane < width; ++lane) cumulative[lane] = 0.0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const OuStep& s = steps[k];
    const double* z = normals + k * width;
    const double* prev = cumulative + k * width;
    double* next = cumulative + (k + 1) * width;
    for (std::size_t lane = 0; lane < width; ++lane) {
      const double f0 = value[lane];
      const double f1 = std::fma(s.decay, f0, s.scale * z[lane]);
      next[lane] = std::fma(s.half_width, f0 + f1, prev[lane]);
      value[lane] = f1;
    }
  }
}

double lane_sum(const double* x, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int l = 0; l < 4; ++l) acc[l] += x[i + l];
  }
  double total = (acc[0] + acc[2]) + (acc[1] + acc[3]);
  for (; i < n; ++i) total += x[i];
  return total;
}

double squared_deviation(const double* x, std::size_t n, double center) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int l = 0; l < 4; ++l) {
      const double d = x[i + l] - center;
      acc[l] = std::fma(d, d, acc[l]);
    }
  }
  double total = (acc[0] + acc[2]) + (acc[1] + acc[3]);
  for (; i < n; ++i) {
    const double d = x[i] - center;
    total = std::fma(d, d, total);
  }
  return total;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (int l = 0; l < 4; ++l) {
      const double d = a[i + l] - b[i + l];
      acc[l] = std::fma(d, d, acc[l]);
    }
  }
  double total = (acc[0] + acc[2]) + (acc[1] + acc[3]);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total = std::fma(d, d, total);
  }
  return total;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar, &ou_integrate, &lane_sum,
                                 &squared_deviation, &squared_distance};
  return table;
}

}  // namespace ddsim::kernels
