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

#pragma once

// Data-parallel inner loops of the Monte Carlo engine and the residual scans.
//
// Every kernel has a scalar reference implementation and, where the target
// supports it, an AVX2+FMA (x86-64) or NEON (aarch64) variant. The active
// table is chosen once at runtime from the CPU features; DDSIM_SIMD=scalar|
// avx2|neon forces a particular table.
//
// All variants produce bitwise-identical results: products are fused with
// std::fma in the scalar code exactly where the vector code uses an FMA
// instruction, and reductions use four interleaved accumulators combined as
// (acc0 + acc2) + (acc1 + acc3) followed by a sequential tail.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace ddsim::kernels {

/// One exact Ornstein-Uhlenbeck transition followed by a trapezoid update.
///
///   F[k+1]   = fma(decay, F[k], scale * z[k])
///   cum[k+1] = fma(half_width, F[k] + F[k+1], cum[k])
struct OuStep {
  double decay = 1.0;
  double scale = 0.0;
  double half_width = 0.0;
};

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;

  // Advances `width` independent lanes through all `steps`.
  //   normals:    [steps.size()][width] standard normal draws
  //   value:      [width] initial values in, final values out
  //   cumulative: [steps.size() + 1][width] running trapezoid integral,
  //               row 0 is set to zero
  void (*ou_integrate)(std::span<const OuStep> steps, const double* normals,
                       std::size_t width, double* value, double* cumulative);

  double (*lane_sum)(const double* x, std::size_t n);

  // sum_i (x[i] - center)^2
  double (*squared_deviation)(const double* x, std::size_t n, double center);

  // sum_i (a[i] - b[i])^2
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_table();

// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// Tables usable on this machine, scalar first.
std::vector<const KernelTable*> available_tables();

// The table selected for this process (honours DDSIM_SIMD).
const KernelTable& active();

}  // namespace ddsim::kernels
