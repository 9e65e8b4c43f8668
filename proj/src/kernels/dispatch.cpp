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

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "ddsim/kernels.hpp"
#include "variants.hpp"

namespace ddsim::kernels {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

const KernelTable* avx2_table() {
#if defined(DDSIM_HAVE_AVX2)
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &detail::avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_table() {
#if defined(DDSIM_HAVE_NEON)
  // Advanced SIMD is part of the aarch64 baseline.
  return &detail::neon_kernels();
#else
  return nullptr;
#endif
}

std::vector<const KernelTable*> available_tables() {
  std::vector<const KernelTable*> tables{&scalar_table()};
  if (const KernelTable* t = avx2_table()) tables.push_back(t);
  if (const KernelTable* t = neon_table()) tables.push_back(t);
  return tables;
}

namespace {

const KernelTable& select() {
  const char* env = std::getenv("DDSIM_SIMD");
  const std::string request = env != nullptr ? env : "auto";
  if (request == "scalar") return scalar_table();
  if (request == "avx2" || request == "neon") {
    const KernelTable* t = request == "avx2" ? avx2_table() : neon_table();
    if (t == nullptr) {
      throw std::runtime_error("DDSIM_SIMD=" + request +
                               " requested but not available on this machine");
    }
    return *t;
  }
  if (request != "auto") {
    throw std::runtime_error("DDSIM_SIMD must be one of auto, scalar, avx2, neon");
  }
  if (const KernelTable* t = avx2_table()) return *t;
  if (const KernelTable* t = neon_table()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace ddsim::kernels
