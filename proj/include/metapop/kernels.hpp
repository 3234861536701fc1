// Copyright 2026-present the metapop project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>

namespace metapop::kern {

/// Dense double-precision primitives behind the network math. Every entry has
/// a scalar reference implementation; on x86 an AVX2+FMA variant is selected
/// at runtime when the CPU supports it. The two variants agree to rounding
/// (SIMD reductions reassociate), which the kernel tests pin down.
struct Kernels {
    const char* name;

    // sum_i x[i]*y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    // y[i] += a*x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // y[i] = max(x[i], 0)
    void (*relu)(const double* x, double* y, std::size_t n);
    // g[i] = pre[i] > 0 ? g[i] : 0   (subgradient at 0 is 0)
    void (*relu_mask)(const double* pre, double* g, std::size_t n);
    // Bias-corrected Adam update. c1 = 1-beta1^t, c2 = 1-beta2^t.
    void (*adam)(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double c1, double c2);
};

const Kernels& scalar_kernels();

// Null when the build target or the running CPU lacks AVX2+FMA.
const Kernels* avx2_kernels_or_null();

// Selected once per process: METAPOP_KERNELS=scalar|avx2 overrides, otherwise
// the widest supported variant wins.
const Kernels& active_kernels();

}  // namespace metapop::kern
