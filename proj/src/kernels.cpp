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

#include "metapop/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace metapop::kern {

#if defined(METAPOP_HAVE_AVX2)
const Kernels& avx2_kernels_impl();
#endif

const Kernels* avx2_kernels_or_null() {
#if defined(METAPOP_HAVE_AVX2)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return &avx2_kernels_impl();
    }
#endif
    return nullptr;
}

namespace {

const Kernels& select() {
    if (const char* force = std::getenv("METAPOP_KERNELS")) {
        if (std::strcmp(force, "scalar") == 0) return scalar_kernels();
        if (std::strcmp(force, "avx2") == 0) {
            if (const Kernels* k = avx2_kernels_or_null()) return *k;
        }
        // Unknown or unavailable request: fall through to auto selection.
    }
    if (const Kernels* k = avx2_kernels_or_null()) return *k;
    return scalar_kernels();
}

}  // namespace

const Kernels& active_kernels() {
    static const Kernels& selected = select();
    return selected;
}

}  // namespace metapop::kern
