#include <cstdlib>
#include <cstring>

#include "dsim/simd/kernels.hpp"

namespace dsim::simd {

namespace {

const Ops& select() {
    const char* env = std::getenv("DSIM_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return scalar_ops();
    const Ops* avx2 = avx2_ops();
    if (env && std::strcmp(env, "avx2") == 0 && avx2) return *avx2;
#if defined(__x86_64__) || defined(__i386__)
    if (avx2 && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return *avx2;
#endif
    return scalar_ops();
}

}  // namespace

const Ops& ops() {
    static const Ops& active = select();
    return active;
}

}  // namespace dsim::simd
