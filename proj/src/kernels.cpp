#include "pdfstruct/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <mutex>

#include "pdfstruct/error.hpp"

#if defined(__x86_64__) || defined(__i386__)
#define PDFSTRUCT_X86 1
#include <immintrin.h>
#else
#define PDFSTRUCT_X86 0
#endif

#if defined(__aarch64__)
#define PDFSTRUCT_NEON 1
#include <arm_neon.h>
#else
#define PDFSTRUCT_NEON 0
#endif

namespace pdfstruct::kern {

namespace {

// ---------------------------------------------------------------------------
// Scalar reference
// ---------------------------------------------------------------------------

float dot_scalar(const float* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return static_cast<float>(acc);
}

void axpy_scalar(float a, const float* x, float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += a * x[i];
    }
}

void matvec_scalar(const float* w, std::size_t rows, std::size_t cols,
                   const float* x, const float* bias, float* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = bias ? static_cast<double>(bias[r]) : 0.0;
        const float* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
            acc += static_cast<double>(row[c]) * static_cast<double>(x[c]);
        }
        y[r] = static_cast<float>(acc);
    }
}

constexpr Ops kScalarOps{"scalar", dot_scalar, axpy_scalar, matvec_scalar};

// ---------------------------------------------------------------------------
// AVX2 + FMA
// ---------------------------------------------------------------------------

#if PDFSTRUCT_X86

__attribute__((target("avx2,fma"))) double
dot_avx2_acc(const float* a, const float* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 va = _mm256_loadu_ps(a + i);
        __m256 vb = _mm256_loadu_ps(b + i);
        // widen to double before accumulating
        __m256d alo = _mm256_cvtps_pd(_mm256_castps256_ps128(va));
        __m256d ahi = _mm256_cvtps_pd(_mm256_extractf128_ps(va, 1));
        __m256d blo = _mm256_cvtps_pd(_mm256_castps256_ps128(vb));
        __m256d bhi = _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1));
        acc0 = _mm256_fmadd_pd(alo, blo, acc0);
        acc1 = _mm256_fmadd_pd(ahi, bhi, acc1);
    }
    __m256d acc = _mm256_add_pd(acc0, acc1);
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    __m128d sum2 = _mm_add_pd(lo, hi);
    __m128d sum1 = _mm_add_sd(sum2, _mm_unpackhi_pd(sum2, sum2));
    double total = _mm_cvtsd_f64(sum1);
    for (; i < n; ++i) {
        total += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return total;
}

__attribute__((target("avx2,fma"))) float
dot_avx2(const float* a, const float* b, std::size_t n) {
    return static_cast<float>(dot_avx2_acc(a, b, n));
}

__attribute__((target("avx2,fma"))) void
axpy_avx2(float a, const float* x, float* y, std::size_t n) {
    __m256 va = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 vy = _mm256_loadu_ps(y + i);
        __m256 vx = _mm256_loadu_ps(x + i);
        _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, vx, vy));
    }
    for (; i < n; ++i) {
        y[i] += a * x[i];
    }
}

__attribute__((target("avx2,fma"))) void
matvec_avx2(const float* w, std::size_t rows, std::size_t cols,
            const float* x, const float* bias, float* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = bias ? static_cast<double>(bias[r]) : 0.0;
        acc += dot_avx2_acc(w + r * cols, x, cols);
        y[r] = static_cast<float>(acc);
    }
}

constexpr Ops kAvx2Ops{"avx2", dot_avx2, axpy_avx2, matvec_avx2};

bool host_has_avx2() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

#endif  // PDFSTRUCT_X86

// ---------------------------------------------------------------------------
// NEON (baseline on aarch64)
// ---------------------------------------------------------------------------

#if PDFSTRUCT_NEON

double dot_neon_acc(const float* a, const float* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float32x4_t va = vld1q_f32(a + i);
        float32x4_t vb = vld1q_f32(b + i);
        float64x2_t alo = vcvt_f64_f32(vget_low_f32(va));
        float64x2_t ahi = vcvt_f64_f32(vget_high_f32(va));
        float64x2_t blo = vcvt_f64_f32(vget_low_f32(vb));
        float64x2_t bhi = vcvt_f64_f32(vget_high_f32(vb));
        acc0 = vfmaq_f64(acc0, alo, blo);
        acc1 = vfmaq_f64(acc1, ahi, bhi);
    }
    double total = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) {
        total += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return total;
}

float dot_neon(const float* a, const float* b, std::size_t n) {
    return static_cast<float>(dot_neon_acc(a, b, n));
}

void axpy_neon(float a, const float* x, float* y, std::size_t n) {
    float32x4_t va = vdupq_n_f32(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float32x4_t vy = vld1q_f32(y + i);
        float32x4_t vx = vld1q_f32(x + i);
        vst1q_f32(y + i, vfmaq_f32(vy, va, vx));
    }
    for (; i < n; ++i) {
        y[i] += a * x[i];
    }
}

void matvec_neon(const float* w, std::size_t rows, std::size_t cols,
                 const float* x, const float* bias, float* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = bias ? static_cast<double>(bias[r]) : 0.0;
        acc += dot_neon_acc(w + r * cols, x, cols);
        y[r] = static_cast<float>(acc);
    }
}

constexpr Ops kNeonOps{"neon", dot_neon, axpy_neon, matvec_neon};

#endif  // PDFSTRUCT_NEON

// ---------------------------------------------------------------------------
// Selection
// ---------------------------------------------------------------------------

const Ops* detect_best() {
#if PDFSTRUCT_X86
    if (host_has_avx2()) {
        return &kAvx2Ops;
    }
#endif
#if PDFSTRUCT_NEON
    return &kNeonOps;
#endif
    return &kScalarOps;
}

const Ops* lookup(const std::string& name) {
    if (name == "auto") {
        return detect_best();
    }
    if (name == "scalar") {
        return &kScalarOps;
    }
#if PDFSTRUCT_X86
    if (name == "avx2" && host_has_avx2()) {
        return &kAvx2Ops;
    }
#endif
#if PDFSTRUCT_NEON
    if (name == "neon") {
        return &kNeonOps;
    }
#endif
    return nullptr;
}

std::atomic<const Ops*> g_active{nullptr};
std::once_flag g_init_flag;

void init_from_env() {
    const char* env = std::getenv("PDFSTRUCT_KERNELS");
    const Ops* ops = env ? lookup(env) : nullptr;
    g_active.store(ops ? ops : detect_best(), std::memory_order_relaxed);
}

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

const Ops& active() {
    std::call_once(g_init_flag, init_from_env);
    return *g_active.load(std::memory_order_relaxed);
}

void set_backend(const std::string& name) {
    std::call_once(g_init_flag, init_from_env);
    const Ops* ops = lookup(name);
    if (!ops) {
        throw ConfigError("kernel backend unavailable: " + name);
    }
    g_active.store(ops, std::memory_order_relaxed);
}

std::vector<std::string> available_backends() {
    std::vector<std::string> out{"scalar"};
#if PDFSTRUCT_X86
    if (host_has_avx2()) {
        out.emplace_back("avx2");
    }
#endif
#if PDFSTRUCT_NEON
    out.emplace_back("neon");
#endif
    return out;
}

}  // namespace pdfstruct::kern
