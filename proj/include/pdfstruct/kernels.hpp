#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pdfstruct::kern {

// Function table for the float32 inner loops shared by the sequence layers.
// Reductions accumulate in double on every backend; axpy has no reduction
// and runs at the storage precision.
struct Ops {
    const char* name;
    float (*dot)(const float* a, const float* b, std::size_t n);
    // y += a * x
    void (*axpy)(float a, const float* x, float* y, std::size_t n);
    // y[r] = (bias ? bias[r] : 0) + sum_c w[r*cols+c] * x[c]
    void (*matvec)(const float* w, std::size_t rows, std::size_t cols,
                   const float* x, const float* bias, float* y);
};

const Ops& scalar_ops();

// Currently selected backend. Defaults to the best one the host supports;
// the PDFSTRUCT_KERNELS environment variable overrides at startup.
const Ops& active();

// Select a backend by name: "auto", "scalar", "avx2", "neon".
// Throws ConfigError for names this build/host cannot satisfy.
void set_backend(const std::string& name);

std::vector<std::string> available_backends();

// ---------------------------------------------------------------------------
// Reference kernels at arbitrary precision. The float specializations route
// through the runtime-selected table; the generic versions are the scalar
// oracles used by the double-precision gradient-check path and by the
// backend equivalence tests.
// ---------------------------------------------------------------------------

template <class T>
inline T dot(const T* a, const T* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    }
    return static_cast<T>(acc);
}

template <class T>
inline void axpy(T a, const T* x, T* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += a * x[i];
    }
}

template <class T>
inline void matvec(const T* w, std::size_t rows, std::size_t cols,
                   const T* x, const T* bias, T* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = bias ? static_cast<double>(bias[r]) : 0.0;
        const T* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) {
            acc += static_cast<double>(row[c]) * static_cast<double>(x[c]);
        }
        y[r] = static_cast<T>(acc);
    }
}

template <>
inline float dot<float>(const float* a, const float* b, std::size_t n) {
    return active().dot(a, b, n);
}

template <>
inline void axpy<float>(float a, const float* x, float* y, std::size_t n) {
    active().axpy(a, x, y, n);
}

template <>
inline void matvec<float>(const float* w, std::size_t rows, std::size_t cols,
                          const float* x, const float* bias, float* y) {
    active().matvec(w, rows, cols, x, bias, y);
}

// out[c] += sum_r w[r*cols+c] * dy[r]   (gradient through a matvec input)
template <class T>
inline void matvec_t_acc(const T* w, std::size_t rows, std::size_t cols,
                         const T* dy, T* out) {
    for (std::size_t r = 0; r < rows; ++r) {
        if (dy[r] != T(0)) {
            axpy<T>(dy[r], w + r * cols, out, cols);
        }
    }
}

// g[r*cols+c] += dy[r] * x[c]   (weight gradient of a matvec)
template <class T>
inline void outer_acc(const T* dy, std::size_t rows, const T* x,
                      std::size_t cols, T* g) {
    for (std::size_t r = 0; r < rows; ++r) {
        if (dy[r] != T(0)) {
            axpy<T>(dy[r], x, g + r * cols, cols);
        }
    }
}

}  // namespace pdfstruct::kern
