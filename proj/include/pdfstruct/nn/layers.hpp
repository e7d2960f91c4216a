#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pdfstruct/kernels.hpp"
#include "pdfstruct/nn/matrix.hpp"
#include "pdfstruct/nn/param_store.hpp"
#include "pdfstruct/nn/rng.hpp"

namespace pdfstruct::nn {

template <class T>
inline void init_uniform(Param<T>* p, std::mt19937_64& rng, double scale) {
    for (auto& v : p->value.data) {
        v = static_cast<T>(uniform_range(rng, -scale, scale));
    }
}

template <class T>
inline T sigmoid(T x) {
    return static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(x))));
}

// ---------------------------------------------------------------------------
// Dense layer applied per sequence position.
// ---------------------------------------------------------------------------

template <class T>
struct Linear {
    Param<T>* w = nullptr;  // out x in
    Param<T>* b = nullptr;  // 1 x out (optional)
    Matrix<T> x_;

    void init(ParamStore<T>& store, const std::string& prefix, int in, int out,
              std::mt19937_64& rng, bool bias = true) {
        w = store.create(prefix + ".w", out, in);
        init_uniform(w, rng, 1.0 / std::sqrt(static_cast<double>(in)));
        if (bias) {
            b = store.create(prefix + ".b", 1, out);
        }
    }

    int in_size() const { return w->cols(); }
    int out_size() const { return w->rows(); }

    Matrix<T> forward(const Matrix<T>& x) {
        if (x.cols != w->cols()) {
            throw ShapeError("linear " + w->name + ": input width " + std::to_string(x.cols) +
                             " != " + std::to_string(w->cols()));
        }
        x_ = x;
        Matrix<T> y(x.rows, w->rows());
        for (int t = 0; t < x.rows; ++t) {
            kern::matvec<T>(w->value.data.data(), static_cast<std::size_t>(w->rows()),
                            static_cast<std::size_t>(w->cols()), x.row(t),
                            b ? b->value.data.data() : nullptr, y.row(t));
        }
        return y;
    }

    Matrix<T> backward(const Matrix<T>& dy) {
        Matrix<T> dx(x_.rows, w->cols());
        const auto rows = static_cast<std::size_t>(w->rows());
        const auto cols = static_cast<std::size_t>(w->cols());
        for (int t = 0; t < x_.rows; ++t) {
            kern::outer_acc<T>(dy.row(t), rows, x_.row(t), cols, w->grad.data.data());
            kern::matvec_t_acc<T>(w->value.data.data(), rows, cols, dy.row(t), dx.row(t));
            if (b) {
                kern::axpy<T>(T(1), dy.row(t), b->grad.data.data(), rows);
            }
        }
        return dx;
    }
};

// ---------------------------------------------------------------------------
// Embedding lookup. The table is row-sparse: only looked-up rows receive
// gradient, and the layer records them for the optimizer.
// ---------------------------------------------------------------------------

template <class T>
struct Embedding {
    Param<T>* table = nullptr;  // vocab x dim
    std::vector<std::uint64_t> ids_;

    void init(ParamStore<T>& store, const std::string& prefix, std::int64_t vocab, int dim,
              std::mt19937_64& rng) {
        table = store.create(prefix + ".table", static_cast<int>(vocab), dim, /*row_sparse=*/true);
        init_uniform(table, rng, 1.0 / std::sqrt(static_cast<double>(dim)));
    }

    Matrix<T> forward(const std::vector<std::uint64_t>& ids) {
        ids_ = ids;
        Matrix<T> y(static_cast<int>(ids.size()), table->cols());
        for (std::size_t t = 0; t < ids.size(); ++t) {
            if (ids[t] >= static_cast<std::uint64_t>(table->rows())) {
                throw ShapeError("embedding index " + std::to_string(ids[t]) +
                                 " out of range for table " + table->name);
            }
            std::copy_n(table->value.row(static_cast<int>(ids[t])), table->cols(),
                        y.row(static_cast<int>(t)));
        }
        return y;
    }

    void backward(const Matrix<T>& dy) {
        for (std::size_t t = 0; t < ids_.size(); ++t) {
            const int row = static_cast<int>(ids_[t]);
            kern::axpy<T>(T(1), dy.row(static_cast<int>(t)), table->grad.row(row),
                          static_cast<std::size_t>(table->cols()));
            table->mark_touched(row);
        }
    }
};

// ---------------------------------------------------------------------------
// Mean negative log-likelihood over the unmasked positions.
// ---------------------------------------------------------------------------

template <class T>
struct LossResult {
    double loss = 0.0;
    Matrix<T> grad;  // d loss / d logits
};

template <class T>
inline void softmax_row(const T* logits, int n, T* out) {
    double mx = -1e300;
    for (int i = 0; i < n; ++i) mx = std::max(mx, static_cast<double>(logits[i]));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += std::exp(static_cast<double>(logits[i]) - mx);
    for (int i = 0; i < n; ++i) {
        out[i] = static_cast<T>(std::exp(static_cast<double>(logits[i]) - mx) / sum);
    }
}

template <class T>
inline LossResult<T> softmax_cross_entropy(const Matrix<T>& logits, const std::vector<int>& targets,
                                           const std::vector<char>& mask) {
    if (static_cast<int>(targets.size()) != logits.rows ||
        static_cast<int>(mask.size()) != logits.rows) {
        throw ShapeError("cross entropy: logits/targets/mask lengths disagree");
    }
    int count = 0;
    for (char m : mask) count += m ? 1 : 0;
    if (count == 0) {
        throw DataError("cross entropy undefined: every position is masked");
    }

    LossResult<T> res;
    res.grad = Matrix<T>(logits.rows, logits.cols);
    double total = 0.0;
    for (int t = 0; t < logits.rows; ++t) {
        if (!mask[static_cast<std::size_t>(t)]) continue;
        const int target = targets[static_cast<std::size_t>(t)];
        if (target < 0 || target >= logits.cols) {
            throw DataError("cross entropy target out of range: " + std::to_string(target));
        }
        const T* row = logits.row(t);
        double mx = -1e300;
        for (int i = 0; i < logits.cols; ++i) mx = std::max(mx, static_cast<double>(row[i]));
        double sum = 0.0;
        for (int i = 0; i < logits.cols; ++i) sum += std::exp(static_cast<double>(row[i]) - mx);
        const double lse = mx + std::log(sum);
        total += lse - static_cast<double>(row[target]);
        T* g = res.grad.row(t);
        for (int i = 0; i < logits.cols; ++i) {
            double p = std::exp(static_cast<double>(row[i]) - lse);
            g[i] = static_cast<T>(p / count);
        }
        g[target] -= static_cast<T>(1.0 / count);
    }
    res.loss = total / count;
    return res;
}

}  // namespace pdfstruct::nn
