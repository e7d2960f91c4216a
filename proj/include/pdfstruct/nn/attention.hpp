#pragma once

#include <cmath>
#include <string>

#include "pdfstruct/nn/layers.hpp"

namespace pdfstruct::nn {

// All-to-all additive attention over encoder states. For every position i the
// alignment against position j is v . tanh(w1 s_i + w2 s_j); the softmaxed
// weights mix the states into a context that is concatenated with s_i, so the
// output width is twice the state width.
template <class T>
struct AdditiveSelfAttention {
    Param<T>* w1 = nullptr;  // A x S
    Param<T>* w2 = nullptr;  // A x S
    Param<T>* v = nullptr;   // 1 x A

    Matrix<T> s_;
    Matrix<T> p_;   // rows: w1 s_i
    Matrix<T> q_;   // rows: w2 s_j
    Matrix<T> u_;   // (T*T) x A, tanh(p_i + q_j)
    Matrix<T> a_;   // T x T attention weights

    void init(ParamStore<T>& store, const std::string& prefix, int state, int attn,
              std::mt19937_64& rng) {
        w1 = store.create(prefix + ".w1", attn, state);
        w2 = store.create(prefix + ".w2", attn, state);
        v = store.create(prefix + ".v", 1, attn);
        const double scale = 1.0 / std::sqrt(static_cast<double>(state));
        init_uniform(w1, rng, scale);
        init_uniform(w2, rng, scale);
        init_uniform(v, rng, 1.0 / std::sqrt(static_cast<double>(attn)));
    }

    int state_size() const { return w1->cols(); }
    int attn_size() const { return w1->rows(); }
    int out_size() const { return 2 * state_size(); }

    Matrix<T> forward(const Matrix<T>& s) {
        const int n = s.rows;
        const int S = state_size();
        const int A = attn_size();
        s_ = s;
        p_ = Matrix<T>(n, A);
        q_ = Matrix<T>(n, A);
        for (int i = 0; i < n; ++i) {
            kern::matvec<T>(w1->value.data.data(), static_cast<std::size_t>(A),
                            static_cast<std::size_t>(S), s_.row(i), nullptr, p_.row(i));
            kern::matvec<T>(w2->value.data.data(), static_cast<std::size_t>(A),
                            static_cast<std::size_t>(S), s_.row(i), nullptr, q_.row(i));
        }
        u_ = Matrix<T>(n * n, A);
        a_ = Matrix<T>(n, n);
        std::vector<T> e(static_cast<std::size_t>(n));
        Matrix<T> out(n, 2 * S);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                T* u = u_.row(i * n + j);
                const T* pi = p_.row(i);
                const T* qj = q_.row(j);
                for (int k = 0; k < A; ++k) {
                    u[k] = static_cast<T>(std::tanh(static_cast<double>(pi[k] + qj[k])));
                }
                e[static_cast<std::size_t>(j)] = kern::dot<T>(v->value.data.data(), u,
                                                              static_cast<std::size_t>(A));
            }
            softmax_row<T>(e.data(), n, a_.row(i));
            T* ctx = out.row(i);
            for (int j = 0; j < n; ++j) {
                kern::axpy<T>(a_.at(i, j), s_.row(j), ctx, static_cast<std::size_t>(S));
            }
            std::copy_n(s_.row(i), S, out.row(i) + S);
        }
        return out;
    }

    Matrix<T> backward(const Matrix<T>& dout) {
        const int n = s_.rows;
        const int S = state_size();
        const int A = attn_size();
        Matrix<T> ds(n, S);
        Matrix<T> dp(n, A);
        Matrix<T> dq(n, A);
        std::vector<T> da(static_cast<std::size_t>(n));
        std::vector<T> dz(static_cast<std::size_t>(A));
        for (int i = 0; i < n; ++i) {
            // direct pass-through half
            kern::axpy<T>(T(1), dout.row(i) + S, ds.row(i), static_cast<std::size_t>(S));
            const T* dctx = dout.row(i);
            double inner = 0.0;
            for (int j = 0; j < n; ++j) {
                da[static_cast<std::size_t>(j)] =
                    kern::dot<T>(dctx, s_.row(j), static_cast<std::size_t>(S));
                kern::axpy<T>(a_.at(i, j), dctx, ds.row(j), static_cast<std::size_t>(S));
                inner += static_cast<double>(a_.at(i, j)) *
                         static_cast<double>(da[static_cast<std::size_t>(j)]);
            }
            for (int j = 0; j < n; ++j) {
                const T de = static_cast<T>(static_cast<double>(a_.at(i, j)) *
                                            (static_cast<double>(da[static_cast<std::size_t>(j)]) - inner));
                if (de == T(0)) continue;
                const T* u = u_.row(i * n + j);
                kern::axpy<T>(de, u, v->grad.data.data(), static_cast<std::size_t>(A));
                const T* vv = v->value.data.data();
                for (int k = 0; k < A; ++k) {
                    dz[static_cast<std::size_t>(k)] = de * vv[k] * (T(1) - u[k] * u[k]);
                }
                kern::axpy<T>(T(1), dz.data(), dp.row(i), static_cast<std::size_t>(A));
                kern::axpy<T>(T(1), dz.data(), dq.row(j), static_cast<std::size_t>(A));
            }
        }
        for (int i = 0; i < n; ++i) {
            kern::outer_acc<T>(dp.row(i), static_cast<std::size_t>(A), s_.row(i),
                               static_cast<std::size_t>(S), w1->grad.data.data());
            kern::matvec_t_acc<T>(w1->value.data.data(), static_cast<std::size_t>(A),
                                  static_cast<std::size_t>(S), dp.row(i), ds.row(i));
            kern::outer_acc<T>(dq.row(i), static_cast<std::size_t>(A), s_.row(i),
                               static_cast<std::size_t>(S), w2->grad.data.data());
            kern::matvec_t_acc<T>(w2->value.data.data(), static_cast<std::size_t>(A),
                                  static_cast<std::size_t>(S), dq.row(i), ds.row(i));
        }
        return ds;
    }
};

}  // namespace pdfstruct::nn
