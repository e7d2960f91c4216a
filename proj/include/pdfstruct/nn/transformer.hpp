#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pdfstruct/nn/layers.hpp"

namespace pdfstruct::nn {

// x[pos, 2i]   += sin(pos / 10000^(2i/d))
// x[pos, 2i+1] += cos(pos / 10000^(2i/d))
template <class T>
inline void add_positional_encoding(Matrix<T>& x) {
    const int d = x.cols;
    for (int pos = 0; pos < x.rows; ++pos) {
        T* row = x.row(pos);
        for (int i = 0; 2 * i < d; ++i) {
            const double freq = std::pow(10000.0, -2.0 * i / static_cast<double>(d));
            row[2 * i] += static_cast<T>(std::sin(pos * freq));
            if (2 * i + 1 < d) {
                row[2 * i + 1] += static_cast<T>(std::cos(pos * freq));
            }
        }
    }
}

template <class T>
inline Matrix<T> positional_encoding(int steps, int d) {
    Matrix<T> pe(steps, d);
    add_positional_encoding(pe);
    return pe;
}

template <class T>
struct LayerNorm {
    static constexpr double kEps = 1e-5;
    Param<T>* gain = nullptr;  // 1 x d
    Param<T>* bias = nullptr;  // 1 x d
    Matrix<T> xhat_;
    std::vector<double> inv_std_;

    void init(ParamStore<T>& store, const std::string& prefix, int d) {
        gain = store.create(prefix + ".gain", 1, d);
        bias = store.create(prefix + ".bias", 1, d);
        gain->value.fill(T(1));
    }

    Matrix<T> forward(const Matrix<T>& x) {
        const int d = x.cols;
        xhat_ = Matrix<T>(x.rows, d);
        inv_std_.assign(static_cast<std::size_t>(x.rows), 0.0);
        Matrix<T> y(x.rows, d);
        for (int t = 0; t < x.rows; ++t) {
            const T* row = x.row(t);
            double mu = 0.0;
            for (int i = 0; i < d; ++i) mu += static_cast<double>(row[i]);
            mu /= d;
            double var = 0.0;
            for (int i = 0; i < d; ++i) {
                const double dev = static_cast<double>(row[i]) - mu;
                var += dev * dev;
            }
            var /= d;
            const double inv = 1.0 / std::sqrt(var + kEps);
            inv_std_[static_cast<std::size_t>(t)] = inv;
            for (int i = 0; i < d; ++i) {
                const double xh = (static_cast<double>(row[i]) - mu) * inv;
                xhat_.at(t, i) = static_cast<T>(xh);
                y.at(t, i) = static_cast<T>(xh * static_cast<double>(gain->value.data[static_cast<std::size_t>(i)]) +
                                            static_cast<double>(bias->value.data[static_cast<std::size_t>(i)]));
            }
        }
        return y;
    }

    Matrix<T> backward(const Matrix<T>& dy) {
        const int d = dy.cols;
        Matrix<T> dx(dy.rows, d);
        for (int t = 0; t < dy.rows; ++t) {
            double m1 = 0.0;
            double m2 = 0.0;
            for (int i = 0; i < d; ++i) {
                const double dxh = static_cast<double>(dy.at(t, i)) *
                                   static_cast<double>(gain->value.data[static_cast<std::size_t>(i)]);
                m1 += dxh;
                m2 += dxh * static_cast<double>(xhat_.at(t, i));
                gain->grad.data[static_cast<std::size_t>(i)] +=
                    dy.at(t, i) * xhat_.at(t, i);
                bias->grad.data[static_cast<std::size_t>(i)] += dy.at(t, i);
            }
            m1 /= d;
            m2 /= d;
            const double inv = inv_std_[static_cast<std::size_t>(t)];
            for (int i = 0; i < d; ++i) {
                const double dxh = static_cast<double>(dy.at(t, i)) *
                                   static_cast<double>(gain->value.data[static_cast<std::size_t>(i)]);
                dx.at(t, i) = static_cast<T>(inv * (dxh - m1 - static_cast<double>(xhat_.at(t, i)) * m2));
            }
        }
        return dx;
    }
};

// Scaled-dot-product self-attention with h heads over width d. Projections
// are ordinary dense layers; only the per-head mixing lives here.
template <class T>
struct MultiHeadSelfAttention {
    Linear<T> q_lin, k_lin, v_lin, o_lin;
    int heads = 1;
    int dim = 0;

    Matrix<T> q_, k_, v_;
    std::vector<Matrix<T>> attn_;  // one T x T matrix per head

    void init(ParamStore<T>& store, const std::string& prefix, int d, int h,
              std::mt19937_64& rng) {
        if (h < 1 || d % h != 0) {
            throw ConfigError("attention width " + std::to_string(d) +
                              " not divisible by head count " + std::to_string(h));
        }
        heads = h;
        dim = d;
        q_lin.init(store, prefix + ".q", d, d, rng);
        k_lin.init(store, prefix + ".k", d, d, rng);
        v_lin.init(store, prefix + ".v", d, d, rng);
        o_lin.init(store, prefix + ".o", d, d, rng);
    }

    Matrix<T> forward(const Matrix<T>& x) {
        const int n = x.rows;
        const int dh = dim / heads;
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
        q_ = q_lin.forward(x);
        k_ = k_lin.forward(x);
        v_ = v_lin.forward(x);
        attn_.assign(static_cast<std::size_t>(heads), Matrix<T>(n, n));
        Matrix<T> mixed(n, dim);
        std::vector<T> e(static_cast<std::size_t>(n));
        for (int h = 0; h < heads; ++h) {
            const int off = h * dh;
            auto& a = attn_[static_cast<std::size_t>(h)];
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    e[static_cast<std::size_t>(j)] = static_cast<T>(
                        scale * static_cast<double>(kern::dot<T>(q_.row(i) + off, k_.row(j) + off,
                                                                 static_cast<std::size_t>(dh))));
                }
                softmax_row<T>(e.data(), n, a.row(i));
                T* out = mixed.row(i) + off;
                for (int j = 0; j < n; ++j) {
                    kern::axpy<T>(a.at(i, j), v_.row(j) + off, out, static_cast<std::size_t>(dh));
                }
            }
        }
        return o_lin.forward(mixed);
    }

    Matrix<T> backward(const Matrix<T>& dy) {
        const int n = dy.rows;
        const int dh = dim / heads;
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
        Matrix<T> dmixed = o_lin.backward(dy);
        Matrix<T> dq(n, dim);
        Matrix<T> dk(n, dim);
        Matrix<T> dv(n, dim);
        std::vector<T> da(static_cast<std::size_t>(n));
        for (int h = 0; h < heads; ++h) {
            const int off = h * dh;
            const auto& a = attn_[static_cast<std::size_t>(h)];
            for (int i = 0; i < n; ++i) {
                const T* dout = dmixed.row(i) + off;
                double inner = 0.0;
                for (int j = 0; j < n; ++j) {
                    da[static_cast<std::size_t>(j)] =
                        kern::dot<T>(dout, v_.row(j) + off, static_cast<std::size_t>(dh));
                    kern::axpy<T>(a.at(i, j), dout, dv.row(j) + off, static_cast<std::size_t>(dh));
                    inner += static_cast<double>(a.at(i, j)) *
                             static_cast<double>(da[static_cast<std::size_t>(j)]);
                }
                for (int j = 0; j < n; ++j) {
                    const double ds = static_cast<double>(a.at(i, j)) *
                                      (static_cast<double>(da[static_cast<std::size_t>(j)]) - inner) * scale;
                    kern::axpy<T>(static_cast<T>(ds), k_.row(j) + off, dq.row(i) + off,
                                  static_cast<std::size_t>(dh));
                    kern::axpy<T>(static_cast<T>(ds), q_.row(i) + off, dk.row(j) + off,
                                  static_cast<std::size_t>(dh));
                }
            }
        }
        Matrix<T> dx = q_lin.backward(dq);
        Matrix<T> dxk = k_lin.backward(dk);
        Matrix<T> dxv = v_lin.backward(dv);
        for (std::size_t i = 0; i < dx.data.size(); ++i) {
            dx.data[i] += dxk.data[i] + dxv.data[i];
        }
        return dx;
    }
};

// Post-norm encoder block: attention + residual + norm, feed-forward (relu)
// + residual + norm.
template <class T>
struct TransformerBlock {
    MultiHeadSelfAttention<T> mha;
    LayerNorm<T> ln1, ln2;
    Linear<T> ff1, ff2;
    Matrix<T> relu_pre_;

    void init(ParamStore<T>& store, const std::string& prefix, int d, int h,
              std::mt19937_64& rng) {
        mha.init(store, prefix + ".mha", d, h, rng);
        ln1.init(store, prefix + ".ln1", d);
        ln2.init(store, prefix + ".ln2", d);
        ff1.init(store, prefix + ".ff1", d, 4 * d, rng);
        ff2.init(store, prefix + ".ff2", 4 * d, d, rng);
    }

    Matrix<T> forward(const Matrix<T>& x) {
        Matrix<T> a = mha.forward(x);
        for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += x.data[i];
        Matrix<T> x1 = ln1.forward(a);
        relu_pre_ = ff1.forward(x1);
        Matrix<T> hidden = relu_pre_;
        for (auto& v : hidden.data) v = std::max(v, T(0));
        Matrix<T> f = ff2.forward(hidden);
        for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] += x1.data[i];
        return ln2.forward(f);
    }

    Matrix<T> backward(const Matrix<T>& dy) {
        Matrix<T> dsum2 = ln2.backward(dy);
        Matrix<T> dhidden = ff2.backward(dsum2);
        for (std::size_t i = 0; i < dhidden.data.size(); ++i) {
            if (relu_pre_.data[i] <= T(0)) dhidden.data[i] = T(0);
        }
        Matrix<T> dx1 = ff1.backward(dhidden);
        for (std::size_t i = 0; i < dx1.data.size(); ++i) dx1.data[i] += dsum2.data[i];
        Matrix<T> dsum1 = ln1.backward(dx1);
        Matrix<T> dx = mha.backward(dsum1);
        for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += dsum1.data[i];
        return dx;
    }
};

template <class T>
struct TransformerEncoder {
    std::vector<TransformerBlock<T>> blocks;
    int dim = 0;

    void init(ParamStore<T>& store, const std::string& prefix, int d, int layers, int h,
              std::mt19937_64& rng) {
        dim = d;
        blocks.resize(static_cast<std::size_t>(layers));
        for (int l = 0; l < layers; ++l) {
            blocks[static_cast<std::size_t>(l)].init(store, prefix + ".block" + std::to_string(l),
                                                     d, h, rng);
        }
    }

    Matrix<T> forward(const Matrix<T>& x) {
        Matrix<T> y = x;
        add_positional_encoding(y);
        for (auto& b : blocks) {
            y = b.forward(y);
        }
        return y;
    }

    Matrix<T> backward(const Matrix<T>& dy) {
        Matrix<T> d = dy;
        for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
            d = it->backward(d);
        }
        return d;
    }
};

}  // namespace pdfstruct::nn
