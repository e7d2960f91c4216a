#pragma once

#include <cmath>
#include <string>

#include "pdfstruct/nn/layers.hpp"

namespace pdfstruct::nn {

// The recurrent cells keep their gate matrices fused: for the GRU the row
// blocks of w/u/b are (update, reset, candidate); for the LSTM they are
// (input, forget, candidate, output). The cell structs hold parameters plus
// one step of math; the sequence layers below own the per-step caches.

template <class T>
struct GruCell {
    Param<T>* w = nullptr;  // 3H x I
    Param<T>* u = nullptr;  // 3H x H
    Param<T>* b = nullptr;  // 1 x 3H
    int input = 0;
    int hidden = 0;

    static constexpr int kGates = 3;

    void init(ParamStore<T>& store, const std::string& prefix, int in, int h,
              std::mt19937_64& rng) {
        input = in;
        hidden = h;
        w = store.create(prefix + ".w", 3 * h, in);
        u = store.create(prefix + ".u", 3 * h, h);
        b = store.create(prefix + ".b", 1, 3 * h);
        init_uniform(w, rng, 1.0 / std::sqrt(static_cast<double>(in)));
        init_uniform(u, rng, 1.0 / std::sqrt(static_cast<double>(h)));
    }

    struct Cache {
        const T* x = nullptr;  // points into the layer's stored input
        std::vector<T> h_prev;
        std::vector<T> z, r, n, un;  // un = candidate block of u*h_prev
    };

    // h = z*h_prev + (1-z)*tanh(Wn x + r*(Un h_prev) + bn)
    void step(const T* x, const T* h_prev, T* h_out, Cache& c) const {
        const int H = hidden;
        std::vector<T> pre(static_cast<std::size_t>(3 * H));
        kern::matvec<T>(w->value.data.data(), static_cast<std::size_t>(3 * H),
                        static_cast<std::size_t>(input), x, b->value.data.data(), pre.data());
        std::vector<T> uh(static_cast<std::size_t>(3 * H));
        kern::matvec<T>(u->value.data.data(), static_cast<std::size_t>(3 * H),
                        static_cast<std::size_t>(H), h_prev, nullptr, uh.data());
        c.x = x;
        c.h_prev.assign(h_prev, h_prev + H);
        c.z.resize(static_cast<std::size_t>(H));
        c.r.resize(static_cast<std::size_t>(H));
        c.n.resize(static_cast<std::size_t>(H));
        c.un.assign(uh.begin() + 2 * H, uh.begin() + 3 * H);
        for (int i = 0; i < H; ++i) {
            c.z[i] = sigmoid<T>(pre[i] + uh[i]);
            c.r[i] = sigmoid<T>(pre[H + i] + uh[H + i]);
            c.n[i] = static_cast<T>(std::tanh(static_cast<double>(pre[2 * H + i] + c.r[i] * c.un[i])));
            h_out[i] = c.z[i] * h_prev[i] + (T(1) - c.z[i]) * c.n[i];
        }
    }

    // Accumulates parameter grads; adds input grad into dx and h_prev grad
    // into dh_prev (both must be pre-sized; dh_prev may carry future grad).
    void step_backward(const Cache& c, const T* dh, T* dx, T* dh_prev) const {
        const int H = hidden;
        std::vector<T> dpre(static_cast<std::size_t>(3 * H));  // grads wrt the pre-activations
        std::vector<T> duh(static_cast<std::size_t>(3 * H));
        for (int i = 0; i < H; ++i) {
            const T dz = dh[i] * (c.h_prev[i] - c.n[i]);
            const T dn = dh[i] * (T(1) - c.z[i]);
            dh_prev[i] += dh[i] * c.z[i];
            const T dpre_n = dn * (T(1) - c.n[i] * c.n[i]);
            const T dr = dpre_n * c.un[i];
            const T dpre_z = dz * c.z[i] * (T(1) - c.z[i]);
            const T dpre_r = dr * c.r[i] * (T(1) - c.r[i]);
            dpre[i] = dpre_z;
            dpre[H + i] = dpre_r;
            dpre[2 * H + i] = dpre_n;
            duh[i] = dpre_z;
            duh[H + i] = dpre_r;
            duh[2 * H + i] = dpre_n * c.r[i];
        }
        kern::outer_acc<T>(dpre.data(), static_cast<std::size_t>(3 * H), c.x,
                           static_cast<std::size_t>(input), w->grad.data.data());
        kern::axpy<T>(T(1), dpre.data(), b->grad.data.data(), static_cast<std::size_t>(3 * H));
        kern::outer_acc<T>(duh.data(), static_cast<std::size_t>(3 * H), c.h_prev.data(),
                           static_cast<std::size_t>(H), u->grad.data.data());
        kern::matvec_t_acc<T>(w->value.data.data(), static_cast<std::size_t>(3 * H),
                              static_cast<std::size_t>(input), dpre.data(), dx);
        kern::matvec_t_acc<T>(u->value.data.data(), static_cast<std::size_t>(3 * H),
                              static_cast<std::size_t>(H), duh.data(), dh_prev);
    }
};

template <class T>
struct LstmCell {
    Param<T>* w = nullptr;  // 4H x I
    Param<T>* u = nullptr;  // 4H x H
    Param<T>* b = nullptr;  // 1 x 4H
    int input = 0;
    int hidden = 0;

    static constexpr int kGates = 4;

    void init(ParamStore<T>& store, const std::string& prefix, int in, int h,
              std::mt19937_64& rng) {
        input = in;
        hidden = h;
        w = store.create(prefix + ".w", 4 * h, in);
        u = store.create(prefix + ".u", 4 * h, h);
        b = store.create(prefix + ".b", 1, 4 * h);
        init_uniform(w, rng, 1.0 / std::sqrt(static_cast<double>(in)));
        init_uniform(u, rng, 1.0 / std::sqrt(static_cast<double>(h)));
        for (int i = 0; i < h; ++i) {
            b->value.data[static_cast<std::size_t>(h + i)] = T(1);  // forget gate bias
        }
    }

    struct Cache {
        const T* x = nullptr;  // points into the layer's stored input
        std::vector<T> h_prev;
        std::vector<T> c_prev, i, f, g, o, c, tc;  // tc = tanh(c)
    };

    void step(const T* x, const T* h_prev, const T* c_prev, T* h_out, T* c_out, Cache& c) const {
        const int H = hidden;
        std::vector<T> pre(static_cast<std::size_t>(4 * H));
        kern::matvec<T>(w->value.data.data(), static_cast<std::size_t>(4 * H),
                        static_cast<std::size_t>(input), x, b->value.data.data(), pre.data());
        std::vector<T> uh(static_cast<std::size_t>(4 * H));
        kern::matvec<T>(u->value.data.data(), static_cast<std::size_t>(4 * H),
                        static_cast<std::size_t>(H), h_prev, nullptr, uh.data());
        c.x = x;
        c.h_prev.assign(h_prev, h_prev + H);
        c.c_prev.assign(c_prev, c_prev + H);
        c.i.resize(static_cast<std::size_t>(H));
        c.f.resize(static_cast<std::size_t>(H));
        c.g.resize(static_cast<std::size_t>(H));
        c.o.resize(static_cast<std::size_t>(H));
        c.c.resize(static_cast<std::size_t>(H));
        c.tc.resize(static_cast<std::size_t>(H));
        for (int k = 0; k < H; ++k) {
            c.i[k] = sigmoid<T>(pre[k] + uh[k]);
            c.f[k] = sigmoid<T>(pre[H + k] + uh[H + k]);
            c.g[k] = static_cast<T>(std::tanh(static_cast<double>(pre[2 * H + k] + uh[2 * H + k])));
            c.o[k] = sigmoid<T>(pre[3 * H + k] + uh[3 * H + k]);
            c.c[k] = c.f[k] * c.c_prev[k] + c.i[k] * c.g[k];
            c.tc[k] = static_cast<T>(std::tanh(static_cast<double>(c.c[k])));
            h_out[k] = c.o[k] * c.tc[k];
            c_out[k] = c.c[k];
        }
    }

    void step_backward(const Cache& c, const T* dh, T* dc, T* dx, T* dh_prev) const {
        const int H = hidden;
        std::vector<T> dpre(static_cast<std::size_t>(4 * H));
        for (int k = 0; k < H; ++k) {
            const T do_ = dh[k] * c.tc[k];
            T dck = dc[k] + dh[k] * c.o[k] * (T(1) - c.tc[k] * c.tc[k]);
            const T df = dck * c.c_prev[k];
            const T di = dck * c.g[k];
            const T dg = dck * c.i[k];
            dc[k] = dck * c.f[k];  // becomes dc_prev for the next-older step
            dpre[k] = di * c.i[k] * (T(1) - c.i[k]);
            dpre[H + k] = df * c.f[k] * (T(1) - c.f[k]);
            dpre[2 * H + k] = dg * (T(1) - c.g[k] * c.g[k]);
            dpre[3 * H + k] = do_ * c.o[k] * (T(1) - c.o[k]);
        }
        kern::outer_acc<T>(dpre.data(), static_cast<std::size_t>(4 * H), c.x,
                           static_cast<std::size_t>(input), w->grad.data.data());
        kern::axpy<T>(T(1), dpre.data(), b->grad.data.data(), static_cast<std::size_t>(4 * H));
        kern::outer_acc<T>(dpre.data(), static_cast<std::size_t>(4 * H), c.h_prev.data(),
                           static_cast<std::size_t>(H), u->grad.data.data());
        kern::matvec_t_acc<T>(w->value.data.data(), static_cast<std::size_t>(4 * H),
                              static_cast<std::size_t>(input), dpre.data(), dx);
        kern::matvec_t_acc<T>(u->value.data.data(), static_cast<std::size_t>(4 * H),
                              static_cast<std::size_t>(H), dpre.data(), dh_prev);
    }
};

// ---------------------------------------------------------------------------
// One recurrent layer over a sequence, optionally processing in reverse
// reading order. Output row t always corresponds to input row t.
// ---------------------------------------------------------------------------

template <class T, class Cell>
struct RecurrentLayer {
    Cell cell;
    bool reverse = false;

    Matrix<T> x_;
    Matrix<T> h_;
    std::vector<typename Cell::Cache> caches_;
    Matrix<T> c_states_;  // LSTM only

    void init(ParamStore<T>& store, const std::string& prefix, int in, int hidden,
              std::mt19937_64& rng, bool rev) {
        reverse = rev;
        cell.init(store, prefix, in, hidden, rng);
    }

    int out_size() const { return cell.hidden; }

    Matrix<T> forward(const Matrix<T>& x) {
        const int steps = x.rows;
        const int H = cell.hidden;
        x_ = x;
        h_ = Matrix<T>(steps, H);
        caches_.assign(static_cast<std::size_t>(steps), {});
        std::vector<T> h_prev(static_cast<std::size_t>(H), T(0));
        if constexpr (Cell::kGates == 4) {
            c_states_ = Matrix<T>(steps, H);
            std::vector<T> c_prev(static_cast<std::size_t>(H), T(0));
            for (int s = 0; s < steps; ++s) {
                const int t = reverse ? steps - 1 - s : s;
                cell.step(x_.row(t), h_prev.data(), c_prev.data(), h_.row(t), c_states_.row(t),
                          caches_[static_cast<std::size_t>(t)]);
                std::copy_n(h_.row(t), H, h_prev.data());
                std::copy_n(c_states_.row(t), H, c_prev.data());
            }
        } else {
            for (int s = 0; s < steps; ++s) {
                const int t = reverse ? steps - 1 - s : s;
                cell.step(x_.row(t), h_prev.data(), h_.row(t),
                          caches_[static_cast<std::size_t>(t)]);
                std::copy_n(h_.row(t), H, h_prev.data());
            }
        }
        return h_;
    }

    Matrix<T> backward(const Matrix<T>& dh_out) {
        const int steps = x_.rows;
        const int H = cell.hidden;
        Matrix<T> dx(steps, x_.cols);
        std::vector<T> dh_carry(static_cast<std::size_t>(H), T(0));
        std::vector<T> dc(static_cast<std::size_t>(H), T(0));
        std::vector<T> dh(static_cast<std::size_t>(H));
        std::vector<T> dh_prev(static_cast<std::size_t>(H));
        for (int s = steps - 1; s >= 0; --s) {
            const int t = reverse ? steps - 1 - s : s;
            for (int k = 0; k < H; ++k) {
                dh[static_cast<std::size_t>(k)] = dh_out.at(t, k) + dh_carry[static_cast<std::size_t>(k)];
            }
            std::fill(dh_prev.begin(), dh_prev.end(), T(0));
            if constexpr (Cell::kGates == 4) {
                cell.step_backward(caches_[static_cast<std::size_t>(t)], dh.data(), dc.data(),
                                   dx.row(t), dh_prev.data());
            } else {
                cell.step_backward(caches_[static_cast<std::size_t>(t)], dh.data(), dx.row(t),
                                   dh_prev.data());
            }
            dh_carry = dh_prev;
        }
        return dx;
    }

    // Hidden state of the last step in processing order (for decoder init).
    std::vector<T> final_state() const {
        const int t = reverse ? 0 : h_.rows - 1;
        std::vector<T> out(static_cast<std::size_t>(cell.hidden), T(0));
        if (h_.rows > 0) {
            std::copy_n(h_.row(t), cell.hidden, out.data());
        }
        return out;
    }
};

// Forward and reverse passes concatenated per position (width 2H).
template <class T, class Cell>
struct BidirectionalLayer {
    RecurrentLayer<T, Cell> fwd;
    RecurrentLayer<T, Cell> bwd;

    void init(ParamStore<T>& store, const std::string& prefix, int in, int hidden,
              std::mt19937_64& rng) {
        fwd.init(store, prefix + ".fwd", in, hidden, rng, false);
        bwd.init(store, prefix + ".bwd", in, hidden, rng, true);
    }

    int out_size() const { return 2 * fwd.cell.hidden; }

    Matrix<T> forward(const Matrix<T>& x) {
        Matrix<T> hf = fwd.forward(x);
        Matrix<T> hb = bwd.forward(x);
        const int H = fwd.cell.hidden;
        Matrix<T> y(x.rows, 2 * H);
        for (int t = 0; t < x.rows; ++t) {
            std::copy_n(hf.row(t), H, y.row(t));
            std::copy_n(hb.row(t), H, y.row(t) + H);
        }
        return y;
    }

    Matrix<T> backward(const Matrix<T>& dy) {
        const int H = fwd.cell.hidden;
        Matrix<T> df(dy.rows, H);
        Matrix<T> db(dy.rows, H);
        for (int t = 0; t < dy.rows; ++t) {
            std::copy_n(dy.row(t), H, df.row(t));
            std::copy_n(dy.row(t) + H, H, db.row(t));
        }
        Matrix<T> dx = fwd.backward(df);
        Matrix<T> dxb = bwd.backward(db);
        for (std::size_t i = 0; i < dx.data.size(); ++i) {
            dx.data[i] += dxb.data[i];
        }
        return dx;
    }

    std::vector<T> final_state() const {
        std::vector<T> f = fwd.final_state();
        std::vector<T> b = bwd.final_state();
        f.insert(f.end(), b.begin(), b.end());
        return f;
    }
};

}  // namespace pdfstruct::nn
