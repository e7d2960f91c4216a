#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "pdfstruct/nn/layers.hpp"
#include "pdfstruct/nn/recurrent.hpp"

namespace pdfstruct::nn {

// Recurrent decoding layer. Each step consumes the embedding of the previous
// label (ground truth under teacher forcing, its own argmax at inference) and,
// when attention is enabled, an additive-attention context over the encoder
// states queried by the previous hidden state. The initial hidden state is a
// tanh projection of the final encoder state.
template <class T, class Cell>
struct Decoder {
    Cell cell;
    Embedding<T> label_emb;  // (labels+1) x emb, last row is the start token
    Linear<T> init_proj;     // enc_width -> hidden
    bool use_attention = false;
    Param<T>* aw1 = nullptr;  // A x hidden (query)
    Param<T>* aw2 = nullptr;  // A x enc_width (keys)
    Param<T>* av = nullptr;   // 1 x A

    int enc_width = 0;
    int hidden = 0;
    int emb_dim = 0;
    int n_labels = 0;

    Matrix<T> enc_;
    Matrix<T> q_;  // per-position key projections
    Matrix<T> hs_;  // hidden states, row 0 = h0
    Matrix<T> cs_;
    Matrix<T> x_;   // per-step cell inputs
    std::vector<typename Cell::Cache> caches_;
    std::vector<std::vector<T>> a_steps_;
    std::vector<Matrix<T>> u_steps_;
    std::vector<std::uint64_t> fed_ids_;
    int steps_ = 0;

    void init(ParamStore<T>& store, const std::string& prefix, int enc_w, int d, int labels,
              bool attention, std::mt19937_64& rng) {
        enc_width = enc_w;
        hidden = d;
        emb_dim = d;
        n_labels = labels;
        use_attention = attention;
        label_emb.init(store, prefix + ".emb", labels + 1, emb_dim, rng);
        init_proj.init(store, prefix + ".init", enc_w, d, rng);
        if (attention) {
            aw1 = store.create(prefix + ".attn.w1", d, d);
            aw2 = store.create(prefix + ".attn.w2", d, enc_w);
            av = store.create(prefix + ".attn.v", 1, d);
            init_uniform(aw1, rng, 1.0 / std::sqrt(static_cast<double>(d)));
            init_uniform(aw2, rng, 1.0 / std::sqrt(static_cast<double>(enc_w)));
            init_uniform(av, rng, 1.0 / std::sqrt(static_cast<double>(d)));
        }
        cell.init(store, prefix + ".cell", emb_dim + (attention ? enc_w : 0), d, rng);
    }

    int start_token() const { return n_labels; }

    void begin(const Matrix<T>& enc) {
        enc_ = enc;
        const int n = enc.rows;
        Matrix<T> last(1, enc_width);
        if (n > 0) {
            std::copy_n(enc.row(n - 1), enc_width, last.row(0));
        }
        Matrix<T> pre = init_proj.forward(last);
        hs_ = Matrix<T>(n + 1, hidden);
        cs_ = Matrix<T>(n + 1, hidden);
        for (int k = 0; k < hidden; ++k) {
            hs_.at(0, k) = static_cast<T>(std::tanh(static_cast<double>(pre.at(0, k))));
        }
        if (use_attention) {
            q_ = Matrix<T>(n, hidden);
            for (int j = 0; j < n; ++j) {
                kern::matvec<T>(aw2->value.data.data(), static_cast<std::size_t>(hidden),
                                static_cast<std::size_t>(enc_width), enc_.row(j), nullptr,
                                q_.row(j));
            }
        }
        x_ = Matrix<T>(n, emb_dim + (use_attention ? enc_width : 0));
        caches_.assign(static_cast<std::size_t>(n), {});
        a_steps_.assign(static_cast<std::size_t>(n), {});
        u_steps_.assign(static_cast<std::size_t>(n), {});
        fed_ids_.clear();
        steps_ = 0;
    }

    // Advances one step; returns a pointer to the new hidden state.
    const T* step(int prev_label) {
        const int t = steps_;
        const int n = enc_.rows;
        fed_ids_.push_back(static_cast<std::uint64_t>(prev_label));
        T* xt = x_.row(t);
        std::copy_n(label_emb.table->value.row(prev_label), emb_dim, xt);
        if (use_attention) {
            const T* h_query = hs_.row(t);
            std::vector<T> ph(static_cast<std::size_t>(hidden));
            kern::matvec<T>(aw1->value.data.data(), static_cast<std::size_t>(hidden),
                            static_cast<std::size_t>(hidden), h_query, nullptr, ph.data());
            auto& u = u_steps_[static_cast<std::size_t>(t)];
            u = Matrix<T>(n, hidden);
            std::vector<T> e(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j) {
                T* uj = u.row(j);
                const T* qj = q_.row(j);
                for (int k = 0; k < hidden; ++k) {
                    uj[k] = static_cast<T>(std::tanh(static_cast<double>(ph[static_cast<std::size_t>(k)] + qj[k])));
                }
                e[static_cast<std::size_t>(j)] =
                    kern::dot<T>(av->value.data.data(), uj, static_cast<std::size_t>(hidden));
            }
            auto& a = a_steps_[static_cast<std::size_t>(t)];
            a.resize(static_cast<std::size_t>(n));
            softmax_row<T>(e.data(), n, a.data());
            T* ctx = xt + emb_dim;
            std::fill_n(ctx, enc_width, T(0));
            for (int j = 0; j < n; ++j) {
                kern::axpy<T>(a[static_cast<std::size_t>(j)], enc_.row(j), ctx,
                              static_cast<std::size_t>(enc_width));
            }
        }
        if constexpr (Cell::kGates == 4) {
            cell.step(xt, hs_.row(t), cs_.row(t), hs_.row(t + 1), cs_.row(t + 1),
                      caches_[static_cast<std::size_t>(t)]);
        } else {
            cell.step(xt, hs_.row(t), hs_.row(t + 1), caches_[static_cast<std::size_t>(t)]);
        }
        ++steps_;
        return hs_.row(t + 1);
    }

    // Teacher-forced pass over the whole sequence; prev_ids[t] is the label
    // fed at step t (start token first).
    Matrix<T> forward_teacher(const Matrix<T>& enc, const std::vector<int>& prev_ids) {
        begin(enc);
        for (int t = 0; t < enc.rows; ++t) {
            step(prev_ids[static_cast<std::size_t>(t)]);
        }
        Matrix<T> out(enc.rows, hidden);
        for (int t = 0; t < enc.rows; ++t) {
            std::copy_n(hs_.row(t + 1), hidden, out.row(t));
        }
        return out;
    }

    Matrix<T> backward(const Matrix<T>& dh_out) {
        const int n = enc_.rows;
        Matrix<T> denc(n, enc_width);
        Matrix<T> dq_acc;
        if (use_attention) {
            dq_acc = Matrix<T>(n, hidden);
        }
        std::vector<T> dh_carry(static_cast<std::size_t>(hidden), T(0));
        std::vector<T> dc(static_cast<std::size_t>(hidden), T(0));
        std::vector<T> dh(static_cast<std::size_t>(hidden));
        std::vector<T> dh_prev(static_cast<std::size_t>(hidden));
        Matrix<T> dx(1, x_.cols);
        std::vector<T> da(static_cast<std::size_t>(n));
        std::vector<T> dz(static_cast<std::size_t>(hidden));
        std::vector<T> dph(static_cast<std::size_t>(hidden));
        for (int t = n - 1; t >= 0; --t) {
            for (int k = 0; k < hidden; ++k) {
                dh[static_cast<std::size_t>(k)] =
                    dh_out.at(t, k) + dh_carry[static_cast<std::size_t>(k)];
            }
            std::fill(dh_prev.begin(), dh_prev.end(), T(0));
            dx.fill(T(0));
            if constexpr (Cell::kGates == 4) {
                cell.step_backward(caches_[static_cast<std::size_t>(t)], dh.data(), dc.data(),
                                   dx.row(0), dh_prev.data());
            } else {
                cell.step_backward(caches_[static_cast<std::size_t>(t)], dh.data(), dx.row(0),
                                   dh_prev.data());
            }
            // embedding slice
            const int row = static_cast<int>(fed_ids_[static_cast<std::size_t>(t)]);
            kern::axpy<T>(T(1), dx.row(0), label_emb.table->grad.row(row),
                          static_cast<std::size_t>(emb_dim));
            label_emb.table->mark_touched(row);
            if (use_attention) {
                const T* dctx = dx.row(0) + emb_dim;
                const auto& a = a_steps_[static_cast<std::size_t>(t)];
                const auto& u = u_steps_[static_cast<std::size_t>(t)];
                double inner = 0.0;
                for (int j = 0; j < n; ++j) {
                    da[static_cast<std::size_t>(j)] =
                        kern::dot<T>(dctx, enc_.row(j), static_cast<std::size_t>(enc_width));
                    kern::axpy<T>(a[static_cast<std::size_t>(j)], dctx, denc.row(j),
                                  static_cast<std::size_t>(enc_width));
                    inner += static_cast<double>(a[static_cast<std::size_t>(j)]) *
                             static_cast<double>(da[static_cast<std::size_t>(j)]);
                }
                std::fill(dph.begin(), dph.end(), T(0));
                for (int j = 0; j < n; ++j) {
                    const T de = static_cast<T>(
                        static_cast<double>(a[static_cast<std::size_t>(j)]) *
                        (static_cast<double>(da[static_cast<std::size_t>(j)]) - inner));
                    if (de == T(0)) continue;
                    const T* uj = u.row(j);
                    kern::axpy<T>(de, uj, av->grad.data.data(), static_cast<std::size_t>(hidden));
                    for (int k = 0; k < hidden; ++k) {
                        dz[static_cast<std::size_t>(k)] =
                            de * av->value.data[static_cast<std::size_t>(k)] *
                            (T(1) - uj[k] * uj[k]);
                    }
                    kern::axpy<T>(T(1), dz.data(), dph.data(), static_cast<std::size_t>(hidden));
                    kern::axpy<T>(T(1), dz.data(), dq_acc.row(j), static_cast<std::size_t>(hidden));
                }
                // query path: ph = aw1 * h_{t-1}
                const T* h_query = hs_.row(t);
                kern::outer_acc<T>(dph.data(), static_cast<std::size_t>(hidden), h_query,
                                   static_cast<std::size_t>(hidden), aw1->grad.data.data());
                kern::matvec_t_acc<T>(aw1->value.data.data(), static_cast<std::size_t>(hidden),
                                      static_cast<std::size_t>(hidden), dph.data(), dh_prev.data());
            }
            dh_carry = dh_prev;
        }
        if (use_attention) {
            for (int j = 0; j < n; ++j) {
                kern::outer_acc<T>(dq_acc.row(j), static_cast<std::size_t>(hidden), enc_.row(j),
                                   static_cast<std::size_t>(enc_width), aw2->grad.data.data());
                kern::matvec_t_acc<T>(aw2->value.data.data(), static_cast<std::size_t>(hidden),
                                      static_cast<std::size_t>(enc_width), dq_acc.row(j),
                                      denc.row(j));
            }
        }
        // initial state: h0 = tanh(init_proj(enc[last]))
        Matrix<T> dpre(1, hidden);
        for (int k = 0; k < hidden; ++k) {
            const T h0 = hs_.at(0, k);
            dpre.at(0, k) = dh_carry[static_cast<std::size_t>(k)] * (T(1) - h0 * h0);
        }
        Matrix<T> dlast = init_proj.backward(dpre);
        if (n > 0) {
            kern::axpy<T>(T(1), dlast.row(0), denc.row(n - 1),
                          static_cast<std::size_t>(enc_width));
        }
        return denc;
    }
};

}  // namespace pdfstruct::nn
