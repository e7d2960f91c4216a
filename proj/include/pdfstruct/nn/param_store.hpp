#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "pdfstruct/error.hpp"
#include "pdfstruct/nn/matrix.hpp"

namespace pdfstruct::nn {

// One named trainable tensor with its gradient accumulator and optimizer
// moments. Moments are allocated on first optimizer use so inference-only
// models stay at value-size.
//
// row_sparse marks parameters whose gradient touches few rows per step
// (embedding tables). Layers writing such gradients must call mark_touched
// for every row they write; the optimizer then skips rows that provably
// receive a zero update (grad, m and v all zero), which is exact.
template <class T>
struct Param {
    std::string name;
    Matrix<T> value;
    Matrix<T> grad;
    Matrix<T> m;
    Matrix<T> v;
    bool row_sparse = false;
    std::vector<std::uint8_t> row_active;
    std::vector<std::uint8_t> row_touched;
    std::vector<int> touched;
    std::vector<int> active_list;

    Param(std::string n, int rows, int cols, bool sparse)
        : name(std::move(n)), value(rows, cols), grad(rows, cols), row_sparse(sparse) {
        if (sparse) {
            row_active.assign(static_cast<std::size_t>(rows), 0);
            row_touched.assign(static_cast<std::size_t>(rows), 0);
        }
    }

    int rows() const { return value.rows; }
    int cols() const { return value.cols; }
    std::size_t count() const { return value.size(); }

    void mark_touched(int r) {
        if (!row_touched[static_cast<std::size_t>(r)]) {
            row_touched[static_cast<std::size_t>(r)] = 1;
            touched.push_back(r);
        }
    }
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <class T>
class ParamStore {
public:
    Param<T>* create(const std::string& name, int rows, int cols, bool row_sparse = false) {
        if (index_.count(name)) {
            throw ConfigError("duplicate parameter name: " + name);
        }
        params_.push_back(std::make_unique<Param<T>>(name, rows, cols, row_sparse));
        index_[name] = params_.size() - 1;
        return params_.back().get();
    }

    Param<T>* find(const std::string& name) const {
        auto it = index_.find(name);
        return it == index_.end() ? nullptr : params_[it->second].get();
    }

    const std::vector<std::unique_ptr<Param<T>>>& params() const { return params_; }

    std::size_t total_count() const {
        std::size_t n = 0;
        for (const auto& p : params_) n += p->count();
        return n;
    }

    std::int64_t step_count() const { return adam_t_; }

    void zero_grads() {
        for (auto& p : params_) {
            if (p->row_sparse) {
                for (int r : p->touched) {
                    std::fill_n(p->grad.row(r), p->grad.cols, T(0));
                    p->row_touched[static_cast<std::size_t>(r)] = 0;
                }
                p->touched.clear();
            } else {
                p->grad.fill(T(0));
            }
        }
    }

    // L2 norm over all gradients. Gradients are zero outside touched rows of
    // row-sparse parameters, so those rows are skipped exactly.
    double grad_norm() const {
        double sq = 0.0;
        for (const auto& p : params_) {
            if (p->row_sparse) {
                for (int r : p->touched) {
                    const T* g = p->grad.row(r);
                    for (int c = 0; c < p->grad.cols; ++c) {
                        sq += static_cast<double>(g[c]) * static_cast<double>(g[c]);
                    }
                }
            } else {
                for (T g : p->grad.data) {
                    sq += static_cast<double>(g) * static_cast<double>(g);
                }
            }
        }
        return std::sqrt(sq);
    }

    void scale_grads(double s) {
        for (auto& p : params_) {
            if (p->row_sparse) {
                for (int r : p->touched) {
                    T* g = p->grad.row(r);
                    for (int c = 0; c < p->grad.cols; ++c) {
                        g[c] = static_cast<T>(g[c] * s);
                    }
                }
            } else {
                for (T& g : p->grad.data) {
                    g = static_cast<T>(g * s);
                }
            }
        }
    }

    // Bias-corrected adaptive-moment update; zeroes gradients afterwards.
    void adam_step(const AdamConfig& cfg) {
        ++adam_t_;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam_t_));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam_t_));
        for (auto& p : params_) {
            if (p->m.empty()) {
                p->m = Matrix<T>(p->rows(), p->cols());
                p->v = Matrix<T>(p->rows(), p->cols());
            }
            if (p->row_sparse) {
                for (int r : p->touched) {
                    if (!p->row_active[static_cast<std::size_t>(r)]) {
                        p->row_active[static_cast<std::size_t>(r)] = 1;
                        p->active_list.push_back(r);
                    }
                }
                for (int r : p->active_list) {
                    update_row(*p, r, cfg, bc1, bc2);
                }
            } else {
                for (int r = 0; r < p->rows(); ++r) {
                    update_row(*p, r, cfg, bc1, bc2);
                }
            }
        }
        zero_grads();
    }

private:
    void update_row(Param<T>& p, int r, const AdamConfig& cfg, double bc1, double bc2) {
        T* val = p.value.row(r);
        T* grd = p.grad.row(r);
        T* mm = p.m.row(r);
        T* vv = p.v.row(r);
        for (int c = 0; c < p.cols(); ++c) {
            const double g = static_cast<double>(grd[c]);
            if (!std::isfinite(g)) {
                throw DivergenceError("non-finite gradient in parameter '" + p.name + "' at (" +
                                      std::to_string(r) + "," + std::to_string(c) + ")");
            }
            const double m = cfg.beta1 * static_cast<double>(mm[c]) + (1.0 - cfg.beta1) * g;
            const double v = cfg.beta2 * static_cast<double>(vv[c]) + (1.0 - cfg.beta2) * g * g;
            mm[c] = static_cast<T>(m);
            vv[c] = static_cast<T>(v);
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            val[c] = static_cast<T>(static_cast<double>(val[c]) -
                                    cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
        }
    }

    std::vector<std::unique_ptr<Param<T>>> params_;
    std::unordered_map<std::string, std::size_t> index_;
    std::int64_t adam_t_ = 0;
};

}  // namespace pdfstruct::nn
