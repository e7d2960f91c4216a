#include <doctest.h>

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "pdfstruct/nn/attention.hpp"
#include "pdfstruct/nn/decoder.hpp"
#include "pdfstruct/nn/layers.hpp"
#include "pdfstruct/nn/recurrent.hpp"
#include "pdfstruct/nn/transformer.hpp"

using namespace pdfstruct;
using gradcheck::Matd;
using gradcheck::random_matrix;

namespace {
constexpr int kInstances = 20;
}

TEST_CASE("gradcheck: linear layer") {
    std::mt19937_64 rng(101);
    for (int inst = 0; inst < kInstances; ++inst) {
        nn::ParamStore<double> store;
        nn::Linear<double> lin;
        const int in = 2 + static_cast<int>(nn::uniform_below(rng, 5));
        const int out = 2 + static_cast<int>(nn::uniform_below(rng, 4));
        const int steps = 1 + static_cast<int>(nn::uniform_below(rng, 4));
        lin.init(store, "lin", in, out, rng);
        Matd x = random_matrix(rng, steps, in);
        gradcheck::check(
            store, x, [&]() { return lin.forward(x); },
            [&](const Matd& dy) { return lin.backward(dy); }, rng, 1e-4);
    }
}

TEST_CASE("gradcheck: gru layer") {
    std::mt19937_64 rng(102);
    for (int inst = 0; inst < kInstances; ++inst) {
        nn::ParamStore<double> store;
        nn::RecurrentLayer<double, nn::GruCell<double>> layer;
        const int in = 2 + static_cast<int>(nn::uniform_below(rng, 3));
        const int hidden = 2 + static_cast<int>(nn::uniform_below(rng, 3));
        const int steps = 1 + static_cast<int>(nn::uniform_below(rng, 4));
        layer.init(store, "gru", in, hidden, rng, inst % 2 == 1);
        Matd x = random_matrix(rng, steps, in);
        gradcheck::check(
            store, x, [&]() { return layer.forward(x); },
            [&](const Matd& dy) { return layer.backward(dy); }, rng, 1e-4);
    }
}

TEST_CASE("gradcheck: lstm layer") {
    std::mt19937_64 rng(103);
    for (int inst = 0; inst < kInstances; ++inst) {
        nn::ParamStore<double> store;
        nn::RecurrentLayer<double, nn::LstmCell<double>> layer;
        const int in = 2 + static_cast<int>(nn::uniform_below(rng, 3));
        const int hidden = 2 + static_cast<int>(nn::uniform_below(rng, 3));
        const int steps = 1 + static_cast<int>(nn::uniform_below(rng, 4));
        layer.init(store, "lstm", in, hidden, rng, inst % 2 == 1);
        Matd x = random_matrix(rng, steps, in);
        gradcheck::check(
            store, x, [&]() { return layer.forward(x); },
            [&](const Matd& dy) { return layer.backward(dy); }, rng, 1e-4);
    }
}

TEST_CASE("gradcheck: bidirectional lstm stack") {
    std::mt19937_64 rng(104);
    for (int inst = 0; inst < kInstances; ++inst) {
        nn::ParamStore<double> store;
        nn::BidirectionalLayer<double, nn::LstmCell<double>> l0;
        nn::BidirectionalLayer<double, nn::LstmCell<double>> l1;
        const int in = 2 + static_cast<int>(nn::uniform_below(rng, 3));
        const int hidden = 2 + static_cast<int>(nn::uniform_below(rng, 2));
        const int steps = 2 + static_cast<int>(nn::uniform_below(rng, 3));
        l0.init(store, "bi0", in, hidden, rng);
        l1.init(store, "bi1", 2 * hidden, hidden, rng);
        Matd x = random_matrix(rng, steps, in);
        gradcheck::check(
            store, x, [&]() { return l1.forward(l0.forward(x)); },
            [&](const Matd& dy) { return l0.backward(l1.backward(dy)); }, rng, 1e-4);
    }
}

TEST_CASE("gradcheck: additive self-attention") {
    std::mt19937_64 rng(105);
    for (int inst = 0; inst < kInstances; ++inst) {
        nn::ParamStore<double> store;
        nn::AdditiveSelfAttention<double> attn;
        const int state = 2 + static_cast<int>(nn::uniform_below(rng, 4));
        const int steps = 1 + static_cast<int>(nn::uniform_below(rng, 4));
        attn.init(store, "attn", state, state, rng);
        Matd x = random_matrix(rng, steps, state);
        gradcheck::check(
            store, x, [&]() { return attn.forward(x); },
            [&](const Matd& dy) { return attn.backward(dy); }, rng, 1e-4);
    }
}

TEST_CASE("gradcheck: transformer block") {
    std::mt19937_64 rng(106);
    for (int inst = 0; inst < kInstances; ++inst) {
        nn::ParamStore<double> store;
        nn::TransformerBlock<double> block;
        const int heads = 1 + static_cast<int>(nn::uniform_below(rng, 2));
        const int d = heads * (2 + static_cast<int>(nn::uniform_below(rng, 2)));
        const int steps = 2 + static_cast<int>(nn::uniform_below(rng, 3));
        block.init(store, "blk", d, heads, rng);
        Matd x = random_matrix(rng, steps, d);
        gradcheck::check(
            store, x, [&]() { return block.forward(x); },
            [&](const Matd& dy) { return block.backward(dy); }, rng, 1e-3);
    }
}

TEST_CASE("gradcheck: decoder (all four wirings)") {
    std::mt19937_64 rng(107);
    for (int inst = 0; inst < 12; ++inst) {
        const bool attention = inst % 2 == 1;
        const int enc_w = 2 + static_cast<int>(nn::uniform_below(rng, 3));
        const int d = 2 + static_cast<int>(nn::uniform_below(rng, 3));
        const int labels = 3;
        const int steps = 2 + static_cast<int>(nn::uniform_below(rng, 3));
        std::vector<int> prev(static_cast<std::size_t>(steps));
        prev[0] = labels;  // start token
        for (int t = 1; t < steps; ++t) {
            prev[static_cast<std::size_t>(t)] = static_cast<int>(nn::uniform_below(rng, labels));
        }
        Matd x = random_matrix(rng, steps, enc_w);
        if (inst % 4 < 2) {
            nn::ParamStore<double> store;
            nn::Decoder<double, nn::LstmCell<double>> dec;
            dec.init(store, "dec", enc_w, d, labels, attention, rng);
            gradcheck::check(
                store, x, [&]() { return dec.forward_teacher(x, prev); },
                [&](const Matd& dy) { return dec.backward(dy); }, rng, 1e-4);
        } else {
            nn::ParamStore<double> store;
            nn::Decoder<double, nn::GruCell<double>> dec;
            dec.init(store, "dec", enc_w, d, labels, attention, rng);
            gradcheck::check(
                store, x, [&]() { return dec.forward_teacher(x, prev); },
                [&](const Matd& dy) { return dec.backward(dy); }, rng, 1e-4);
        }
    }
}

TEST_CASE("gradcheck: softmax cross entropy") {
    std::mt19937_64 rng(108);
    for (int inst = 0; inst < kInstances; ++inst) {
        const int steps = 2 + static_cast<int>(nn::uniform_below(rng, 4));
        const int classes = 2 + static_cast<int>(nn::uniform_below(rng, 5));
        Matd logits = random_matrix(rng, steps, classes, -2.0, 2.0);
        std::vector<int> targets(static_cast<std::size_t>(steps));
        std::vector<char> mask(static_cast<std::size_t>(steps));
        int unmasked = 0;
        for (int t = 0; t < steps; ++t) {
            targets[static_cast<std::size_t>(t)] =
                static_cast<int>(nn::uniform_below(rng, static_cast<std::uint64_t>(classes)));
            mask[static_cast<std::size_t>(t)] = nn::uniform01(rng) < 0.7 ? 1 : 0;
            unmasked += mask[static_cast<std::size_t>(t)];
        }
        if (unmasked == 0) {
            mask[0] = 1;
        }
        auto res = nn::softmax_cross_entropy<double>(logits, targets, mask);
        for (std::size_t i = 0; i < logits.data.size(); ++i) {
            const double saved = logits.data[i];
            logits.data[i] = saved + gradcheck::kStep;
            const double up = nn::softmax_cross_entropy<double>(logits, targets, mask).loss;
            logits.data[i] = saved - gradcheck::kStep;
            const double down = nn::softmax_cross_entropy<double>(logits, targets, mask).loss;
            logits.data[i] = saved;
            const double fd = (up - down) / (2.0 * gradcheck::kStep);
            CHECK(gradcheck::grad_close(res.grad.data[i], fd, 1e-5));
        }
    }
}

TEST_CASE("gru closed forms") {
    std::mt19937_64 rng(1);
    nn::ParamStore<double> store;
    nn::RecurrentLayer<double, nn::GruCell<double>> layer;
    layer.init(store, "gru", 3, 4, rng, false);
    for (const auto& p : store.params()) {
        p->value.fill(0.0);
    }
    Matd x = random_matrix(rng, 2, 3);
    Matd h = layer.forward(x);
    for (double v : h.data) {
        CHECK(v == 0.0);  // update gate 0.5, candidate tanh(0)=0
    }

    // saturating the update gate propagates the previous state untouched
    nn::ParamStore<double> store2;
    nn::GruCell<double> cell;
    cell.init(store2, "cell", 3, 4, rng);
    auto* b = store2.find("cell.b");
    REQUIRE(b != nullptr);
    for (int k = 0; k < 4; ++k) {
        b->value.data[static_cast<std::size_t>(k)] = 20.0;  // update-gate bias
    }
    std::vector<double> xin = {0.4, -0.7, 0.2};
    std::vector<double> h_prev = {0.3, -0.5, 0.8, 0.1};
    std::vector<double> h_out(4);
    nn::GruCell<double>::Cache cache;
    cell.step(xin.data(), h_prev.data(), h_out.data(), cache);
    for (int k = 0; k < 4; ++k) {
        CHECK(std::abs(h_out[static_cast<std::size_t>(k)] -
                       h_prev[static_cast<std::size_t>(k)]) < 1e-3);
    }
}

TEST_CASE("lstm closed form at zero weights") {
    std::mt19937_64 rng(2);
    nn::ParamStore<double> store;
    nn::LstmCell<double> cell;
    cell.init(store, "c", 3, 4, rng);
    for (const auto& p : store.params()) {
        p->value.fill(0.0);
    }
    std::vector<double> x = {0.3, -0.2, 0.9};
    std::vector<double> h_prev = {0.1, 0.2, -0.1, 0.4};
    std::vector<double> c_prev = {0.5, -0.8, 1.2, 0.0};
    std::vector<double> h(4), c_out(4);
    nn::LstmCell<double>::Cache cache;
    cell.step(x.data(), h_prev.data(), c_prev.data(), h.data(), c_out.data(), cache);
    for (int k = 0; k < 4; ++k) {
        CHECK(c_out[static_cast<std::size_t>(k)] ==
              doctest::Approx(0.5 * c_prev[static_cast<std::size_t>(k)]).epsilon(1e-12));
        CHECK(h[static_cast<std::size_t>(k)] ==
              doctest::Approx(0.5 * std::tanh(0.5 * c_prev[static_cast<std::size_t>(k)]))
                  .epsilon(1e-12));
    }

    // zero state stays zero
    std::fill(h_prev.begin(), h_prev.end(), 0.0);
    std::fill(c_prev.begin(), c_prev.end(), 0.0);
    cell.step(x.data(), h_prev.data(), c_prev.data(), h.data(), c_out.data(), cache);
    for (int k = 0; k < 4; ++k) {
        CHECK(h[static_cast<std::size_t>(k)] == 0.0);
        CHECK(c_out[static_cast<std::size_t>(k)] == 0.0);
    }
}

TEST_CASE("attention on a single state returns the state") {
    std::mt19937_64 rng(3);
    nn::ParamStore<double> store;
    nn::AdditiveSelfAttention<double> attn;
    attn.init(store, "attn", 5, 5, rng);
    Matd x = random_matrix(rng, 1, 5);
    Matd out = attn.forward(x);
    REQUIRE(out.cols == 10);
    CHECK(attn.a_.at(0, 0) == doctest::Approx(1.0));
    for (int k = 0; k < 5; ++k) {
        CHECK(out.at(0, k) == doctest::Approx(x.at(0, k)));      // context == state
        CHECK(out.at(0, 5 + k) == doctest::Approx(x.at(0, k)));  // passthrough
    }
}

TEST_CASE("attention weights are normalized") {
    std::mt19937_64 rng(4);
    nn::ParamStore<double> store;
    nn::AdditiveSelfAttention<double> attn;
    attn.init(store, "attn", 4, 4, rng);
    Matd x = random_matrix(rng, 6, 4);
    attn.forward(x);
    for (int i = 0; i < 6; ++i) {
        double sum = 0.0;
        for (int j = 0; j < 6; ++j) sum += attn.a_.at(i, j);
        CHECK(sum == doctest::Approx(1.0));
    }
}

TEST_CASE("positional encoding at position zero") {
    Matd pe = nn::positional_encoding<double>(3, 8);
    for (int i = 0; i < 8; i += 2) {
        CHECK(pe.at(0, i) == doctest::Approx(0.0));      // sin(0)
        CHECK(pe.at(0, i + 1) == doctest::Approx(1.0));  // cos(0)
    }
    CHECK(pe.at(1, 0) == doctest::Approx(std::sin(1.0)));
}

TEST_CASE("multi-head attention weights are normalized") {
    std::mt19937_64 rng(5);
    nn::ParamStore<double> store;
    nn::MultiHeadSelfAttention<double> mha;
    mha.init(store, "mha", 8, 2, rng);
    Matd x = random_matrix(rng, 5, 8);
    mha.forward(x);
    for (const auto& a : mha.attn_) {
        for (int i = 0; i < 5; ++i) {
            double sum = 0.0;
            for (int j = 0; j < 5; ++j) sum += a.at(i, j);
            CHECK(sum == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("transformer rejects indivisible widths") {
    std::mt19937_64 rng(6);
    nn::ParamStore<double> store;
    nn::MultiHeadSelfAttention<double> mha;
    CHECK_THROWS_AS(mha.init(store, "mha", 10, 3, rng), ConfigError);
}

TEST_CASE("cross entropy worked examples") {
    Matd logits(2, 5);
    std::vector<int> targets = {1, 3};
    std::vector<char> mask = {1, 1};
    auto res = nn::softmax_cross_entropy<double>(logits, targets, mask);
    CHECK(res.loss == doctest::Approx(std::log(5.0)));  // uniform logits

    logits.at(0, 1) = 100.0;
    logits.at(1, 3) = 100.0;
    res = nn::softmax_cross_entropy<double>(logits, targets, mask);
    CHECK(res.loss < 1e-6);  // confident and correct

    mask = {0, 0};
    CHECK_THROWS_AS(nn::softmax_cross_entropy<double>(logits, targets, mask), DataError);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    std::mt19937_64 rng(7);
    nn::ParamStore<double> store;
    auto* p = store.create("p", 3, 3);
    nn::init_uniform(p, rng, 0.5);
    auto before = p->value.data;
    store.adam_step({});
    CHECK(p->value.data == before);
}

TEST_CASE("adam: first step from rest has magnitude ~lr") {
    nn::ParamStore<double> store;
    auto* p = store.create("p", 1, 4);
    for (int i = 0; i < 4; ++i) {
        p->grad.data[static_cast<std::size_t>(i)] = 0.7;  // constant gradient
    }
    nn::AdamConfig cfg;
    store.adam_step(cfg);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(p->value.data[static_cast<std::size_t>(i)] + cfg.lr) < 1e-6);
    }
    // gradients were zeroed
    for (int i = 0; i < 4; ++i) {
        CHECK(p->grad.data[static_cast<std::size_t>(i)] == 0.0);
    }
}

TEST_CASE("adam: drives a convex quadratic to near zero") {
    nn::ParamStore<double> store;
    auto* p = store.create("p", 1, 2);
    p->value.data = {3.0, -2.0};
    nn::AdamConfig cfg;
    cfg.lr = 0.05;
    auto loss = [&]() {
        return p->value.data[0] * p->value.data[0] + 4.0 * p->value.data[1] * p->value.data[1];
    };
    const double start = loss();
    for (int step = 0; step < 400; ++step) {
        p->grad.data[0] = 2.0 * p->value.data[0];
        p->grad.data[1] = 8.0 * p->value.data[1];
        store.adam_step(cfg);
    }
    CHECK(loss() < 1e-3 * start);
}

TEST_CASE("adam: non-finite gradient names the parameter") {
    nn::ParamStore<double> store;
    store.create("fine", 1, 2);
    auto* bad = store.create("exploded", 1, 2);
    bad->grad.data[1] = std::numeric_limits<double>::quiet_NaN();
    try {
        store.adam_step({});
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(std::string(e.what()).find("exploded") != std::string::npos);
    }
}

TEST_CASE("row-sparse adam matches dense adam exactly") {
    std::mt19937_64 rng(9);
    nn::ParamStore<double> sparse_store;
    nn::ParamStore<double> dense_store;
    auto* sp = sparse_store.create("emb", 12, 3, /*row_sparse=*/true);
    auto* dp = dense_store.create("emb", 12, 3, /*row_sparse=*/false);
    nn::init_uniform(sp, rng, 0.5);
    dp->value.data = sp->value.data;

    std::mt19937_64 grng(10);
    for (int step = 0; step < 25; ++step) {
        // touch a few rows with identical gradients in both stores
        for (int k = 0; k < 3; ++k) {
            const int row = static_cast<int>(nn::uniform_below(grng, 12));
            for (int c = 0; c < 3; ++c) {
                const double g = nn::uniform_range(grng, -1.0, 1.0);
                sp->grad.at(row, c) += g;
                dp->grad.at(row, c) += g;
            }
            sp->mark_touched(row);
        }
        sparse_store.adam_step({});
        dense_store.adam_step({});
    }
    for (std::size_t i = 0; i < sp->value.data.size(); ++i) {
        CHECK(sp->value.data[i] == doctest::Approx(dp->value.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("sequence encoders preserve length and width contracts") {
    std::mt19937_64 rng(11);
    nn::ParamStore<double> store;
    nn::BidirectionalLayer<double, nn::LstmCell<double>> bi;
    bi.init(store, "bi", 3, 5, rng);
    Matd empty(0, 3);
    CHECK(bi.forward(empty).rows == 0);
    for (int steps : {1, 4, 9}) {
        Matd x = random_matrix(rng, steps, 3);
        Matd y = bi.forward(x);
        CHECK(y.rows == steps);
        CHECK(y.cols == 10);  // 2d
    }
}

TEST_CASE("bidirectional symmetry: reversed input + swapped blocks") {
    std::mt19937_64 rng(12);
    nn::ParamStore<double> s1;
    nn::BidirectionalLayer<double, nn::LstmCell<double>> b1;
    b1.init(s1, "b", 3, 4, rng);
    nn::ParamStore<double> s2;
    nn::BidirectionalLayer<double, nn::LstmCell<double>> b2;
    {
        std::mt19937_64 tmp(999);
        b2.init(s2, "b", 3, 4, tmp);
    }
    // swap the directional parameter blocks
    s2.find("b.fwd.w")->value = s1.find("b.bwd.w")->value;
    s2.find("b.fwd.u")->value = s1.find("b.bwd.u")->value;
    s2.find("b.fwd.b")->value = s1.find("b.bwd.b")->value;
    s2.find("b.bwd.w")->value = s1.find("b.fwd.w")->value;
    s2.find("b.bwd.u")->value = s1.find("b.fwd.u")->value;
    s2.find("b.bwd.b")->value = s1.find("b.fwd.b")->value;

    const int steps = 6;
    Matd x = random_matrix(rng, steps, 3);
    Matd xr(steps, 3);
    for (int t = 0; t < steps; ++t) {
        std::copy_n(x.row(steps - 1 - t), 3, xr.row(t));
    }
    Matd y1 = b1.forward(x);
    Matd y2 = b2.forward(xr);
    for (int t = 0; t < steps; ++t) {
        for (int k = 0; k < 4; ++k) {
            CHECK(y2.at(steps - 1 - t, k) == doctest::Approx(y1.at(t, 4 + k)).epsilon(1e-12));
            CHECK(y2.at(steps - 1 - t, 4 + k) == doctest::Approx(y1.at(t, k)).epsilon(1e-12));
        }
    }
}

TEST_CASE("embedding rejects out-of-range ids") {
    std::mt19937_64 rng(13);
    nn::ParamStore<double> store;
    nn::Embedding<double> emb;
    emb.init(store, "e", 10, 4, rng);
    CHECK_THROWS_AS(emb.forward({10}), ShapeError);
    Matd y = emb.forward({0, 9, 3});
    CHECK(y.rows == 3);
    CHECK(y.cols == 4);
}
