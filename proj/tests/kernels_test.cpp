#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pdfstruct/kernels.hpp"
#include "pdfstruct/nn/rng.hpp"

using namespace pdfstruct;

namespace {

std::vector<float> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::vector<float> v(n);
    for (auto& x : v) {
        x = static_cast<float>(nn::uniform_range(rng, -2.0, 2.0));
    }
    return v;
}

bool close(float a, float b, double tol) {
    const double d = std::abs(static_cast<double>(a) - static_cast<double>(b));
    return d <= tol * std::max({1.0, std::abs(static_cast<double>(a)),
                                std::abs(static_cast<double>(b))});
}

}  // namespace

TEST_CASE("kernel backends agree with the scalar reference") {
    std::mt19937_64 rng(7);
    const auto& scalar = kern::scalar_ops();
    for (const auto& name : kern::available_backends()) {
        kern::set_backend(name);
        const auto& ops = kern::active();
        // odd sizes exercise the vector tails
        for (std::size_t n : {1u, 3u, 7u, 8u, 15u, 16u, 33u, 64u, 67u, 240u}) {
            auto a = random_vec(rng, n);
            auto b = random_vec(rng, n);
            CHECK(close(ops.dot(a.data(), b.data(), n), scalar.dot(a.data(), b.data(), n), 1e-6));

            auto y1 = random_vec(rng, n);
            auto y2 = y1;
            ops.axpy(0.37f, a.data(), y1.data(), n);
            scalar.axpy(0.37f, a.data(), y2.data(), n);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(close(y1[i], y2[i], 1e-6));
            }
        }
        for (std::size_t rows : {1u, 5u, 32u}) {
            for (std::size_t cols : {1u, 17u, 64u, 130u}) {
                auto w = random_vec(rng, rows * cols);
                auto x = random_vec(rng, cols);
                auto bias = random_vec(rng, rows);
                std::vector<float> out1(rows), out2(rows);
                ops.matvec(w.data(), rows, cols, x.data(), bias.data(), out1.data());
                scalar.matvec(w.data(), rows, cols, x.data(), bias.data(), out2.data());
                for (std::size_t r = 0; r < rows; ++r) {
                    CHECK(close(out1[r], out2[r], 1e-6));
                }
                ops.matvec(w.data(), rows, cols, x.data(), nullptr, out1.data());
                scalar.matvec(w.data(), rows, cols, x.data(), nullptr, out2.data());
                for (std::size_t r = 0; r < rows; ++r) {
                    CHECK(close(out1[r], out2[r], 1e-6));
                }
            }
        }
    }
    kern::set_backend("auto");
}

TEST_CASE("dot accumulates in double") {
    // float accumulation would drop every 0.5 against the 1e7 partial sums
    const std::size_t n = 4096;
    std::vector<float> a(n, 1.0f), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        switch (i % 4) {
            case 0: b[i] = 1e7f; break;
            case 1: b[i] = 0.5f; break;
            case 2: b[i] = -1e7f; break;
            default: b[i] = 0.5f; break;
        }
    }
    const double expected = static_cast<double>(n) / 4.0;
    for (const auto& name : kern::available_backends()) {
        kern::set_backend(name);
        CHECK(kern::active().dot(a.data(), b.data(), n) ==
              doctest::Approx(expected).epsilon(1e-6));
    }
    kern::set_backend("auto");
}

TEST_CASE("unknown backend is rejected") {
    CHECK_THROWS_AS(kern::set_backend("gpu"), ConfigError);
}
