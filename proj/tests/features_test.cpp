#include <doctest.h>

#include <random>

#include "pdfstruct/features.hpp"
#include "pdfstruct/nn/rng.hpp"

using namespace pdfstruct;

namespace {

TextCell mk(double x0, double y0, double w, double h, int len = 10, bool cap = false,
            bool bold = false, double alnum = 0.9) {
    TextCell c;
    c.x0 = x0;
    c.y0 = y0;
    c.width = w;
    c.height = h;
    c.text_length = len;
    c.starts_with_capital = cap;
    c.is_bold = bold;
    c.alnum_ratio = alnum;
    return c;
}

}  // namespace

TEST_CASE("single cell features use the boundary sentinel") {
    auto f = extract_features({mk(0.1, 0.5, 0.2, 0.05)}, FeatureSchema::full());
    REQUIRE(f.size() == 1);
    REQUIRE(f[0].size() == 12);
    CHECK(f[0][0] == doctest::Approx(0.1));
    CHECK(f[0][1] == doctest::Approx(0.5));
    CHECK(f[0][2] == doctest::Approx(0.2));
    CHECK(f[0][3] == doctest::Approx(0.05));
    CHECK(f[0][4] == 1.0f);  // vdist_prev
    CHECK(f[0][5] == 1.0f);  // vdist_next
    CHECK(f[0][6] == 1.0f);  // hdist_prev
    CHECK(f[0][7] == 1.0f);  // hdist_next
}

TEST_CASE("vertical distance to next is the absolute center difference") {
    auto f = extract_features(
        {mk(0.2, 0.8, 0.3, 0.02), mk(0.2, 0.7, 0.3, 0.02)}, FeatureSchema::full());
    CHECK(f[0][5] == doctest::Approx(0.1));  // first cell's vdist_next
    CHECK(f[1][4] == doctest::Approx(0.1));  // second cell's vdist_prev
    CHECK(f[0][7] == doctest::Approx(0.0));  // equal x centers
}

TEST_CASE("five-cell feature matrix matches a hand oracle") {
    std::vector<TextCell> cells = {
        mk(0.10, 0.90, 0.50, 0.03, 25, true, true, 0.90),
        mk(0.10, 0.80, 0.80, 0.02, 80, false, false, 0.95),
        mk(0.12, 0.74, 0.78, 0.02, 75, false, false, 0.88),
        mk(0.10, 0.60, 0.40, 0.02, 30, true, false, 0.50),
        mk(0.15, 0.10, 0.20, 0.01, 5, false, false, 0.70),
    };
    auto f = extract_features(cells, FeatureSchema::full());
    const auto clamp = [](double v) { return std::min(1.0, std::max(0.0, v)); };
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& c = cells[i];
        CHECK(f[i][0] == doctest::Approx(c.x0));
        CHECK(f[i][1] == doctest::Approx(c.y0));
        CHECK(f[i][2] == doctest::Approx(c.width));
        CHECK(f[i][3] == doctest::Approx(c.height));
        const double yc = c.y0 + c.height / 2;
        const double xc = c.x0 + c.width / 2;
        if (i > 0) {
            const auto& p = cells[i - 1];
            CHECK(f[i][4] == doctest::Approx(clamp(std::abs(yc - (p.y0 + p.height / 2)))));
            CHECK(f[i][6] == doctest::Approx(clamp(std::abs(xc - (p.x0 + p.width / 2)))));
        } else {
            CHECK(f[i][4] == 1.0f);
            CHECK(f[i][6] == 1.0f);
        }
        if (i + 1 < cells.size()) {
            const auto& nx = cells[i + 1];
            CHECK(f[i][5] == doctest::Approx(clamp(std::abs(yc - (nx.y0 + nx.height / 2)))));
            CHECK(f[i][7] == doctest::Approx(clamp(std::abs(xc - (nx.x0 + nx.width / 2)))));
        } else {
            CHECK(f[i][5] == 1.0f);
            CHECK(f[i][7] == 1.0f);
        }
        CHECK(f[i][8] == doctest::Approx(clamp(c.text_length / 100.0)));
        CHECK(f[i][9] == (c.starts_with_capital ? 1.0f : 0.0f));
        CHECK(f[i][10] == (c.is_bold ? 1.0f : 0.0f));
        CHECK(f[i][11] == doctest::Approx(c.alnum_ratio));
    }
}

TEST_CASE("features depend only on derived text statistics") {
    // two cells whose (hypothetical) texts differ but share every statistic
    auto a = extract_features({mk(0.1, 0.5, 0.2, 0.02, 42, true, false, 0.75)},
                              FeatureSchema::full());
    auto b = extract_features({mk(0.1, 0.5, 0.2, 0.02, 42, true, false, 0.75)},
                              FeatureSchema::full());
    CHECK(a == b);
}

TEST_CASE("bin_value worked examples") {
    CHECK(bin_value(0.0, 20) == 0);
    CHECK(bin_value(1.0, 20) == 19);
    CHECK(bin_value(0.26, 20) == 5);
    CHECK_THROWS_AS(bin_value(-0.01, 20), DataError);
    CHECK_THROWS_AS(bin_value(1.01, 20), DataError);
    CHECK_THROWS_AS(bin_value(0.5, 1), ConfigError);
}

TEST_CASE("bin_value is monotone") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        double a = nn::uniform01(rng);
        double b = nn::uniform01(rng);
        if (a > b) std::swap(a, b);
        CHECK(bin_value(a, 20) <= bin_value(b, 20));
    }
}

TEST_CASE("linear_index worked examples") {
    CHECK(linear_index({{0, 0, 0, 0}, 20}) == 0);
    CHECK(linear_index({{3, 5}, 20}) == 103);
    CHECK(linear_index({{1, 2, 3, 4}, 20}) == 33241);
}

TEST_CASE("linear_index rejects absurd ranges") {
    BinVector b;
    b.n_bins = 1000;
    b.bins.assign(32, 5);
    CHECK_THROWS_AS(linear_index(b), ConfigError);
}

TEST_CASE("linear_index bijects onto [0, N^M)") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10000; ++i) {
        BinVector b;
        b.n_bins = 20;
        for (int l = 0; l < 4; ++l) {
            b.bins.push_back(static_cast<int>(nn::uniform_below(rng, 20)));
        }
        const std::uint64_t idx = linear_index(b);
        CHECK(idx < 160000u);
        BinVector back = decode_linear_index(idx, 4, 20);
        CHECK(back.bins == b.bins);
    }
}

TEST_CASE("stack_bins worked examples") {
    CHECK(stack_bins({{1}, 3}) == std::vector<std::uint8_t>{0, 1, 0});
    CHECK(stack_bins({{0, 2}, 3}) == std::vector<std::uint8_t>{1, 0, 0, 0, 0, 1});
}

TEST_CASE("stack_bins places ones per the position formula") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        BinVector b;
        b.n_bins = 20;
        for (int l = 0; l < 4; ++l) {
            b.bins.push_back(static_cast<int>(nn::uniform_below(rng, 20)));
        }
        auto v = stack_bins(b);
        REQUIRE(v.size() == 80);
        // independent loop-based constructor
        std::vector<std::uint8_t> expect(80, 0);
        for (int l = 0; l < 4; ++l) {
            expect[static_cast<std::size_t>(l * 20 + b.bins[static_cast<std::size_t>(l)])] = 1;
        }
        CHECK(v == expect);
        int ones = 0;
        for (auto x : v) ones += x;
        CHECK(ones == 4);
    }
}

TEST_CASE("encode_sequence selects per-mode payloads") {
    CHECK(encode_sequence({}, FeedingMode::Direct, 20).length() == 0);
    CHECK(encode_sequence({}, FeedingMode::Indexed, 20).length() == 0);
    CHECK(encode_sequence({}, FeedingMode::Stacked, 20).length() == 0);

    auto cells = std::vector<TextCell>{mk(0.1, 0.5, 0.2, 0.05), mk(0.3, 0.4, 0.1, 0.02)};
    auto feats = extract_features(cells, FeatureSchema::geometric());
    auto direct = encode_sequence(feats, FeedingMode::Direct, 20);
    CHECK(direct.direct == feats);

    auto indexed = encode_sequence(feats, FeedingMode::Indexed, 20);
    REQUIRE(indexed.indices.size() == 2);
    for (std::size_t t = 0; t < 2; ++t) {
        CHECK(indexed.indices[t] == linear_index(bin_features(feats[t], 20)));
    }

    auto full = extract_features(cells, FeatureSchema::full());
    CHECK_THROWS_AS(encode_sequence(full, FeedingMode::Indexed, 20), ConfigError);

    auto stacked = encode_sequence(full, FeedingMode::Stacked, 20);
    REQUIRE(stacked.stacked.size() == 2);
    CHECK(stacked.stacked[0].size() == 240);
}

TEST_CASE("direct encoding of identical pages is identical") {
    auto cells = std::vector<TextCell>{mk(0.1, 0.9, 0.5, 0.02), mk(0.1, 0.8, 0.5, 0.02)};
    auto e1 = encode_sequence(extract_features(cells, FeatureSchema::full()),
                              FeedingMode::Direct, 20);
    auto e2 = encode_sequence(extract_features(cells, FeatureSchema::full()),
                              FeedingMode::Direct, 20);
    CHECK(e1.direct == e2.direct);
}

TEST_CASE("schema hashes distinguish the two schemas") {
    CHECK(FeatureSchema::geometric().hash() != FeatureSchema::full().hash());
    CHECK(FeatureSchema::full().hash() == FeatureSchema::full().hash());
    CHECK(FeatureSchema::geometric().size() == 4);
    CHECK(FeatureSchema::full().size() == 12);
}
