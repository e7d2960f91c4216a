#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "pdfstruct/synth.hpp"

using namespace pdfstruct;

TEST_CASE("generation is deterministic per seed") {
    auto one = [&]() {
        auto tpls = default_templates();
        return generate({tpls[0]}, 1, 42);
    };
    Corpus a = one();
    Corpus b = one();
    REQUIRE(a.pages.size() == 1);
    REQUIRE(a.pages[0].cells.size() == b.pages[0].cells.size());
    for (std::size_t i = 0; i < a.pages[0].cells.size(); ++i) {
        CHECK(a.pages[0].cells[i].x0 == b.pages[0].cells[i].x0);
        CHECK(a.pages[0].cells[i].y0 == b.pages[0].cells[i].y0);
        CHECK(a.pages[0].cells[i].label == b.pages[0].cells[i].label);
    }
    Corpus c = generate({default_templates()[0]}, 1, 43);
    bool same = a.pages[0].cells.size() == c.pages[0].cells.size();
    if (same) {
        for (std::size_t i = 0; i < a.pages[0].cells.size(); ++i) {
            same = same && a.pages[0].cells[i].x0 == c.pages[0].cells[i].x0;
        }
    }
    CHECK_FALSE(same);
}

TEST_CASE("default corpus invariants") {
    Corpus c = generate_default(100, 0);
    CHECK(c.pages.size() == 700);
    CHECK(c.label_set.size() == 17);

    std::map<std::string, std::int64_t> cells_per_label;
    std::map<std::string, int> pages_per_label;
    std::int64_t total = 0;
    for (const auto& p : c.pages) {
        CHECK(geometry_normalized(p));
        std::set<int> seen;
        for (const auto& cell : p.cells) {
            CHECK(cell.has_label());
            CHECK(cell.width > 0);
            CHECK(cell.height > 0);
            CHECK(cell.alnum_ratio >= 0.0);
            CHECK(cell.alnum_ratio <= 1.0);
            ++cells_per_label[c.label_set.name_of(cell.label)];
            seen.insert(cell.label);
            ++total;
        }
        for (int l : seen) ++pages_per_label[c.label_set.name_of(l)];
    }

    // every canonical label occurs on at least two pages
    for (const auto& name : LabelSet::canonical().names()) {
        INFO("label: " << name);
        CHECK(pages_per_label[name] >= 2);
    }

    // skewed distribution: text dominates
    auto text_cells = cells_per_label["text"];
    for (const auto& [name, count] : cells_per_label) {
        if (name != "text") {
            CHECK(text_cells > count);
        }
    }
    CHECK(total > 10000);
}

TEST_CASE("reading order reproduces the generation order") {
    Corpus c = generate_default(100, 0);
    int checked = 0;
    for (const auto& p : c.pages) {
        auto order = reading_order_indices(p);
        for (std::size_t i = 0; i < order.size(); ++i) {
            REQUIRE_MESSAGE(order[i] == static_cast<int>(i),
                            "page " << p.page_id << " diverges at position " << i);
        }
        ++checked;
    }
    CHECK(checked == 700);
}

TEST_CASE("generate validates arguments") {
    CHECK_THROWS_AS(generate({}, 5, 0), ConfigError);
    CHECK_THROWS_AS(generate(default_templates(), 0, 0), ConfigError);
}
