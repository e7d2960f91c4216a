#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "pdfstruct/dataset.hpp"
#include "pdfstruct/synth.hpp"

using namespace pdfstruct;
namespace fs = std::filesystem;

namespace {

struct TempFile {
    fs::path path;
    explicit TempFile(const std::string& name, const std::string& content = {}) {
        path = fs::temp_directory_path() / (std::to_string(::getpid()) + "-" + name);
        if (!content.empty()) {
            std::ofstream(path) << content;
        }
    }
    ~TempFile() { std::error_code ec; fs::remove(path, ec); }
    std::string str() const { return path.string(); }
};

bool corpora_equal(const Corpus& a, const Corpus& b) {
    if (a.label_set.names() != b.label_set.names()) return false;
    if (a.pages.size() != b.pages.size()) return false;
    for (std::size_t p = 0; p < a.pages.size(); ++p) {
        const Page& x = a.pages[p];
        const Page& y = b.pages[p];
        if (x.page_id != y.page_id || x.layout_id != y.layout_id) return false;
        if (x.cells.size() != y.cells.size()) return false;
        for (std::size_t c = 0; c < x.cells.size(); ++c) {
            const TextCell& u = x.cells[c];
            const TextCell& v = y.cells[c];
            if (std::abs(u.x0 - v.x0) > 1e-12 || std::abs(u.y0 - v.y0) > 1e-12 ||
                std::abs(u.width - v.width) > 1e-12 || std::abs(u.height - v.height) > 1e-12 ||
                u.text_length != v.text_length ||
                u.starts_with_capital != v.starts_with_capital || u.is_bold != v.is_bold ||
                u.is_italic != v.is_italic || std::abs(u.alnum_ratio - v.alnum_ratio) > 1e-12 ||
                u.label != v.label) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

TEST_CASE("load_corpus reads a one-page file") {
    TempFile f("one.json", R"([{"page_id":"p1","layout_id":"l","width":1.0,"height":1.0,
        "cells":[{"x0":0.1,"y0":0.5,"width":0.2,"height":0.02,"text_length":12,
                  "starts_with_capital":true,"is_bold":false,"is_italic":false,
                  "alnum_ratio":0.9,"label":"text","unknown_field":123}]}])");
    Corpus c = load_corpus(f.str());
    REQUIRE(c.pages.size() == 1);
    CHECK(c.label_set.names() == std::vector<std::string>{"text"});
    CHECK(c.pages[0].cells[0].label == 0);
}

TEST_CASE("load_corpus rejects duplicate page ids") {
    TempFile f("dup.json", R"([{"page_id":"p1","width":1,"height":1,"cells":[]},
                               {"page_id":"p1","width":1,"height":1,"cells":[]}])");
    CHECK_THROWS_AS(load_corpus(f.str()), DataError);
}

TEST_CASE("load_corpus reports parse position") {
    TempFile f("bad.jsonl", "{\"page_id\":\"p1\",\"width\":1,\"height\":1,\"cells\":[]}\n{nope\n");
    try {
        load_corpus(f.str());
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
}

TEST_CASE("load_corpus normalizes raw geometry by page dimensions") {
    TempFile f("raw.json", R"([{"page_id":"p1","width":500,"height":800,
        "cells":[{"x0":100,"y0":40,"width":50,"height":8,"text_length":3,
                  "alnum_ratio":1.0,"label":"text"}]}])");
    Corpus c = load_corpus(f.str());
    CHECK(c.pages[0].cells[0].x0 == doctest::Approx(0.2));
    CHECK(c.pages[0].cells[0].width == doctest::Approx(0.1));
}

TEST_CASE("corpus round-trips through json and jsonl") {
    Corpus c = generate_default(3, 99);
    for (const char* name : {"rt.json", "rt.jsonl"}) {
        TempFile f(name);
        save_corpus(c, f.str());
        Corpus back = load_corpus(f.str());
        CHECK(corpora_equal(c, back));
    }
}

TEST_CASE("label_distribution of an empty page set is zero") {
    Corpus c = generate_default(2, 1);
    auto d = label_distribution(c, {});
    CHECK(d.total_labeled_cells == 0);
    for (auto v : d.cell_counts) CHECK(v == 0);
}

TEST_CASE("label_distribution counts cells and pages") {
    Corpus c;
    c.label_set = LabelSet({"text", "title"});
    Page p1;
    p1.page_id = "p1";
    for (int i = 0; i < 3; ++i) {
        TextCell t;
        t.x0 = 0.1; t.y0 = 0.1 * (i + 1); t.width = 0.5; t.height = 0.02;
        t.label = c.label_set.require("text");
        p1.cells.push_back(t);
    }
    Page p2 = p1;
    p2.page_id = "p2";
    p2.cells.resize(1);
    TextCell title;
    title.x0 = 0.2; title.y0 = 0.9; title.width = 0.4; title.height = 0.03;
    title.label = c.label_set.require("title");
    p2.cells.push_back(title);
    c.pages = {p1, p2};

    auto d = label_distribution(c, {"p1", "p2"});
    CHECK(d.cell_counts[static_cast<std::size_t>(c.label_set.require("text"))] == 4);
    CHECK(d.page_counts[static_cast<std::size_t>(c.label_set.require("text"))] == 2);
    CHECK(d.cell_counts[static_cast<std::size_t>(c.label_set.require("title"))] == 1);
    CHECK(d.page_counts[static_cast<std::size_t>(c.label_set.require("title"))] == 1);
    CHECK_THROWS_AS(label_distribution(c, {"nope"}), DataError);
}

TEST_CASE("label_distribution matches a brute-force recount") {
    Corpus c = generate_default(15, 4);  // ~100 pages
    auto ids = c.page_ids();
    auto d = label_distribution(c, ids);
    std::vector<std::int64_t> cells(static_cast<std::size_t>(c.label_set.size()), 0);
    std::vector<std::int64_t> pages(static_cast<std::size_t>(c.label_set.size()), 0);
    for (const auto& p : c.pages) {
        std::set<int> seen;
        for (const auto& cell : p.cells) {
            if (cell.has_label()) {
                ++cells[static_cast<std::size_t>(cell.label)];
                seen.insert(cell.label);
            }
        }
        for (int l : seen) ++pages[static_cast<std::size_t>(l)];
    }
    CHECK(d.cell_counts == cells);
    CHECK(d.page_counts == pages);
}

TEST_CASE("balanced_split: single-label corpus splits 6/4") {
    Corpus c;
    c.label_set = LabelSet({"text"});
    for (int i = 0; i < 10; ++i) {
        Page p;
        p.page_id = "p" + std::to_string(i);
        TextCell t;
        t.x0 = 0.1; t.y0 = 0.5; t.width = 0.5; t.height = 0.02; t.label = 0;
        p.cells.push_back(t);
        c.pages.push_back(p);
    }
    auto m = balanced_split(c, 0.6, 7);
    CHECK(m.train_page_ids.size() == 6);
    CHECK(m.test_page_ids.size() == 4);
}

TEST_CASE("balanced_split: rounding rule keeps the test set non-empty") {
    // P1 {title, text}, P2 {text}, P3 {text}; title is rarest so P1 goes to
    // train; of the remaining text pages, one must land in test
    Corpus c;
    c.label_set = LabelSet({"text", "title"});
    auto mk_page = [&](const std::string& id, bool with_title) {
        Page p;
        p.page_id = id;
        TextCell t;
        t.x0 = 0.1; t.y0 = 0.5; t.width = 0.5; t.height = 0.02;
        t.label = c.label_set.require("text");
        p.cells.push_back(t);
        if (with_title) {
            TextCell u = t;
            u.y0 = 0.9;
            u.label = c.label_set.require("title");
            p.cells.push_back(u);
        }
        c.pages.push_back(p);
    };
    mk_page("P1", true);
    mk_page("P2", false);
    mk_page("P3", false);
    auto m = balanced_split(c, 0.6, 123);
    CHECK(m.train_page_ids.size() == 2);
    CHECK(m.test_page_ids.size() == 1);
    CHECK(std::find(m.train_page_ids.begin(), m.train_page_ids.end(), "P1") !=
          m.train_page_ids.end());
    CHECK(m.test_page_ids[0] != "P1");
}

TEST_CASE("balanced_split is a deterministic partition") {
    Corpus c = generate_default(20, 5);
    auto m1 = balanced_split(c, 0.6, 42);
    auto m2 = balanced_split(c, 0.6, 42);
    CHECK(m1.train_page_ids == m2.train_page_ids);
    CHECK(m1.test_page_ids == m2.test_page_ids);

    std::set<std::string> all(m1.train_page_ids.begin(), m1.train_page_ids.end());
    for (const auto& id : m1.test_page_ids) {
        CHECK(all.insert(id).second);  // disjoint
    }
    CHECK(all.size() == c.pages.size());  // exhaustive

    auto m3 = balanced_split(c, 0.6, 43);
    CHECK(m1.train_page_ids != m3.train_page_ids);
}

TEST_CASE("balanced_split keeps rare labels in both sets and shares close") {
    Corpus c = generate_default(30, 9);  // 210 pages
    auto m = balanced_split(c, 0.6, 0);
    auto full = label_distribution(c, c.page_ids());
    auto train = label_distribution(c, m.train_page_ids);
    auto test = label_distribution(c, m.test_page_ids);
    for (int l = 0; l < c.label_set.size(); ++l) {
        if (full.page_counts[static_cast<std::size_t>(l)] >= 2) {
            CHECK(train.page_counts[static_cast<std::size_t>(l)] >= 1);
            CHECK(test.page_counts[static_cast<std::size_t>(l)] >= 1);
        }
        if (full.page_counts[static_cast<std::size_t>(l)] >= 10) {
            CHECK(std::abs(train.cell_share(l) - test.cell_share(l)) <= 0.05);
        }
    }
}

TEST_CASE("manifest round-trips") {
    SplitManifest m;
    m.ratio = 0.6;
    m.seed = 17;
    m.train_page_ids = {"a", "b"};
    m.test_page_ids = {"c"};
    TempFile f("manifest.json");
    save_manifest(m, f.str());
    auto back = load_manifest(f.str());
    CHECK(back.ratio == m.ratio);
    CHECK(back.seed == m.seed);
    CHECK(back.train_page_ids == m.train_page_ids);
    CHECK(back.test_page_ids == m.test_page_ids);
}

TEST_CASE("subset preserves id order and rejects unknown pages") {
    Corpus c = generate_default(2, 3);
    std::vector<std::string> ids = {c.pages[3].page_id, c.pages[0].page_id};
    Corpus s = subset(c, ids);
    REQUIRE(s.pages.size() == 2);
    CHECK(s.pages[0].page_id == ids[0]);
    CHECK(s.pages[1].page_id == ids[1]);
    CHECK_THROWS_AS(subset(c, {"missing"}), DataError);
}
