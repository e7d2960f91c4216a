#include "pdfstruct/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pdfstruct/nn/rng.hpp"

using nlohmann::json;

namespace pdfstruct {

const Page& Corpus::page_by_id(const std::string& id) const {
    for (const auto& p : pages) {
        if (p.page_id == id) return p;
    }
    throw DataError("unknown page_id: " + id);
}

bool Corpus::has_page(const std::string& id) const {
    for (const auto& p : pages) {
        if (p.page_id == id) return true;
    }
    return false;
}

std::vector<std::string> Corpus::page_ids() const {
    std::vector<std::string> ids;
    ids.reserve(pages.size());
    for (const auto& p : pages) ids.push_back(p.page_id);
    return ids;
}

double LabelDistribution::cell_share(int label_id) const {
    if (total_labeled_cells == 0) return 0.0;
    return static_cast<double>(cell_counts[static_cast<std::size_t>(label_id)]) /
           static_cast<double>(total_labeled_cells);
}

namespace {

struct RawPage {
    Page page;
    std::vector<std::string> cell_labels;  // "" = unlabeled, aligned with cells
};

RawPage parse_page(const json& j, const std::string& context) {
    if (!j.is_object()) {
        throw DataError(context + ": page record is not an object");
    }
    RawPage rp;
    try {
        rp.page.page_id = j.at("page_id").get<std::string>();
        rp.page.layout_id = j.value("layout_id", std::string{});
        rp.page.page_width = j.value("width", 1.0);
        rp.page.page_height = j.value("height", 1.0);
        if (auto it = j.find("cells"); it != j.end()) {
            for (const auto& cj : *it) {
                TextCell c;
                c.x0 = cj.at("x0").get<double>();
                c.y0 = cj.at("y0").get<double>();
                c.width = cj.at("width").get<double>();
                c.height = cj.at("height").get<double>();
                c.text_length = cj.value("text_length", 0);
                c.starts_with_capital = cj.value("starts_with_capital", false);
                c.is_bold = cj.value("is_bold", false);
                c.is_italic = cj.value("is_italic", false);
                c.alnum_ratio = cj.value("alnum_ratio", 0.0);
                rp.page.cells.push_back(c);
                rp.cell_labels.push_back(cj.value("label", std::string{}));
            }
        }
    } catch (const json::exception& e) {
        throw DataError(context + ": " + e.what());
    }
    return rp;
}

Corpus assemble(std::vector<RawPage> raw_pages, const std::string& path) {
    std::set<std::string> seen_ids;
    std::set<std::string> label_names;
    for (auto& rp : raw_pages) {
        if (!seen_ids.insert(rp.page.page_id).second) {
            throw DataError(path + ": duplicate page_id '" + rp.page.page_id + "'");
        }
        for (const auto& l : rp.cell_labels) {
            if (!l.empty()) label_names.insert(l);
        }
    }
    Corpus corpus;
    corpus.label_set = LabelSet(std::vector<std::string>(label_names.begin(), label_names.end()));
    corpus.pages.reserve(raw_pages.size());
    for (auto& rp : raw_pages) {
        Page page = geometry_normalized(rp.page) ? rp.page : normalize_geometry(rp.page);
        for (std::size_t i = 0; i < page.cells.size(); ++i) {
            const auto& l = rp.cell_labels[i];
            page.cells[i].label = l.empty() ? kNoLabel : corpus.label_set.require(l);
        }
        corpus.pages.push_back(std::move(page));
    }
    return corpus;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json page_to_json(const Page& page, const LabelSet& labels) {
    json cells = json::array();
    for (const auto& c : page.cells) {
        json cj = {{"x0", c.x0},
                   {"y0", c.y0},
                   {"width", c.width},
                   {"height", c.height},
                   {"text_length", c.text_length},
                   {"starts_with_capital", c.starts_with_capital},
                   {"is_bold", c.is_bold},
                   {"is_italic", c.is_italic},
                   {"alnum_ratio", c.alnum_ratio}};
        if (c.has_label()) {
            cj["label"] = labels.name_of(c.label);
        }
        cells.push_back(std::move(cj));
    }
    return json{{"page_id", page.page_id},
                {"layout_id", page.layout_id},
                {"width", page.page_width},
                {"height", page.page_height},
                {"cells", std::move(cells)}};
}

}  // namespace

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open corpus file: " + path);
    }
    std::vector<RawPage> raw;
    if (ends_with(path, ".jsonl")) {
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::exception& e) {
                throw DataError(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
            raw.push_back(parse_page(j, path + ":" + std::to_string(lineno)));
        }
    } else {
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw DataError(path + ": " + e.what());
        }
        if (!j.is_array()) {
            throw DataError(path + ": corpus file must be a JSON array of pages");
        }
        int record = 0;
        for (const auto& pj : j) {
            raw.push_back(parse_page(pj, path + " record " + std::to_string(record)));
            ++record;
        }
    }
    return assemble(std::move(raw), path);
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    if (ends_with(path, ".jsonl")) {
        for (const auto& p : corpus.pages) {
            out << page_to_json(p, corpus.label_set).dump() << '\n';
        }
    } else {
        json arr = json::array();
        for (const auto& p : corpus.pages) {
            arr.push_back(page_to_json(p, corpus.label_set));
        }
        out << arr.dump(2) << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

LabelDistribution label_distribution(const Corpus& corpus,
                                     const std::vector<std::string>& page_ids) {
    std::unordered_map<std::string, const Page*> index;
    for (const auto& p : corpus.pages) index[p.page_id] = &p;

    LabelDistribution dist;
    dist.label_names = corpus.label_set.names();
    dist.cell_counts.assign(dist.label_names.size(), 0);
    dist.page_counts.assign(dist.label_names.size(), 0);
    dist.total_pages = static_cast<std::int64_t>(page_ids.size());

    std::vector<char> on_page(dist.label_names.size());
    for (const auto& id : page_ids) {
        auto it = index.find(id);
        if (it == index.end()) {
            throw DataError("unknown page_id in distribution request: " + id);
        }
        std::fill(on_page.begin(), on_page.end(), 0);
        for (const auto& c : it->second->cells) {
            if (c.has_label()) {
                ++dist.cell_counts[static_cast<std::size_t>(c.label)];
                ++dist.total_labeled_cells;
                on_page[static_cast<std::size_t>(c.label)] = 1;
            }
        }
        for (std::size_t l = 0; l < on_page.size(); ++l) {
            if (on_page[l]) ++dist.page_counts[l];
        }
    }
    return dist;
}

SplitManifest balanced_split(const Corpus& corpus, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ConfigError("split ratio must lie in (0,1), got " + std::to_string(ratio));
    }
    if (corpus.pages.empty()) {
        throw DataError("cannot split an empty corpus");
    }

    const int n_labels = corpus.label_set.size();
    std::vector<std::vector<std::string>> label_pages(static_cast<std::size_t>(n_labels));
    std::vector<std::string> unlabeled_pages;
    for (const auto& p : corpus.pages) {
        std::vector<char> present(static_cast<std::size_t>(n_labels), 0);
        bool any = false;
        for (const auto& c : p.cells) {
            if (c.has_label()) {
                present[static_cast<std::size_t>(c.label)] = 1;
                any = true;
            }
        }
        for (int l = 0; l < n_labels; ++l) {
            if (present[static_cast<std::size_t>(l)]) {
                label_pages[static_cast<std::size_t>(l)].push_back(p.page_id);
            }
        }
        if (!any) unlabeled_pages.push_back(p.page_id);
    }

    // rarest label first; ties by name for determinism
    std::vector<int> order;
    for (int l = 0; l < n_labels; ++l) order.push_back(l);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto ca = label_pages[static_cast<std::size_t>(a)].size();
        const auto cb = label_pages[static_cast<std::size_t>(b)].size();
        if (ca != cb) return ca < cb;
        return corpus.label_set.name_of(a) < corpus.label_set.name_of(b);
    });

    SplitManifest manifest;
    manifest.ratio = ratio;
    manifest.seed = seed;
    std::set<std::string> assigned;
    std::mt19937_64 rng(seed);

    auto assign_group = [&](std::vector<std::string> pages) {
        pages.erase(std::remove_if(pages.begin(), pages.end(),
                                   [&](const std::string& id) { return assigned.count(id) > 0; }),
                    pages.end());
        if (pages.empty()) return;
        nn::shuffle_det(pages, rng);
        const auto r = static_cast<long>(pages.size());
        long n_train = std::lround(ratio * static_cast<double>(r));
        if (r >= 2) {
            n_train = std::max(1L, std::min(r - 1, n_train));
        }
        for (long i = 0; i < r; ++i) {
            const auto& id = pages[static_cast<std::size_t>(i)];
            assigned.insert(id);
            if (i < n_train) {
                manifest.train_page_ids.push_back(id);
            } else {
                manifest.test_page_ids.push_back(id);
            }
        }
    };

    for (int l : order) {
        assign_group(label_pages[static_cast<std::size_t>(l)]);
    }
    assign_group(std::move(unlabeled_pages));
    return manifest;
}

SplitManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest: " + path);
    }
    json j;
    try {
        j = json::parse(in);
        SplitManifest m;
        m.ratio = j.at("ratio").get<double>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.train_page_ids = j.at("train").get<std::vector<std::string>>();
        m.test_page_ids = j.at("test").get<std::vector<std::string>>();
        return m;
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

void save_manifest(const SplitManifest& manifest, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    json j = {{"ratio", manifest.ratio},
              {"seed", manifest.seed},
              {"train", manifest.train_page_ids},
              {"test", manifest.test_page_ids}};
    out << j.dump(2) << '\n';
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

Corpus subset(const Corpus& corpus, const std::vector<std::string>& page_ids) {
    std::unordered_map<std::string, const Page*> index;
    for (const auto& p : corpus.pages) index[p.page_id] = &p;
    Corpus out;
    out.label_set = corpus.label_set;
    out.pages.reserve(page_ids.size());
    for (const auto& id : page_ids) {
        auto it = index.find(id);
        if (it == index.end()) {
            throw DataError("unknown page_id in subset request: " + id);
        }
        out.pages.push_back(*it->second);
    }
    return out;
}

}  // namespace pdfstruct
