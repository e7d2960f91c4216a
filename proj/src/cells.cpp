#include "pdfstruct/cells.hpp"

#include <algorithm>
#include <cmath>

namespace pdfstruct {

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (!ids_.emplace(names_[i], static_cast<int>(i)).second) {
            throw DataError("duplicate label name: " + names_[i]);
        }
    }
}

int LabelSet::id_of(const std::string& name) const {
    auto it = ids_.find(name);
    return it == ids_.end() ? -1 : it->second;
}

int LabelSet::require(const std::string& name) const {
    int id = id_of(name);
    if (id < 0) {
        throw DataError("unknown label: " + name);
    }
    return id;
}

const std::string& LabelSet::name_of(int id) const {
    if (id < 0 || id >= size()) {
        throw DataError("label id out of range: " + std::to_string(id));
    }
    return names_[static_cast<std::size_t>(id)];
}

LabelSet LabelSet::canonical() {
    return LabelSet({"title", "author", "affiliation", "abstract", "subtitle-1", "subtitle-2",
                     "text", "list", "caption", "table", "picture", "formula", "citation",
                     "reference", "page-header", "page-footer", "footnote"});
}

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Keeps width/height strictly positive while fitting the box into [0,1].
void clamp_cell(TextCell& c) {
    constexpr double kMinExtent = 1e-6;
    c.x0 = clamp01(c.x0);
    c.y0 = clamp01(c.y0);
    c.width = std::min(c.width, 1.0 - c.x0);
    c.height = std::min(c.height, 1.0 - c.y0);
    if (c.width < kMinExtent) {
        c.width = kMinExtent;
        c.x0 = std::min(c.x0, 1.0 - kMinExtent);
    }
    if (c.height < kMinExtent) {
        c.height = kMinExtent;
        c.y0 = std::min(c.y0, 1.0 - kMinExtent);
    }
    c.alnum_ratio = clamp01(c.alnum_ratio);
    if (c.text_length == 0) {
        c.alnum_ratio = 0.0;
        c.starts_with_capital = false;
    }
}

}  // namespace

Page normalize_geometry(const Page& page) {
    if (!(page.page_width > 0.0) || !(page.page_height > 0.0)) {
        throw DataError("page '" + page.page_id + "' has non-positive dimensions");
    }
    Page out = page;
    for (auto& c : out.cells) {
        c.x0 /= page.page_width;
        c.width /= page.page_width;
        c.y0 /= page.page_height;
        c.height /= page.page_height;
        clamp_cell(c);
    }
    return out;
}

bool geometry_normalized(const Page& page) {
    constexpr double kTol = 1e-9;
    for (const auto& c : page.cells) {
        if (c.x0 < -kTol || c.y0 < -kTol || c.width <= 0.0 || c.height <= 0.0 ||
            c.x1() > 1.0 + kTol || c.y1() > 1.0 + kTol) {
            return false;
        }
    }
    return true;
}

namespace {

bool precedes(const TextCell& a, const TextCell& b) {
    const double x_overlap = std::min(a.x1(), b.x1()) - std::max(a.x0, b.x0);
    const double min_w = std::min(a.width, b.width);
    if (x_overlap >= 0.5 * min_w && a.y_center() > b.y_center()) {
        return true;
    }
    const double y_overlap = std::min(a.y1(), b.y1()) - std::max(a.y0, b.y0);
    const double min_h = std::min(a.height, b.height);
    return y_overlap >= 0.5 * min_h && a.x1() <= b.x0;
}

// Selection key among ready cells: leftmost column first, then top to bottom,
// then original position.
bool ready_before(const Page& p, int i, int j) {
    const TextCell& a = p.cells[static_cast<std::size_t>(i)];
    const TextCell& b = p.cells[static_cast<std::size_t>(j)];
    if (a.x0 != b.x0) return a.x0 < b.x0;
    if (a.y_center() != b.y_center()) return a.y_center() > b.y_center();
    return i < j;
}

}  // namespace

std::vector<int> reading_order_indices(const Page& page) {
    const int n = static_cast<int>(page.cells.size());
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(n));
    if (n == 0) {
        return order;
    }

    std::vector<std::vector<int>> succ(static_cast<std::size_t>(n));
    std::vector<int> indegree(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j && precedes(page.cells[static_cast<std::size_t>(i)],
                                   page.cells[static_cast<std::size_t>(j)])) {
                succ[static_cast<std::size_t>(i)].push_back(j);
                ++indegree[static_cast<std::size_t>(j)];
            }
        }
    }

    std::vector<char> emitted(static_cast<std::size_t>(n), 0);
    while (static_cast<int>(order.size()) < n) {
        int best = -1;
        // prefer ready cells; if the relation cycled on pathological geometry,
        // fall back to the same key over the remainder so the order stays total
        for (int pass = 0; pass < 2 && best < 0; ++pass) {
            for (int i = 0; i < n; ++i) {
                if (emitted[static_cast<std::size_t>(i)]) continue;
                if (pass == 0 && indegree[static_cast<std::size_t>(i)] != 0) continue;
                if (best < 0 || ready_before(page, i, best)) best = i;
            }
        }
        emitted[static_cast<std::size_t>(best)] = 1;
        order.push_back(best);
        for (int s : succ[static_cast<std::size_t>(best)]) {
            --indegree[static_cast<std::size_t>(s)];
        }
    }
    return order;
}

std::vector<TextCell> reading_order(const Page& page) {
    std::vector<TextCell> out;
    out.reserve(page.cells.size());
    for (int i : reading_order_indices(page)) {
        out.push_back(page.cells[static_cast<std::size_t>(i)]);
    }
    return out;
}

}  // namespace pdfstruct
