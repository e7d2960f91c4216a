#include "pdfstruct/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "pdfstruct/nn/rng.hpp"

namespace pdfstruct {

namespace {

constexpr double kLeft = 0.06;
constexpr double kRight = 0.94;
constexpr double kGutter = 0.04;
constexpr double kContentTop = 0.95;
constexpr double kContentBottom = 0.09;
constexpr double kHeaderY = 0.975;
constexpr double kFooterY = 0.018;

CellStyle style(double cap, double bold, double italic, double alo, double ahi, int llo,
                int lhi) {
    CellStyle s;
    s.capital_p = cap;
    s.bold_p = bold;
    s.italic_p = italic;
    s.alnum_lo = alo;
    s.alnum_hi = ahi;
    s.len_lo = llo;
    s.len_hi = lhi;
    return s;
}

Band band(std::string label, BandScope scope, double p, int llo, int lhi, double h,
          double wlo, double whi, double indent, CellStyle st) {
    Band b;
    b.label = std::move(label);
    b.scope = scope;
    b.occurrence_p = p;
    b.lines_lo = llo;
    b.lines_hi = lhi;
    b.line_height = h;
    b.width_lo = wlo;
    b.width_hi = whi;
    b.indent = indent;
    b.style = st;
    return b;
}

// Shared styles. "formula" and "citation" deliberately share the body text
// geometry so that only the character-level features can separate them;
// "reference" is separated from "citation" by capitalization and alnum range.
const CellStyle kTitle = style(1.0, 1.0, 0.0, 0.85, 0.95, 20, 55);
const CellStyle kAuthor = style(1.0, 0.0, 0.1, 0.80, 0.90, 12, 40);
const CellStyle kAffil = style(1.0, 0.0, 0.6, 0.75, 0.88, 18, 50);
const CellStyle kAbstract = style(0.45, 0.0, 0.0, 0.84, 0.93, 65, 100);
const CellStyle kSub1 = style(1.0, 1.0, 0.0, 0.80, 0.92, 12, 38);
const CellStyle kSub2 = style(1.0, 1.0, 0.3, 0.80, 0.92, 8, 30);
const CellStyle kText = style(0.25, 0.0, 0.0, 0.86, 0.96, 62, 100);
const CellStyle kFormula = style(0.05, 0.0, 0.0, 0.25, 0.55, 18, 60);
const CellStyle kCitation = style(0.05, 0.0, 0.0, 0.66, 0.74, 62, 100);
const CellStyle kList = style(0.55, 0.0, 0.0, 0.80, 0.90, 35, 85);
const CellStyle kCaption = style(0.90, 0.0, 0.0, 0.84, 0.94, 45, 95);
const CellStyle kTable = style(0.30, 0.0, 0.0, 0.45, 0.75, 4, 22);
const CellStyle kPicture = style(0.10, 0.0, 0.0, 0.30, 0.60, 2, 14);
const CellStyle kReference = style(0.85, 0.0, 0.0, 0.76, 0.84, 50, 90);
const CellStyle kPageHeader = style(0.70, 0.0, 0.5, 0.80, 0.90, 25, 60);
const CellStyle kPageFooter = style(0.20, 0.0, 0.0, 0.50, 0.90, 3, 25);
const CellStyle kFootnote = style(0.70, 0.0, 0.0, 0.78, 0.90, 45, 95);

Band table_band(double p) {
    Band b = band("table", BandScope::Column, p, 3, 5, 0.016, 0.9, 1.0, 0.0, kTable);
    b.table_grid = true;
    b.grid_cols_lo = 2;
    b.grid_cols_hi = 4;
    return b;
}

struct PageBuilder {
    std::mt19937_64& rng;
    Page& page;
    std::vector<std::string>& cell_labels;
    bool centered = false;  // title-page style full-width bands

    double u(double lo, double hi) { return nn::uniform_range(rng, lo, hi); }
    bool chance(double p) { return nn::uniform01(rng) < p; }
    int irange(int lo, int hi) {
        return lo + static_cast<int>(nn::uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
    }

    void emit(const std::string& label, double x0, double y0, double w, double h,
              const CellStyle& st) {
        TextCell c;
        c.x0 = std::clamp(x0, 0.0, 1.0 - 1e-4);
        c.y0 = std::clamp(y0, 0.0, 1.0 - 1e-4);
        c.width = std::min(w, 1.0 - c.x0);
        c.height = std::min(h, 1.0 - c.y0);
        c.text_length = irange(st.len_lo, st.len_hi);
        c.starts_with_capital = chance(st.capital_p);
        c.is_bold = chance(st.bold_p);
        c.is_italic = chance(st.italic_p);
        c.alnum_ratio = u(st.alnum_lo, st.alnum_hi);
        page.cells.push_back(c);
        cell_labels.push_back(label);
    }

    // Emits one band inside [x_lo, x_hi]; returns the new y cursor.
    double run_band(const Band& b, double x_lo, double x_hi, double y) {
        if (!chance(b.occurrence_p)) {
            return y;
        }
        const double usable = x_hi - x_lo;
        if (b.table_grid) {
            return run_table(b, x_lo, x_hi, y);
        }
        const int lines = irange(b.lines_lo, b.lines_hi);
        const double base_w = usable * u(b.width_lo, b.width_hi) - b.indent;
        for (int i = 0; i < lines && y - b.line_height >= kContentBottom; ++i) {
            double w = base_w * u(0.97, 1.0);
            if (lines > 1 && i == lines - 1) {
                w = base_w * u(0.35, 0.9);  // ragged paragraph end
            }
            double x0 = x_lo + b.indent + u(-0.004, 0.004);
            if (centered) {
                x0 = x_lo + (usable - w) / 2.0 + u(-0.004, 0.004);
            }
            const double h = b.line_height * u(0.95, 1.05);
            y -= h;
            emit(b.label, x0, y + u(-0.002, 0.002), w, h, b.style);
            y -= u(0.004, 0.008);
        }
        y -= u(0.008, 0.016);  // inter-band gap
        return y;
    }

    // Small grid emitted column-major, which is the order the precedence
    // relation linearizes side-by-side runs in.
    double run_table(const Band& b, double x_lo, double x_hi, double y) {
        const int rows = irange(b.lines_lo, b.lines_hi);
        const int gcols = irange(b.grid_cols_lo, b.grid_cols_hi);
        const double usable = (x_hi - x_lo) * u(b.width_lo, b.width_hi);
        const double col_w = (usable - 0.012 * (gcols - 1)) / gcols;
        const double row_pitch = b.line_height + 0.005;
        if (y - rows * row_pitch < kContentBottom) {
            return y;
        }
        for (int gc = 0; gc < gcols; ++gc) {
            for (int gr = 0; gr < rows; ++gr) {
                const double x0 = x_lo + gc * (col_w + 0.012) + u(-0.002, 0.002);
                const double cy = y - (gr + 1) * row_pitch;
                emit(b.label, x0, cy + u(-0.001, 0.001), col_w * u(0.85, 1.0), b.line_height,
                     b.style);
            }
        }
        y -= rows * row_pitch;
        y -= u(0.008, 0.016);
        return y;
    }
};

Page generate_page(const LayoutTemplate& tpl, const std::string& page_id, std::uint64_t seed,
                   std::vector<std::string>& cell_labels) {
    Page page;
    page.page_id = page_id;
    page.layout_id = tpl.layout_id;
    page.page_width = 1.0;
    page.page_height = 1.0;

    std::mt19937_64 rng(seed);
    PageBuilder pb{rng, page, cell_labels, tpl.layout_id == "title-page"};

    for (const auto& b : tpl.bands) {
        if (b.scope == BandScope::HeaderStrip && pb.chance(b.occurrence_p)) {
            const double w = (kRight - kLeft) * pb.u(b.width_lo, b.width_hi);
            pb.emit(b.label, kLeft + pb.u(0.0, 0.02), kHeaderY + pb.u(-0.002, 0.002), w,
                    b.line_height, b.style);
        }
    }

    double y = kContentTop;
    for (const auto& b : tpl.bands) {
        if (b.scope == BandScope::FullWidth) {
            y = pb.run_band(b, kLeft, kRight, y);
        }
    }

    const bool two_col = tpl.columns == 2;
    const double col_w = two_col ? (kRight - kLeft - kGutter) / 2.0 : (kRight - kLeft);
    const double col_top = y;
    for (int col = 0; col < (two_col ? 2 : 1); ++col) {
        const double x_lo = kLeft + col * (col_w + kGutter);
        double cy = col_top;
        for (const auto& b : tpl.bands) {
            if (b.scope == BandScope::Column) {
                cy = pb.run_band(b, x_lo, x_lo + col_w, cy);
                if (cy < kContentBottom) break;
            }
        }
    }

    for (const auto& b : tpl.bands) {
        if (b.scope == BandScope::FooterStrip && pb.chance(b.occurrence_p)) {
            const double w = pb.u(0.65, 0.75);
            pb.emit(b.label, 0.10 + pb.u(0.0, 0.04), kFooterY + pb.u(-0.002, 0.002), w,
                    b.line_height, b.style);
        }
    }
    return page;
}

}  // namespace

std::vector<LayoutTemplate> default_templates() {
    const Band header = band("page-header", BandScope::HeaderStrip, 0.75, 1, 1, 0.012, 0.55, 0.8,
                             0.0, kPageHeader);
    const Band footer = band("page-footer", BandScope::FooterStrip, 0.88, 1, 1, 0.011, 0.65, 0.75,
                             0.0, kPageFooter);

    std::vector<LayoutTemplate> tpls;

    {
        LayoutTemplate t;
        t.layout_id = "single-column";
        t.columns = 1;
        t.bands = {header,
                   band("subtitle-1", BandScope::Column, 0.85, 1, 1, 0.022, 0.30, 0.55, 0.0, kSub1),
                   band("text", BandScope::Column, 1.0, 4, 8, 0.018, 0.88, 1.0, 0.0, kText),
                   band("formula", BandScope::Column, 0.5, 1, 2, 0.018, 0.88, 1.0, 0.0, kFormula),
                   band("text", BandScope::Column, 1.0, 3, 6, 0.018, 0.88, 1.0, 0.0, kText),
                   band("subtitle-2", BandScope::Column, 0.6, 1, 1, 0.019, 0.22, 0.42, 0.02, kSub2),
                   band("text", BandScope::Column, 1.0, 3, 6, 0.018, 0.88, 1.0, 0.0, kText),
                   band("citation", BandScope::Column, 0.5, 1, 3, 0.018, 0.88, 1.0, 0.0, kCitation),
                   band("footnote", BandScope::Column, 0.4, 1, 2, 0.012, 0.80, 0.95, 0.0, kFootnote),
                   footer};
        tpls.push_back(std::move(t));
    }
    {
        LayoutTemplate t;
        t.layout_id = "two-column";
        t.columns = 2;
        t.bands = {header,
                   band("subtitle-1", BandScope::Column, 0.65, 1, 1, 0.022, 0.30, 0.55, 0.0, kSub1),
                   band("text", BandScope::Column, 1.0, 3, 6, 0.018, 0.88, 1.0, 0.0, kText),
                   band("formula", BandScope::Column, 0.45, 1, 2, 0.018, 0.88, 1.0, 0.0, kFormula),
                   band("text", BandScope::Column, 0.9, 2, 4, 0.018, 0.88, 1.0, 0.0, kText),
                   band("list", BandScope::Column, 0.4, 2, 5, 0.018, 0.75, 0.95, 0.03, kList),
                   band("citation", BandScope::Column, 0.45, 1, 3, 0.018, 0.88, 1.0, 0.0, kCitation),
                   band("text", BandScope::Column, 0.8, 2, 5, 0.018, 0.88, 1.0, 0.0, kText),
                   band("footnote", BandScope::Column, 0.25, 1, 2, 0.012, 0.80, 0.95, 0.0, kFootnote),
                   footer};
        tpls.push_back(std::move(t));
    }
    {
        LayoutTemplate t;
        t.layout_id = "title-page";
        t.columns = 1;
        t.bands = {band("page-header", BandScope::HeaderStrip, 0.3, 1, 1, 0.012, 0.55, 0.8, 0.0,
                        kPageHeader),
                   band("title", BandScope::FullWidth, 1.0, 1, 2, 0.034, 0.50, 0.80, 0.0, kTitle),
                   band("author", BandScope::FullWidth, 1.0, 1, 2, 0.020, 0.35, 0.60, 0.0, kAuthor),
                   band("affiliation", BandScope::FullWidth, 1.0, 1, 2, 0.016, 0.40, 0.70, 0.0,
                        kAffil),
                   band("abstract", BandScope::FullWidth, 1.0, 3, 6, 0.016, 0.92, 1.0, 0.0,
                        kAbstract),
                   band("subtitle-1", BandScope::Column, 0.5, 1, 1, 0.022, 0.30, 0.55, 0.0, kSub1),
                   band("text", BandScope::Column, 1.0, 2, 6, 0.018, 0.88, 1.0, 0.0, kText),
                   footer};
        tpls.push_back(std::move(t));
    }
    {
        LayoutTemplate t;
        t.layout_id = "references-page";
        t.columns = 1;
        t.bands = {header,
                   band("subtitle-1", BandScope::Column, 1.0, 1, 1, 0.022, 0.25, 0.45, 0.0, kSub1),
                   band("reference", BandScope::Column, 1.0, 10, 20, 0.015, 0.88, 1.0, 0.0,
                        kReference),
                   footer};
        tpls.push_back(std::move(t));
    }
    {
        LayoutTemplate t;
        t.layout_id = "table-heavy";
        t.columns = 1;
        t.bands = {header,
                   band("subtitle-1", BandScope::Column, 0.6, 1, 1, 0.022, 0.30, 0.55, 0.0, kSub1),
                   band("text", BandScope::Column, 1.0, 1, 3, 0.018, 0.88, 1.0, 0.0, kText),
                   band("caption", BandScope::Column, 1.0, 1, 1, 0.014, 0.80, 1.0, 0.0, kCaption),
                   table_band(1.0),
                   band("text", BandScope::Column, 1.0, 2, 4, 0.018, 0.88, 1.0, 0.0, kText),
                   band("caption", BandScope::Column, 0.6, 1, 1, 0.014, 0.80, 1.0, 0.0, kCaption),
                   table_band(0.6),
                   band("text", BandScope::Column, 0.5, 1, 3, 0.018, 0.88, 1.0, 0.0, kText),
                   footer};
        tpls.push_back(std::move(t));
    }
    {
        LayoutTemplate t;
        t.layout_id = "list-heavy";
        t.columns = 1;
        t.bands = {header,
                   band("subtitle-1", BandScope::Column, 0.7, 1, 1, 0.022, 0.30, 0.55, 0.0, kSub1),
                   band("list", BandScope::Column, 1.0, 5, 10, 0.018, 0.75, 0.95, 0.03, kList),
                   band("text", BandScope::Column, 1.0, 2, 4, 0.018, 0.88, 1.0, 0.0, kText),
                   band("subtitle-2", BandScope::Column, 0.35, 1, 1, 0.019, 0.22, 0.42, 0.02,
                        kSub2),
                   band("list", BandScope::Column, 1.0, 3, 7, 0.018, 0.75, 0.95, 0.03, kList),
                   band("text", BandScope::Column, 0.6, 2, 4, 0.018, 0.88, 1.0, 0.0, kText),
                   footer};
        tpls.push_back(std::move(t));
    }
    {
        LayoutTemplate t;
        t.layout_id = "figure-heavy";
        t.columns = 1;
        t.bands = {header,
                   band("picture", BandScope::Column, 1.0, 3, 7, 0.014, 0.12, 0.16, 0.05, kPicture),
                   band("caption", BandScope::Column, 1.0, 1, 1, 0.014, 0.80, 1.0, 0.0, kCaption),
                   band("text", BandScope::Column, 1.0, 2, 5, 0.018, 0.88, 1.0, 0.0, kText),
                   band("picture", BandScope::Column, 0.6, 2, 5, 0.014, 0.12, 0.16, 0.05, kPicture),
                   band("caption", BandScope::Column, 0.6, 1, 1, 0.014, 0.80, 1.0, 0.0, kCaption),
                   band("text", BandScope::Column, 0.5, 2, 4, 0.018, 0.88, 1.0, 0.0, kText),
                   footer};
        tpls.push_back(std::move(t));
    }
    return tpls;
}

Corpus generate(const std::vector<LayoutTemplate>& templates, int pages_per_template,
                std::uint64_t seed) {
    if (templates.empty() || pages_per_template < 1) {
        throw ConfigError("generate: need at least one template and one page per template");
    }
    std::vector<Page> pages;
    std::vector<std::vector<std::string>> page_cell_labels;
    for (std::size_t t = 0; t < templates.size(); ++t) {
        for (int i = 0; i < pages_per_template; ++i) {
            char suffix[16];
            std::snprintf(suffix, sizeof(suffix), "-%04d", i);
            std::vector<std::string> labels;
            pages.push_back(generate_page(
                templates[t], templates[t].layout_id + suffix,
                nn::mix_seed(seed, t * 1000003ULL + static_cast<std::uint64_t>(i)), labels));
            page_cell_labels.push_back(std::move(labels));
        }
    }

    std::set<std::string> names;
    for (const auto& ls : page_cell_labels) {
        names.insert(ls.begin(), ls.end());
    }
    Corpus corpus;
    corpus.label_set = LabelSet(std::vector<std::string>(names.begin(), names.end()));
    for (std::size_t p = 0; p < pages.size(); ++p) {
        for (std::size_t c = 0; c < pages[p].cells.size(); ++c) {
            pages[p].cells[c].label = corpus.label_set.require(page_cell_labels[p][c]);
        }
    }
    corpus.pages = std::move(pages);
    return corpus;
}

Corpus generate_default(int pages_per_template, std::uint64_t seed) {
    return generate(default_templates(), pages_per_template, seed);
}

}  // namespace pdfstruct
