#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdfstruct/dataset.hpp"

namespace pdfstruct {

// Style statistics for one generated region; the text itself never exists,
// only the derived per-cell statistics.
struct CellStyle {
    double capital_p = 0.5;
    double bold_p = 0.0;
    double italic_p = 0.0;
    double alnum_lo = 0.8;
    double alnum_hi = 0.95;
    int len_lo = 40;
    int len_hi = 90;
};

enum class BandScope { HeaderStrip, FullWidth, Column, FooterStrip };

// One vertical run of same-label cells. Table bands emit a small grid
// (column-major, matching the reading-order relation); all other bands emit
// left-aligned stacked lines.
struct Band {
    std::string label;
    BandScope scope = BandScope::Column;
    double occurrence_p = 1.0;
    int lines_lo = 1;
    int lines_hi = 1;
    double line_height = 0.018;
    double indent = 0.0;           // from the column/band left edge
    double width_lo = 0.85;        // fraction of the usable band width
    double width_hi = 1.0;
    CellStyle style;
    bool table_grid = false;
    int grid_cols_lo = 2;
    int grid_cols_hi = 4;
};

struct LayoutTemplate {
    std::string layout_id;
    int columns = 1;  // 1 or 2
    std::vector<Band> bands;
};

// The seven default publishing layouts.
std::vector<LayoutTemplate> default_templates();

// Deterministic synthetic corpus: every cell labeled, geometry normalized,
// generation order consistent with reading_order, label distribution skewed
// towards "text". Positions carry about 2% jitter so labels stay separable
// but not trivially so.
Corpus generate(const std::vector<LayoutTemplate>& templates, int pages_per_template,
                std::uint64_t seed);

// generate(default_templates(), pages_per_template, seed)
Corpus generate_default(int pages_per_template, std::uint64_t seed);

}  // namespace pdfstruct
