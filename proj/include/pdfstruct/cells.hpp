#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pdfstruct/error.hpp"

namespace pdfstruct {

constexpr int kNoLabel = -1;

// One PDF printing command's output. Geometry is the lower-left anchored
// bounding box; only derived text statistics are kept, never the text itself,
// so the features stay language-agnostic.
struct TextCell {
    double x0 = 0.0;
    double y0 = 0.0;
    double width = 0.0;
    double height = 0.0;
    int text_length = 0;
    bool starts_with_capital = false;
    bool is_bold = false;
    bool is_italic = false;
    double alnum_ratio = 0.0;
    int label = kNoLabel;  // index into the owning corpus' LabelSet

    bool has_label() const { return label != kNoLabel; }
    double x_center() const { return x0 + width / 2.0; }
    double y_center() const { return y0 + height / 2.0; }
    double x1() const { return x0 + width; }
    double y1() const { return y0 + height; }
};

struct Page {
    std::string page_id;
    std::string layout_id;
    double page_width = 1.0;
    double page_height = 1.0;
    std::vector<TextCell> cells;
};

// Ordered label vocabulary; ids are indices into names().
class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(std::vector<std::string> names);

    int id_of(const std::string& name) const;     // -1 when absent
    int require(const std::string& name) const;   // throws when absent
    const std::string& name_of(int id) const;
    const std::vector<std::string>& names() const { return names_; }
    int size() const { return static_cast<int>(names_.size()); }

    // The 17-label vocabulary used for reporting.
    static LabelSet canonical();

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> ids_;
};

// Divides cell geometry by the page dimensions and clamps the result into the
// unit square (slightly out-of-bounds boxes occur in real PDF streams).
// Returns a new page with page_width/page_height preserved; throws DataError
// on non-positive page dimensions.
Page normalize_geometry(const Page& page);

// True once all cell geometry already lies in the unit square.
bool geometry_normalized(const Page& page);

// Topological reading order over the geometric precedence relation:
//   A precedes B when their x-intervals overlap by at least half the narrower
//   width and A's y-center is strictly above B's, or when their y-intervals
//   overlap by at least half the shorter height and A ends left of B's start.
// Returns the permutation of cell indices; deterministic for fixed input.
std::vector<int> reading_order_indices(const Page& page);

// Convenience wrapper returning the reordered cells.
std::vector<TextCell> reading_order(const Page& page);

}  // namespace pdfstruct
