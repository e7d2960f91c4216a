#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdfstruct/cells.hpp"

namespace pdfstruct {

// Per-cell feature schemas. Geometric4 is the embedding-friendly subset used
// by indexed feeding; Full12 adds the derived distances and the
// character-level statistics.
enum class SchemaKind { Geometric4, Full12 };

class FeatureSchema {
public:
    static FeatureSchema geometric();  // x0, y0, width, height
    static FeatureSchema full();       // + distances, text stats

    SchemaKind kind() const { return kind_; }
    int size() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }

    // Stable FNV-1a hash of the ordered feature names; stored with trained
    // models so inference can reject incompatible inputs.
    std::string hash() const;

    static FeatureSchema from_kind(SchemaKind k);
    static FeatureSchema from_string(const std::string& s);
    std::string to_string() const;

private:
    FeatureSchema(SchemaKind kind, std::vector<std::string> names)
        : kind_(kind), names_(std::move(names)) {}
    SchemaKind kind_;
    std::vector<std::string> names_;
};

using FeatureVector = std::vector<float>;  // values in [0,1], schema order

struct BinVector {
    std::vector<int> bins;  // each in [0, n_bins)
    int n_bins = 0;
};

enum class FeedingMode { Direct, Indexed, Stacked };

FeedingMode feeding_mode_from_string(const std::string& s);
std::string to_string(FeedingMode m);

struct EncodedSequence {
    FeedingMode mode = FeedingMode::Direct;
    int feature_count = 0;
    int n_bins = 0;
    std::vector<FeatureVector> direct;              // Direct
    std::vector<std::uint64_t> indices;             // Indexed, each < n_bins^M
    std::vector<std::vector<std::uint8_t>> stacked; // Stacked, each M*N with M ones

    std::size_t length() const;
};

// Cells must be normalized and in reading order. Distance features at the
// sequence boundaries use the maximal-distance sentinel 1.0.
std::vector<FeatureVector> extract_features(const std::vector<TextCell>& ordered_cells,
                                            const FeatureSchema& schema);

// floor(v*n) clamped to n-1; v must lie in [0,1].
int bin_value(double v, int n);

BinVector bin_features(const FeatureVector& f, int n_bins);

// sum_l n_bins^l * bins[l]; throws when the index range exceeds 2^63.
std::uint64_t linear_index(const BinVector& b);

// Inverse of linear_index (repeated divmod).
BinVector decode_linear_index(std::uint64_t index, int feature_count, int n_bins);

// One-hot per feature, concatenated: position l*N + bins[l] set for each l.
std::vector<std::uint8_t> stack_bins(const BinVector& b);

EncodedSequence encode_sequence(const std::vector<FeatureVector>& features, FeedingMode mode,
                                int n_bins);

}  // namespace pdfstruct
