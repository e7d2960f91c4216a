#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pdfstruct/cells.hpp"

namespace pdfstruct {

struct Corpus {
    std::vector<Page> pages;
    LabelSet label_set;

    const Page& page_by_id(const std::string& id) const;
    bool has_page(const std::string& id) const;
    std::vector<std::string> page_ids() const;
};

struct SplitManifest {
    double ratio = 0.6;
    std::uint64_t seed = 0;
    std::vector<std::string> train_page_ids;
    std::vector<std::string> test_page_ids;
};

struct LabelDistribution {
    std::vector<std::string> label_names;
    std::vector<std::int64_t> cell_counts;   // labeled cells per label
    std::vector<std::int64_t> page_counts;   // pages containing the label
    std::int64_t total_labeled_cells = 0;
    std::int64_t total_pages = 0;

    // cell share of one label in [0,1]; 0 when the set has no labeled cells
    double cell_share(int label_id) const;
};

// Corpus files are JSON arrays of page objects (.json) or one page object per
// line (.jsonl). Cell geometry is stored normalized; pages arriving with raw
// coordinates are detected by out-of-unit-square geometry and normalized by
// their page dimensions on load. Unknown fields are ignored.
Corpus load_corpus(const std::string& path);
void save_corpus(const Corpus& corpus, const std::string& path);

LabelDistribution label_distribution(const Corpus& corpus,
                                     const std::vector<std::string>& page_ids);

// Label-balanced train/test assignment: labels are visited from the one on
// the fewest pages to the one on the most; at each step the not-yet-assigned
// pages carrying the label are shuffled with the seeded generator and split
// by `ratio` (rounded, but never leaving either side empty when two or more
// pages remain). Pages with no labeled cell are assigned last the same way.
SplitManifest balanced_split(const Corpus& corpus, double ratio, std::uint64_t seed);

SplitManifest load_manifest(const std::string& path);
void save_manifest(const SplitManifest& manifest, const std::string& path);

// Pages of the corpus restricted to the given ids (order preserved from the
// id list); label_set is shared with the source corpus.
Corpus subset(const Corpus& corpus, const std::vector<std::string>& page_ids);

}  // namespace pdfstruct
