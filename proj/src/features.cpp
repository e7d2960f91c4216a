#include "pdfstruct/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace pdfstruct {

namespace {

const std::vector<std::string> kGeometricNames = {"x0", "y0", "width", "height"};

const std::vector<std::string> kFullNames = {
    "x0",          "y0",          "width",      "height",
    "vdist_prev",  "vdist_next",  "hdist_prev", "hdist_next",
    "text_length", "starts_with_capital", "is_bold", "alnum_ratio"};

}  // namespace

FeatureSchema FeatureSchema::geometric() {
    return FeatureSchema(SchemaKind::Geometric4, kGeometricNames);
}

FeatureSchema FeatureSchema::full() { return FeatureSchema(SchemaKind::Full12, kFullNames); }

FeatureSchema FeatureSchema::from_kind(SchemaKind k) {
    return k == SchemaKind::Geometric4 ? geometric() : full();
}

FeatureSchema FeatureSchema::from_string(const std::string& s) {
    if (s == "geometric") return geometric();
    if (s == "full") return full();
    throw ConfigError("unknown feature schema: " + s);
}

std::string FeatureSchema::to_string() const {
    return kind_ == SchemaKind::Geometric4 ? "geometric" : "full";
}

std::string FeatureSchema::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](char c) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 1099511628211ULL;
    };
    for (const auto& n : names_) {
        for (char c : n) mix(c);
        mix(',');
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

FeedingMode feeding_mode_from_string(const std::string& s) {
    if (s == "direct") return FeedingMode::Direct;
    if (s == "indexed") return FeedingMode::Indexed;
    if (s == "stacked") return FeedingMode::Stacked;
    throw ConfigError("unknown feeding mode: " + s);
}

std::string to_string(FeedingMode m) {
    switch (m) {
        case FeedingMode::Direct: return "direct";
        case FeedingMode::Indexed: return "indexed";
        case FeedingMode::Stacked: return "stacked";
    }
    return "?";
}

std::size_t EncodedSequence::length() const {
    switch (mode) {
        case FeedingMode::Direct: return direct.size();
        case FeedingMode::Indexed: return indices.size();
        case FeedingMode::Stacked: return stacked.size();
    }
    return 0;
}

namespace {

float clamp01f(double v) { return static_cast<float>(std::min(1.0, std::max(0.0, v))); }

}  // namespace

std::vector<FeatureVector> extract_features(const std::vector<TextCell>& cells,
                                            const FeatureSchema& schema) {
    const std::size_t n = cells.size();
    std::vector<FeatureVector> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const TextCell& c = cells[i];
        FeatureVector f;
        f.reserve(static_cast<std::size_t>(schema.size()));
        f.push_back(clamp01f(c.x0));
        f.push_back(clamp01f(c.y0));
        f.push_back(clamp01f(c.width));
        f.push_back(clamp01f(c.height));
        if (schema.kind() == SchemaKind::Full12) {
            // center-to-center distances; sentinel 1.0 beyond the sequence ends
            const bool has_prev = i > 0;
            const bool has_next = i + 1 < n;
            f.push_back(has_prev ? clamp01f(std::abs(c.y_center() - cells[i - 1].y_center()))
                                 : 1.0f);
            f.push_back(has_next ? clamp01f(std::abs(c.y_center() - cells[i + 1].y_center()))
                                 : 1.0f);
            f.push_back(has_prev ? clamp01f(std::abs(c.x_center() - cells[i - 1].x_center()))
                                 : 1.0f);
            f.push_back(has_next ? clamp01f(std::abs(c.x_center() - cells[i + 1].x_center()))
                                 : 1.0f);
            f.push_back(clamp01f(c.text_length / 100.0));
            f.push_back(c.starts_with_capital ? 1.0f : 0.0f);
            f.push_back(c.is_bold ? 1.0f : 0.0f);
            f.push_back(clamp01f(c.alnum_ratio));
        }
        out[i] = std::move(f);
    }
    return out;
}

int bin_value(double v, int n) {
    if (n < 2) {
        throw ConfigError("bin count must be >= 2, got " + std::to_string(n));
    }
    if (!(v >= 0.0 && v <= 1.0)) {
        throw DataError("value out of [0,1] for binning: " + std::to_string(v));
    }
    return std::min(n - 1, static_cast<int>(std::floor(v * n)));
}

BinVector bin_features(const FeatureVector& f, int n_bins) {
    BinVector b;
    b.n_bins = n_bins;
    b.bins.reserve(f.size());
    for (float v : f) {
        b.bins.push_back(bin_value(static_cast<double>(v), n_bins));
    }
    return b;
}

std::uint64_t linear_index(const BinVector& b) {
    const std::uint64_t n = static_cast<std::uint64_t>(b.n_bins);
    std::uint64_t index = 0;
    std::uint64_t stride = 1;
    for (std::size_t l = 0; l < b.bins.size(); ++l) {
        const int bin = b.bins[l];
        if (bin < 0 || bin >= b.n_bins) {
            throw DataError("bin out of range: " + std::to_string(bin));
        }
        if (l > 0) {
            if (stride > (1ULL << 62) / n) {
                throw ConfigError("linear index range overflows: N=" + std::to_string(b.n_bins) +
                                  " M=" + std::to_string(b.bins.size()));
            }
            stride *= n;
        }
        index += stride * static_cast<std::uint64_t>(bin);
    }
    return index;
}

BinVector decode_linear_index(std::uint64_t index, int feature_count, int n_bins) {
    BinVector b;
    b.n_bins = n_bins;
    b.bins.resize(static_cast<std::size_t>(feature_count));
    const std::uint64_t n = static_cast<std::uint64_t>(n_bins);
    for (int l = 0; l < feature_count; ++l) {
        b.bins[static_cast<std::size_t>(l)] = static_cast<int>(index % n);
        index /= n;
    }
    return b;
}

std::vector<std::uint8_t> stack_bins(const BinVector& b) {
    std::vector<std::uint8_t> out(b.bins.size() * static_cast<std::size_t>(b.n_bins), 0);
    for (std::size_t l = 0; l < b.bins.size(); ++l) {
        out[l * static_cast<std::size_t>(b.n_bins) + static_cast<std::size_t>(b.bins[l])] = 1;
    }
    return out;
}

EncodedSequence encode_sequence(const std::vector<FeatureVector>& features, FeedingMode mode,
                                int n_bins) {
    EncodedSequence seq;
    seq.mode = mode;
    seq.n_bins = n_bins;
    seq.feature_count = features.empty() ? 0 : static_cast<int>(features.front().size());
    for (const auto& f : features) {
        if (static_cast<int>(f.size()) != seq.feature_count) {
            throw DataError("inconsistent feature vector length in sequence");
        }
    }
    switch (mode) {
        case FeedingMode::Direct:
            seq.direct = features;
            break;
        case FeedingMode::Indexed: {
            if (seq.feature_count > 4) {
                throw ConfigError(
                    "indexed mode supports at most the 4 geometric features, got M=" +
                    std::to_string(seq.feature_count));
            }
            seq.indices.reserve(features.size());
            for (const auto& f : features) {
                seq.indices.push_back(linear_index(bin_features(f, n_bins)));
            }
            break;
        }
        case FeedingMode::Stacked: {
            seq.stacked.reserve(features.size());
            for (const auto& f : features) {
                seq.stacked.push_back(stack_bins(bin_features(f, n_bins)));
            }
            break;
        }
    }
    return seq;
}

}  // namespace pdfstruct
