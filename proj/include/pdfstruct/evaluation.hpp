#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdfstruct/labeler.hpp"

namespace pdfstruct {

// Cell-label confusion counts; entry (truth, predicted).
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int n_labels);

    void add(int truth, int predicted);
    std::int64_t at(int truth, int predicted) const;
    int size() const { return n_; }
    std::int64_t total() const { return total_; }
    std::int64_t row_sum(int truth) const;     // support
    std::int64_t col_sum(int predicted) const;

private:
    int n_;
    std::vector<std::int64_t> counts_;
    std::int64_t total_ = 0;
};

// Tallies plain prediction/truth id sequences of equal length.
ConfusionMatrix confusion(const std::vector<int>& predictions, const std::vector<int>& truth,
                          int n_labels);

struct LabelMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};

struct MetricsReport {
    std::vector<LabelMetrics> per_label;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    // filled by benchmark-aware callers; zero otherwise
    double ms_per_page = 0.0;
    std::int64_t model_bytes = 0;
    std::size_t param_count = 0;
};

// Per-label P/R/F1 with the zero-denominator convention (0, never NaN) and
// support-weighted averages. Throws on an all-zero matrix.
MetricsReport metrics(const ConfusionMatrix& cm);

nlohmann::json metrics_to_json(const MetricsReport& report, const std::vector<std::string>& labels);

// Confusion over the labeled cells of the given pages.
ConfusionMatrix evaluate_confusion(const Model& model, const Corpus& corpus,
                                   const std::vector<std::string>& page_ids);

MetricsReport evaluate_model(const Model& model, const Corpus& corpus,
                             const std::vector<std::string>& page_ids);

struct BenchmarkResult {
    double ms_per_page = 0.0;
    std::int64_t serialized_bytes = 0;
    std::size_t param_count = 0;
};

// Wall-clock prediction time averaged over `repetitions` warm passes (one
// extra warm-up pass runs first); size from a serialized container.
BenchmarkResult benchmark(const Model& model, const std::vector<const Page*>& pages,
                          int repetitions = 3);

struct GridRow {
    ModelConfig config;
    bool ok = false;
    std::string error;
    MetricsReport report;
    TrainingInfo training;
};

// Trains and evaluates every configuration on the manifest's train/test
// split. Individual failures are recorded in the row. `jobs` bounds the
// number of concurrently trained configurations; rows come back in config
// order regardless.
std::vector<GridRow> grid_search(const Corpus& corpus, const SplitManifest& split,
                                 const std::vector<ModelConfig>& configs,
                                 const TrainOptions& options, int jobs = 1);

// Aligned text table over the grid rows, best weighted F1 first.
std::string grid_table(const std::vector<GridRow>& rows);

nlohmann::json grid_to_json(const std::vector<GridRow>& rows);

}  // namespace pdfstruct
