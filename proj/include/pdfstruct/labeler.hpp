#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pdfstruct/dataset.hpp"
#include "pdfstruct/features.hpp"

namespace pdfstruct {

// model-0: uni GRU          model-1: uni LSTM       model-2: bi LSTM
// model-3: uni LSTM + attn  model-4: bi LSTM + attn model-5: transformer
enum class Variant { Model0, Model1, Model2, Model3, Model4, Model5 };

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);

struct ModelConfig {
    Variant variant = Variant::Model4;
    FeedingMode mode = FeedingMode::Stacked;
    bool active_decoder = false;
    int layers = 2;    // k
    int dim = 64;      // d
    int heads = 4;     // h, transformer only
    int n_bins = 20;   // N
    int label_count = 0;  // C, filled at build time from the label set
    SchemaKind schema = SchemaKind::Full12;
    bool page_concat = false;

    FeatureSchema feature_schema() const { return FeatureSchema::from_kind(schema); }
    std::string summary() const;
};

// Throws ConfigError naming the violated rule.
void validate_config(const ModelConfig& cfg);

struct TrainOptions {
    int max_epochs = 100;
    int patience = 10;           // epochs without validation improvement
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 5.0;
    std::uint64_t seed = 0;
    bool verbose = false;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_weighted_f1 = 0.0;
};

struct TrainingInfo {
    int epochs_run = 0;
    int best_epoch = -1;
    double best_val_f1 = 0.0;
    std::uint64_t seed = 0;
    std::vector<EpochStats> history;
};

struct PredictStats {
    std::int64_t encoder_layer_passes = 0;  // directional sequence sweeps
    std::int64_t decoder_steps = 0;         // own-output feedback steps
};

struct CellPrediction {
    int label = 0;
    float confidence = 0.0f;
};

class Model {
public:
    Model();
    ~Model();
    Model(Model&&) noexcept;
    Model& operator=(Model&&) noexcept;
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;

    // Fresh model with seed-deterministic initial parameters.
    static Model build(const ModelConfig& cfg, const LabelSet& labels, std::uint64_t seed);

    const ModelConfig& config() const;
    const LabelSet& labels() const;
    const TrainingInfo& training_info() const;
    std::uint64_t init_seed() const;

    std::size_t param_count() const;
    std::string schema_hash() const;
    std::string model_id() const;

    // Per-cell label + softmax confidence, aligned with page.cells order.
    std::vector<CellPrediction> predict_page(const Page& page, PredictStats* stats = nullptr) const;

    // Pages treated as one sequence when page_concat is set, independently
    // otherwise; result aligned per input page.
    std::vector<std::vector<CellPrediction>> predict_document(
        const std::vector<const Page*>& pages, PredictStats* stats = nullptr) const;

    // Trains in place; returns and records the history. Keeps the parameters
    // of the best validation epoch.
    TrainingInfo train(const Corpus& train_corpus, const Corpus& valid_corpus,
                       const TrainOptions& options);

    // Parameter container at `path`, JSON sidecar at `path`.json.
    void save(const std::string& path) const;
    static Model load(const std::string& path);

    struct Impl;
    Impl& impl() { return *impl_; }
    const Impl& impl() const { return *impl_; }

private:
    std::unique_ptr<Impl> impl_;
};

// Pages grouped into documents by the page_id prefix before '#'; ids without
// '#' form singleton documents. Order follows the corpus.
std::vector<std::vector<const Page*>> group_documents(const Corpus& corpus);

}  // namespace pdfstruct
