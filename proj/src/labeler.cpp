#include "pdfstruct/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "pdfstruct/evaluation.hpp"
#include "pdfstruct/nn/attention.hpp"
#include "pdfstruct/nn/decoder.hpp"
#include "pdfstruct/nn/layers.hpp"
#include "pdfstruct/nn/param_io.hpp"
#include "pdfstruct/nn/recurrent.hpp"
#include "pdfstruct/nn/rng.hpp"
#include "pdfstruct/nn/transformer.hpp"

using nlohmann::json;

namespace pdfstruct {

using Matf = nn::Matrix<float>;

Variant variant_from_string(const std::string& s) {
    for (int v = 0; v <= 5; ++v) {
        if (s == "model-" + std::to_string(v)) return static_cast<Variant>(v);
    }
    throw ConfigError("unknown model variant: " + s);
}

std::string to_string(Variant v) { return "model-" + std::to_string(static_cast<int>(v)); }

std::string ModelConfig::summary() const {
    std::string s = to_string(variant) + "-" + pdfstruct::to_string(mode) +
                    (active_decoder ? "-dec" : "-nodec") + "-k" + std::to_string(layers) + "-d" +
                    std::to_string(dim);
    if (variant == Variant::Model5) {
        s += "-h" + std::to_string(heads);
    }
    if (page_concat) {
        s += "-doc";
    }
    return s;
}

void validate_config(const ModelConfig& cfg) {
    if (cfg.layers < 1) {
        throw ConfigError("config rule violated: layer count k must be >= 1");
    }
    if (cfg.dim < 1) {
        throw ConfigError("config rule violated: encoding dimension d must be >= 1");
    }
    if (cfg.n_bins < 2) {
        throw ConfigError("config rule violated: bin count N must be >= 2");
    }
    if (cfg.mode == FeedingMode::Indexed && cfg.schema != SchemaKind::Geometric4) {
        throw ConfigError("config rule violated: indexed feeding requires the geometric schema");
    }
    if (cfg.variant == Variant::Model5) {
        if (cfg.active_decoder) {
            throw ConfigError("config rule violated: model-5 never has an active decoder");
        }
        if (cfg.heads < 1 || cfg.dim % cfg.heads != 0) {
            throw ConfigError("config rule violated: model-5 needs d divisible by head count h");
        }
    }
}

namespace {

bool is_bidirectional(Variant v) { return v == Variant::Model2 || v == Variant::Model4; }
bool has_attention(Variant v) { return v == Variant::Model3 || v == Variant::Model4; }
bool is_gru(Variant v) { return v == Variant::Model0; }

std::int64_t indexed_vocab(int n_bins, int features) {
    std::int64_t v = 1;
    for (int i = 0; i < features; ++i) {
        if (v > (1LL << 40) / n_bins) {
            throw ConfigError("indexed vocabulary overflows: N=" + std::to_string(n_bins) +
                              " M=" + std::to_string(features));
        }
        v *= n_bins;
    }
    return v;
}

int argmax_row(const float* row, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i) {
        if (row[i] > row[best]) best = i;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Layer stack for one model variant. The struct is cheap to copy before the
// caches fill, which is how concurrent inference stays race-free: predict
// copies the net (parameter pointers shared, caches private) and runs on the
// copy.
// ---------------------------------------------------------------------------

struct Net {
    ModelConfig cfg;
    int feat_count = 0;
    int enc_input = 0;
    int enc_out = 0;    // S
    int head_input = 0;
    bool has_input_proj = false;
    bool self_attention = false;

    nn::Embedding<float> embed;
    nn::Linear<float> input_proj;
    std::vector<nn::RecurrentLayer<float, nn::GruCell<float>>> gru;
    std::vector<nn::RecurrentLayer<float, nn::LstmCell<float>>> lstm;
    std::vector<nn::BidirectionalLayer<float, nn::LstmCell<float>>> bilstm;
    nn::TransformerEncoder<float> transformer;
    nn::AdditiveSelfAttention<float> attn;
    nn::Decoder<float, nn::GruCell<float>> dec_gru;
    nn::Decoder<float, nn::LstmCell<float>> dec_lstm;
    nn::Linear<float> head;

    void init(nn::ParamStore<float>& store, const ModelConfig& config, std::mt19937_64& rng) {
        cfg = config;
        feat_count = cfg.feature_schema().size();
        const int d = cfg.dim;

        switch (cfg.mode) {
            case FeedingMode::Direct:
                has_input_proj = true;
                input_proj.init(store, "input", feat_count, d, rng);
                enc_input = d;
                break;
            case FeedingMode::Indexed:
                embed.init(store, "input.embed", indexed_vocab(cfg.n_bins, feat_count), d, rng);
                enc_input = d;
                break;
            case FeedingMode::Stacked:
                if (cfg.variant == Variant::Model5) {
                    has_input_proj = true;
                    input_proj.init(store, "input", feat_count * cfg.n_bins, d, rng);
                    enc_input = d;
                } else {
                    enc_input = feat_count * cfg.n_bins;
                }
                break;
        }

        if (cfg.variant == Variant::Model5) {
            transformer.init(store, "encoder", d, cfg.layers, cfg.heads, rng);
            enc_out = d;
        } else if (is_gru(cfg.variant)) {
            gru.resize(static_cast<std::size_t>(cfg.layers));
            int in = enc_input;
            for (int l = 0; l < cfg.layers; ++l) {
                gru[static_cast<std::size_t>(l)].init(store, "encoder.l" + std::to_string(l), in,
                                                      d, rng, false);
                in = d;
            }
            enc_out = d;
        } else if (is_bidirectional(cfg.variant)) {
            bilstm.resize(static_cast<std::size_t>(cfg.layers));
            int in = enc_input;
            for (int l = 0; l < cfg.layers; ++l) {
                bilstm[static_cast<std::size_t>(l)].init(store, "encoder.l" + std::to_string(l),
                                                         in, d, rng);
                in = 2 * d;
            }
            enc_out = 2 * d;
        } else {
            lstm.resize(static_cast<std::size_t>(cfg.layers));
            int in = enc_input;
            for (int l = 0; l < cfg.layers; ++l) {
                lstm[static_cast<std::size_t>(l)].init(store, "encoder.l" + std::to_string(l), in,
                                                       d, rng, false);
                in = d;
            }
            enc_out = d;
        }

        self_attention = has_attention(cfg.variant) && !cfg.active_decoder;
        if (self_attention) {
            attn.init(store, "attention", enc_out, enc_out, rng);
            head_input = 2 * enc_out;
        } else if (cfg.active_decoder) {
            if (is_gru(cfg.variant)) {
                dec_gru.init(store, "decoder", enc_out, d, cfg.label_count,
                             has_attention(cfg.variant), rng);
            } else {
                dec_lstm.init(store, "decoder", enc_out, d, cfg.label_count,
                              has_attention(cfg.variant), rng);
            }
            head_input = d;
        } else {
            head_input = enc_out;
        }
        head.init(store, "head", head_input, cfg.label_count, rng);
    }

    Matf to_matrix(const EncodedSequence& es) const {
        const int n = static_cast<int>(es.length());
        switch (es.mode) {
            case FeedingMode::Direct: {
                Matf x(n, feat_count);
                for (int t = 0; t < n; ++t) {
                    const auto& f = es.direct[static_cast<std::size_t>(t)];
                    std::copy(f.begin(), f.end(), x.row(t));
                }
                return x;
            }
            case FeedingMode::Stacked: {
                Matf x(n, feat_count * cfg.n_bins);
                for (int t = 0; t < n; ++t) {
                    const auto& s = es.stacked[static_cast<std::size_t>(t)];
                    float* row = x.row(t);
                    for (std::size_t i = 0; i < s.size(); ++i) {
                        row[i] = static_cast<float>(s[i]);
                    }
                }
                return x;
            }
            default:
                throw ConfigError("to_matrix: indexed sequences go through the embedding");
        }
    }

    Matf encode(const EncodedSequence& es, PredictStats* stats) {
        es_mode_last_ = es.mode;
        Matf x;
        if (es.mode == FeedingMode::Indexed) {
            x = embed.forward(es.indices);
        } else {
            x = to_matrix(es);
            if (has_input_proj) {
                x = input_proj.forward(x);
            }
        }
        if (cfg.variant == Variant::Model5) {
            x = transformer.forward(x);
            if (stats) stats->encoder_layer_passes += cfg.layers;
        } else if (is_gru(cfg.variant)) {
            for (auto& l : gru) {
                x = l.forward(x);
                if (stats) stats->encoder_layer_passes += 1;
            }
        } else if (is_bidirectional(cfg.variant)) {
            for (auto& l : bilstm) {
                x = l.forward(x);
                if (stats) stats->encoder_layer_passes += 2;
            }
        } else {
            for (auto& l : lstm) {
                x = l.forward(x);
                if (stats) stats->encoder_layer_passes += 1;
            }
        }
        return x;
    }

    Matf forward_train(const EncodedSequence& es, const std::vector<int>& teacher_prev) {
        Matf s = encode(es, nullptr);
        if (cfg.active_decoder) {
            Matf h = is_gru(cfg.variant) ? dec_gru.forward_teacher(s, teacher_prev)
                                         : dec_lstm.forward_teacher(s, teacher_prev);
            return head.forward(h);
        }
        if (self_attention) {
            return head.forward(attn.forward(s));
        }
        return head.forward(s);
    }

    void backward_train(const Matf& dlogits) {
        Matf d = head.backward(dlogits);
        if (cfg.active_decoder) {
            d = is_gru(cfg.variant) ? dec_gru.backward(d) : dec_lstm.backward(d);
        } else if (self_attention) {
            d = attn.backward(d);
        }
        if (cfg.variant == Variant::Model5) {
            d = transformer.backward(d);
        } else if (is_gru(cfg.variant)) {
            for (auto it = gru.rbegin(); it != gru.rend(); ++it) {
                d = it->backward(d);
            }
        } else if (is_bidirectional(cfg.variant)) {
            for (auto it = bilstm.rbegin(); it != bilstm.rend(); ++it) {
                d = it->backward(d);
            }
        } else {
            for (auto it = lstm.rbegin(); it != lstm.rend(); ++it) {
                d = it->backward(d);
            }
        }
        if (es_mode_last_ == FeedingMode::Indexed) {
            embed.backward(d);
        } else if (has_input_proj) {
            input_proj.backward(d);
        }
    }

    FeedingMode es_mode_last_ = FeedingMode::Direct;

    Matf infer_logits(const EncodedSequence& es, PredictStats* stats) {
        const int n = static_cast<int>(es.length());
        Matf s = encode(es, stats);
        if (!cfg.active_decoder) {
            return head.forward(self_attention ? attn.forward(s) : s);
        }
        Matf logits(n, cfg.label_count);
        auto run = [&](auto& dec) {
            dec.begin(s);
            int prev = dec.start_token();
            for (int t = 0; t < n; ++t) {
                const float* h = dec.step(prev);
                kern::matvec<float>(head.w->value.data.data(),
                                    static_cast<std::size_t>(cfg.label_count),
                                    static_cast<std::size_t>(head_input), h,
                                    head.b->value.data.data(), logits.row(t));
                prev = argmax_row(logits.row(t), cfg.label_count);
                if (stats) stats->decoder_steps += 1;
            }
        };
        if (is_gru(cfg.variant)) {
            run(dec_gru);
        } else {
            run(dec_lstm);
        }
        return logits;
    }
};

struct SequenceData {
    std::vector<int> targets;
    std::vector<char> mask;
    EncodedSequence enc;
    int labeled = 0;
};

}  // namespace

struct Model::Impl {
    ModelConfig cfg;
    LabelSet labels;
    TrainingInfo tinfo;
    std::uint64_t seed = 0;
    nn::ParamStore<float> store;
    Net net;

    SequenceData prepare(const std::vector<const Page*>& pages) const {
        SequenceData sd;
        std::vector<TextCell> ordered;
        for (const Page* p : pages) {
            Page norm;
            const Page* use = p;
            if (!geometry_normalized(*p)) {
                norm = normalize_geometry(*p);
                use = &norm;
            }
            for (const TextCell& c : reading_order(*use)) {
                ordered.push_back(c);
            }
        }
        for (const TextCell& c : ordered) {
            sd.targets.push_back(c.label);
            sd.mask.push_back(c.has_label() ? 1 : 0);
            if (c.has_label()) ++sd.labeled;
        }
        auto feats = extract_features(ordered, cfg.feature_schema());
        sd.enc = encode_sequence(feats, cfg.mode, cfg.n_bins);
        return sd;
    }

    std::vector<int> teacher_prev(const SequenceData& sd) const {
        const int start = cfg.label_count;  // start token row
        std::vector<int> prev(sd.targets.size(), start);
        for (std::size_t t = 1; t < sd.targets.size(); ++t) {
            prev[t] = sd.targets[t - 1] >= 0 ? sd.targets[t - 1] : start;
        }
        return prev;
    }
};

Model::Model() : impl_(std::make_unique<Impl>()) {}
Model::~Model() = default;
Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;

Model Model::build(const ModelConfig& cfg, const LabelSet& labels, std::uint64_t seed) {
    if (labels.size() < 2) {
        throw ConfigError("need at least 2 labels, got " + std::to_string(labels.size()));
    }
    Model m;
    m.impl_->cfg = cfg;
    m.impl_->cfg.label_count = labels.size();
    if (cfg.mode == FeedingMode::Indexed) {
        m.impl_->cfg.schema = SchemaKind::Geometric4;
    }
    validate_config(m.impl_->cfg);
    m.impl_->labels = labels;
    m.impl_->seed = seed;
    std::mt19937_64 rng(seed);
    m.impl_->net.init(m.impl_->store, m.impl_->cfg, rng);
    return m;
}

const ModelConfig& Model::config() const { return impl_->cfg; }
const LabelSet& Model::labels() const { return impl_->labels; }
const TrainingInfo& Model::training_info() const { return impl_->tinfo; }
std::uint64_t Model::init_seed() const { return impl_->seed; }

std::size_t Model::param_count() const { return impl_->store.total_count(); }

std::string Model::schema_hash() const { return impl_->cfg.feature_schema().hash(); }

std::string Model::model_id() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const std::string& s) {
        for (char c : s) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
            h *= 1099511628211ULL;
        }
    };
    mix(impl_->cfg.summary());
    for (const auto& n : impl_->labels.names()) mix(n);
    mix(std::to_string(impl_->seed));
    char buf[10];
    std::snprintf(buf, sizeof(buf), "%08x", static_cast<unsigned>(h & 0xffffffffu));
    return impl_->cfg.summary() + "-" + buf;
}

std::vector<CellPrediction> Model::predict_page(const Page& page, PredictStats* stats) const {
    std::vector<const Page*> one{&page};
    return predict_document(one, stats).front();
}

std::vector<std::vector<CellPrediction>> Model::predict_document(
    const std::vector<const Page*>& pages, PredictStats* stats) const {
    std::vector<std::vector<CellPrediction>> results;
    results.reserve(pages.size());
    if (pages.empty()) {
        return results;
    }

    auto run_sequence = [&](const std::vector<const Page*>& group)
        -> std::vector<CellPrediction> {
        Impl& im = *impl_;
        SequenceData sd = im.prepare(group);
        const int n = static_cast<int>(sd.enc.length());
        if (n == 0) {
            return {};
        }
        Net net = im.net;  // private caches, shared parameters
        Matf logits = net.infer_logits(sd.enc, stats);
        std::vector<CellPrediction> preds(static_cast<std::size_t>(n));
        std::vector<float> probs(static_cast<std::size_t>(im.cfg.label_count));
        for (int t = 0; t < n; ++t) {
            nn::softmax_row<float>(logits.row(t), im.cfg.label_count, probs.data());
            const int best = argmax_row(logits.row(t), im.cfg.label_count);
            preds[static_cast<std::size_t>(t)] = {best, probs[static_cast<std::size_t>(best)]};
        }
        return preds;
    };

    auto scatter = [&](const std::vector<const Page*>& group,
                       const std::vector<CellPrediction>& flat) {
        std::size_t offset = 0;
        for (const Page* p : group) {
            Page norm;
            const Page* use = p;
            if (!geometry_normalized(*p)) {
                norm = normalize_geometry(*p);
                use = &norm;
            }
            const auto order = reading_order_indices(*use);
            std::vector<CellPrediction> page_preds(order.size());
            for (std::size_t i = 0; i < order.size(); ++i) {
                page_preds[static_cast<std::size_t>(order[i])] = flat[offset + i];
            }
            offset += order.size();
            results.push_back(std::move(page_preds));
        }
    };

    if (impl_->cfg.page_concat) {
        scatter(pages, run_sequence(pages));
    } else {
        for (const Page* p : pages) {
            std::vector<const Page*> one{p};
            scatter(one, run_sequence(one));
        }
    }
    return results;
}

TrainingInfo Model::train(const Corpus& train_corpus, const Corpus& valid_corpus,
                          const TrainOptions& options) {
    Impl& im = *impl_;
    if (train_corpus.label_set.names() != im.labels.names()) {
        throw ConfigError("training corpus label set differs from the model's label set");
    }

    std::vector<std::vector<const Page*>> sequences;
    if (im.cfg.page_concat) {
        sequences = group_documents(train_corpus);
    } else {
        for (const auto& p : train_corpus.pages) {
            sequences.push_back({&p});
        }
    }

    std::vector<SequenceData> data;
    std::vector<std::string> seq_ids;
    data.reserve(sequences.size());
    for (const auto& group : sequences) {
        SequenceData sd = im.prepare(group);
        if (sd.labeled == 0) {
            continue;
        }
        seq_ids.push_back(group.front()->page_id);
        data.push_back(std::move(sd));
    }
    if (data.empty()) {
        throw DataError("training corpus has no labeled cells");
    }

    nn::AdamConfig adam{options.lr, options.beta1, options.beta2, options.eps};
    std::mt19937_64 shuffle_rng(nn::mix_seed(options.seed, 0xA11CEULL));

    auto snapshot = [&]() {
        std::vector<std::vector<float>> vals;
        for (const auto& p : im.store.params()) {
            vals.push_back(p->value.data);
        }
        return vals;
    };
    auto restore = [&](const std::vector<std::vector<float>>& vals) {
        const auto& ps = im.store.params();
        for (std::size_t i = 0; i < ps.size(); ++i) {
            ps[i]->value.data = vals[i];
        }
    };

    auto validate = [&]() {
        ConfusionMatrix cm(im.labels.size());
        std::vector<std::vector<const Page*>> val_groups;
        if (im.cfg.page_concat) {
            val_groups = group_documents(valid_corpus);
        } else {
            for (const auto& p : valid_corpus.pages) val_groups.push_back({&p});
        }
        for (const auto& group : val_groups) {
            auto preds = predict_document(group);
            for (std::size_t pi = 0; pi < group.size(); ++pi) {
                const auto& cells = group[pi]->cells;
                for (std::size_t c = 0; c < cells.size(); ++c) {
                    if (cells[c].has_label()) {
                        cm.add(cells[c].label, preds[pi][c].label);
                    }
                }
            }
        }
        return cm.total() == 0 ? 0.0 : metrics(cm).weighted_f1;
    };

    TrainingInfo info;
    info.seed = options.seed;
    auto best_values = snapshot();
    double best_f1 = -1.0;
    int best_epoch = -1;
    int since_best = 0;

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 1; epoch <= options.max_epochs; ++epoch) {
        nn::shuffle_det(order, shuffle_rng);
        double loss_sum = 0.0;
        std::int64_t labeled_cells = 0;
        for (std::size_t oi = 0; oi < order.size(); ++oi) {
            SequenceData& sd = data[order[oi]];
            Matf logits = im.net.forward_train(sd.enc, im.teacher_prev(sd));
            auto res = nn::softmax_cross_entropy<float>(logits, sd.targets, sd.mask);
            if (!std::isfinite(res.loss)) {
                throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                                      ", sequence '" + seq_ids[order[oi]] + "'");
            }
            loss_sum += res.loss * sd.labeled;
            labeled_cells += sd.labeled;
            im.net.backward_train(res.grad);
            const double gn = im.store.grad_norm();
            if (options.clip_norm > 0.0 && gn > options.clip_norm) {
                im.store.scale_grads(options.clip_norm / gn);
            }
            im.store.adam_step(adam);
        }
        const double val_f1 = validate();
        info.history.push_back({epoch, loss_sum / static_cast<double>(labeled_cells), val_f1});
        info.epochs_run = epoch;
        if (options.verbose) {
            std::fprintf(stderr, "epoch %3d  train_loss %.4f  val_wf1 %.4f\n", epoch,
                         loss_sum / static_cast<double>(labeled_cells), val_f1);
        }
        if (val_f1 > best_f1) {
            best_f1 = val_f1;
            best_epoch = epoch;
            best_values = snapshot();
            since_best = 0;
        } else {
            ++since_best;
            if (since_best >= options.patience) {
                break;
            }
        }
    }

    restore(best_values);
    info.best_epoch = best_epoch;
    info.best_val_f1 = std::max(best_f1, 0.0);
    im.tinfo = info;
    return info;
}

namespace {

json config_to_json(const ModelConfig& cfg) {
    return json{{"variant", to_string(cfg.variant)},
                {"mode", to_string(cfg.mode)},
                {"active_decoder", cfg.active_decoder},
                {"layers", cfg.layers},
                {"dim", cfg.dim},
                {"heads", cfg.heads},
                {"n_bins", cfg.n_bins},
                {"label_count", cfg.label_count},
                {"schema", FeatureSchema::from_kind(cfg.schema).to_string()},
                {"page_concat", cfg.page_concat}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig cfg;
    cfg.variant = variant_from_string(j.at("variant").get<std::string>());
    cfg.mode = feeding_mode_from_string(j.at("mode").get<std::string>());
    cfg.active_decoder = j.at("active_decoder").get<bool>();
    cfg.layers = j.at("layers").get<int>();
    cfg.dim = j.at("dim").get<int>();
    cfg.heads = j.at("heads").get<int>();
    cfg.n_bins = j.at("n_bins").get<int>();
    cfg.label_count = j.at("label_count").get<int>();
    cfg.schema = FeatureSchema::from_string(j.at("schema").get<std::string>()).kind();
    cfg.page_concat = j.at("page_concat").get<bool>();
    return cfg;
}

}  // namespace

void Model::save(const std::string& path) const {
    const Impl& im = *impl_;
    nn::save_params(im.store, path, json{{"schema_hash", schema_hash()}, {"model_id", model_id()}});
    json sidecar = {{"model_id", model_id()},
                    {"schema_hash", schema_hash()},
                    {"labels", im.labels.names()},
                    {"init_seed", im.seed},
                    {"config", config_to_json(im.cfg)},
                    {"training",
                     {{"epochs_run", im.tinfo.epochs_run},
                      {"best_epoch", im.tinfo.best_epoch},
                      {"best_val_f1", im.tinfo.best_val_f1},
                      {"seed", im.tinfo.seed}}}};
    std::ofstream out(path + ".json", std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path + ".json");
    }
    out << sidecar.dump(2) << '\n';
}

Model Model::load(const std::string& path) {
    std::ifstream in(path + ".json");
    if (!in) {
        throw IoError("cannot open model sidecar: " + path + ".json");
    }
    json sidecar;
    try {
        sidecar = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(path + ".json: " + std::string(e.what()));
    }
    ModelConfig cfg = config_from_json(sidecar.at("config"));
    LabelSet labels(sidecar.at("labels").get<std::vector<std::string>>());
    Model m = build(cfg, labels, sidecar.value("init_seed", std::uint64_t{0}));

    if (sidecar.at("schema_hash").get<std::string>() != m.schema_hash()) {
        throw DataError("incompatible model: feature schema hash mismatch in " + path);
    }

    nn::ParamStore<float> loaded;
    json header = nn::load_params(loaded, path);
    if (header.value("schema_hash", std::string{}) != m.schema_hash()) {
        throw DataError("incompatible model: container schema hash mismatch in " + path);
    }
    const auto& src = loaded.params();
    const auto& dst = m.impl_->store.params();
    if (src.size() != dst.size()) {
        throw DataError("parameter container does not match the model architecture: " + path);
    }
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i]->name != dst[i]->name || src[i]->rows() != dst[i]->rows() ||
            src[i]->cols() != dst[i]->cols()) {
            throw DataError("parameter mismatch at '" + src[i]->name + "' in " + path);
        }
        dst[i]->value.data = src[i]->value.data;
    }
    auto tj = sidecar.value("training", json::object());
    m.impl_->tinfo.epochs_run = tj.value("epochs_run", 0);
    m.impl_->tinfo.best_epoch = tj.value("best_epoch", -1);
    m.impl_->tinfo.best_val_f1 = tj.value("best_val_f1", 0.0);
    m.impl_->tinfo.seed = tj.value("seed", std::uint64_t{0});
    return m;
}

std::vector<std::vector<const Page*>> group_documents(const Corpus& corpus) {
    std::vector<std::vector<const Page*>> groups;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& p : corpus.pages) {
        const auto pos = p.page_id.find('#');
        if (pos == std::string::npos) {
            groups.push_back({&p});
            continue;
        }
        const std::string doc = p.page_id.substr(0, pos);
        auto it = index.find(doc);
        if (it == index.end()) {
            index.emplace(doc, groups.size());
            groups.push_back({&p});
        } else {
            groups[it->second].push_back(&p);
        }
    }
    return groups;
}

}  // namespace pdfstruct
