// Command-line front end: synth, split, train, evaluate, predict, grid, serve.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdfstruct/dataset.hpp"
#include "pdfstruct/evaluation.hpp"
#include "pdfstruct/labeler.hpp"
#include "pdfstruct/server.hpp"
#include "pdfstruct/synth.hpp"

using nlohmann::json;
using namespace pdfstruct;

namespace {

// Exit codes: 0 ok, 1 unexpected failure, 2 CLI usage (via CLI11), 3 missing
// or unreadable file, 4 bad data/schema, 5 bad configuration, 6 divergence.
int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const IoError*>(&e)) return 3;
    if (dynamic_cast<const DataError*>(&e)) return 4;
    if (dynamic_cast<const ConfigError*>(&e)) return 5;
    if (dynamic_cast<const DivergenceError*>(&e)) return 6;
    return 1;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    out << j.dump(2) << '\n';
}

struct ConfigFlags {
    std::string variant = "model-4";
    std::string mode = "stacked";
    std::string decoder = "off";
    int k = 2;
    int d = 64;
    int heads = 4;
    int n_bins = 20;
    bool page_concat = false;

    ModelConfig to_config() const {
        ModelConfig cfg;
        cfg.variant = variant_from_string(variant);
        cfg.mode = feeding_mode_from_string(mode);
        if (decoder != "on" && decoder != "off") {
            throw ConfigError("--decoder must be 'on' or 'off'");
        }
        cfg.active_decoder = decoder == "on";
        cfg.layers = k;
        cfg.dim = d;
        cfg.heads = heads;
        cfg.n_bins = n_bins;
        cfg.schema = cfg.mode == FeedingMode::Indexed ? SchemaKind::Geometric4 : SchemaKind::Full12;
        cfg.page_concat = page_concat;
        return cfg;
    }

    void attach(CLI::App* app) {
        app->add_option("--variant", variant, "model variant (model-0..model-5)");
        app->add_option("--mode", mode, "feeding mode: direct|indexed|stacked");
        app->add_option("--decoder", decoder, "active decoder: on|off");
        app->add_option("-k,--layers", k, "encoder layer count");
        app->add_option("-d,--dim", d, "encoding dimension");
        app->add_option("--heads", heads, "attention heads (model-5)");
        app->add_option("--bins", n_bins, "feature bins N");
        app->add_flag("--page-concat", page_concat, "treat documents as one sequence");
    }
};

std::vector<const Page*> corpus_page_ptrs(const Corpus& c) {
    std::vector<const Page*> out;
    out.reserve(c.pages.size());
    for (const auto& p : c.pages) out.push_back(&p);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PDF text-cell structure labeling pipeline"};
    app.require_subcommand(1);

    // ----- synth -----
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic labeled corpus");
    std::string synth_out = "corpus.json";
    int synth_pages = 100;
    std::uint64_t synth_seed = 0;
    synth_cmd->add_option("--out", synth_out, "output corpus path (.json or .jsonl)");
    synth_cmd->add_option("--pages-per-layout", synth_pages, "pages per layout template");
    synth_cmd->add_option("--seed", synth_seed, "generator seed");

    // ----- split -----
    auto* split_cmd = app.add_subcommand("split", "label-balanced train/test split");
    std::string split_corpus, split_out = "manifest.json";
    double split_ratio = 0.6;
    std::uint64_t split_seed = 0;
    split_cmd->add_option("--corpus", split_corpus, "corpus path")->required();
    split_cmd->add_option("--out", split_out, "manifest output path");
    split_cmd->add_option("--ratio", split_ratio, "train fraction (0,1)");
    split_cmd->add_option("--seed", split_seed, "shuffle seed");

    // ----- train -----
    auto* train_cmd = app.add_subcommand("train", "train a model on a split corpus");
    std::string train_corpus, train_manifest, train_model = "model.bin", train_history;
    std::uint64_t train_seed = 0;
    int train_epochs = 100;
    bool train_quiet = false;
    ConfigFlags train_cfg;
    train_cmd->add_option("--corpus", train_corpus, "corpus path")->required();
    train_cmd->add_option("--manifest", train_manifest, "split manifest path")->required();
    train_cmd->add_option("--model,--out", train_model, "model output path");
    train_cmd->add_option("--history", train_history, "write per-epoch history JSON here");
    train_cmd->add_option("--epochs", train_epochs, "max training epochs");
    train_cmd->add_option("--seed", train_seed, "training seed");
    train_cmd->add_flag("--quiet", train_quiet, "suppress per-epoch progress");
    train_cfg.attach(train_cmd);

    // ----- evaluate -----
    auto* eval_cmd = app.add_subcommand("evaluate", "metrics report for a trained model");
    std::string eval_corpus, eval_manifest, eval_model, eval_out;
    std::string eval_on = "test";
    eval_cmd->add_option("--corpus", eval_corpus, "corpus path")->required();
    eval_cmd->add_option("--manifest", eval_manifest, "split manifest path");
    eval_cmd->add_option("--model", eval_model, "model path")->required();
    eval_cmd->add_option("--out", eval_out, "write the JSON report here");
    eval_cmd->add_option("--on", eval_on, "page set: test|train|all");

    // ----- predict -----
    auto* pred_cmd = app.add_subcommand("predict", "label pages with a trained model");
    std::string pred_corpus, pred_model, pred_out = "predictions.json";
    pred_cmd->add_option("--corpus,--pages", pred_corpus, "pages path (corpus JSON)")->required();
    pred_cmd->add_option("--model", pred_model, "model path")->required();
    pred_cmd->add_option("--out", pred_out, "labeled output path");

    // ----- grid -----
    auto* grid_cmd = app.add_subcommand("grid", "architecture/hyper-parameter grid search");
    std::string grid_corpus, grid_manifest, grid_out;
    std::string grid_spec = "ablation";
    std::uint64_t grid_seed = 0;
    int grid_epochs = 12, grid_jobs = 1;
    grid_cmd->add_option("--corpus", grid_corpus, "corpus path")->required();
    grid_cmd->add_option("--manifest", grid_manifest, "split manifest path")->required();
    grid_cmd->add_option("--out", grid_out, "write grid results JSON here");
    grid_cmd->add_option("--spec", grid_spec,
                         "grid to run: 'ablation' or comma-separated variant:mode:decoder rows");
    grid_cmd->add_option("--epochs", grid_epochs, "max epochs per configuration");
    grid_cmd->add_option("--seed", grid_seed, "training seed");
    grid_cmd->add_option("--jobs", grid_jobs, "concurrent configurations");

    // ----- serve -----
    auto* serve_cmd = app.add_subcommand("serve", "run the inference microservice");
    std::string serve_model;
    int serve_port = 8080, serve_batch = 16;
    std::string serve_host = "0.0.0.0";
    serve_cmd->add_option("--model", serve_model, "model path")->required();
    serve_cmd->add_option("--port", serve_port, "listen port");
    serve_cmd->add_option("--host", serve_host, "bind address");
    serve_cmd->add_option("--max-batch-pages", serve_batch, "largest accepted page batch");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth_cmd) {
            Corpus corpus = generate_default(synth_pages, synth_seed);
            save_corpus(corpus, synth_out);
            std::int64_t cells = 0;
            for (const auto& p : corpus.pages) cells += static_cast<std::int64_t>(p.cells.size());
            std::printf("wrote %zu pages / %lld cells / %d labels to %s\n", corpus.pages.size(),
                        static_cast<long long>(cells), corpus.label_set.size(), synth_out.c_str());
        } else if (*split_cmd) {
            Corpus corpus = load_corpus(split_corpus);
            SplitManifest manifest = balanced_split(corpus, split_ratio, split_seed);
            save_manifest(manifest, split_out);
            std::printf("split %zu pages into %zu train / %zu test (ratio %.2f, seed %llu)\n",
                        corpus.pages.size(), manifest.train_page_ids.size(),
                        manifest.test_page_ids.size(), split_ratio,
                        static_cast<unsigned long long>(split_seed));
        } else if (*train_cmd) {
            Corpus corpus = load_corpus(train_corpus);
            SplitManifest manifest = load_manifest(train_manifest);
            Corpus train_c = subset(corpus, manifest.train_page_ids);
            Corpus test_c = subset(corpus, manifest.test_page_ids);
            Model model = Model::build(train_cfg.to_config(), corpus.label_set, train_seed);
            TrainOptions opts;
            opts.max_epochs = train_epochs;
            opts.seed = train_seed;
            opts.verbose = !train_quiet;
            TrainingInfo info = model.train(train_c, test_c, opts);
            model.save(train_model);
            if (!train_history.empty()) {
                json hist = json::array();
                for (const auto& e : info.history) {
                    hist.push_back({{"epoch", e.epoch},
                                    {"train_loss", e.train_loss},
                                    {"val_weighted_f1", e.val_weighted_f1}});
                }
                write_json(hist, train_history);
            }
            std::printf("trained %s: best val weighted F1 %.4f at epoch %d (%d epochs run)\n",
                        model.model_id().c_str(), info.best_val_f1, info.best_epoch,
                        info.epochs_run);
            std::printf("model written to %s (params: %zu)\n", train_model.c_str(),
                        model.param_count());
        } else if (*eval_cmd) {
            Corpus corpus = load_corpus(eval_corpus);
            Model model = Model::load(eval_model);
            std::vector<std::string> ids;
            if (eval_on == "all" || eval_manifest.empty()) {
                ids = corpus.page_ids();
            } else {
                SplitManifest manifest = load_manifest(eval_manifest);
                if (eval_on == "test") {
                    ids = manifest.test_page_ids;
                } else if (eval_on == "train") {
                    ids = manifest.train_page_ids;
                } else {
                    throw ConfigError("--on must be test|train|all");
                }
            }
            MetricsReport report = evaluate_model(model, corpus, ids);
            Corpus sub = subset(corpus, ids);
            auto bench = benchmark(model, corpus_page_ptrs(sub));
            report.ms_per_page = bench.ms_per_page;
            report.model_bytes = bench.serialized_bytes;
            report.param_count = bench.param_count;
            std::printf("weighted F1 %.4f  R %.4f  P %.4f  (%zu labeled pages, %.2f ms/page)\n",
                        report.weighted_f1, report.weighted_recall, report.weighted_precision,
                        ids.size(), report.ms_per_page);
            for (std::size_t l = 0; l < report.per_label.size(); ++l) {
                const auto& m = report.per_label[l];
                std::printf("  %-14s P %.3f R %.3f F1 %.3f support %lld\n",
                            corpus.label_set.name_of(static_cast<int>(l)).c_str(), m.precision,
                            m.recall, m.f1, static_cast<long long>(m.support));
            }
            if (!eval_out.empty()) {
                write_json(metrics_to_json(report, corpus.label_set.names()), eval_out);
            }
        } else if (*pred_cmd) {
            Corpus corpus = load_corpus(pred_corpus);
            Model model = Model::load(pred_model);
            json out_pages = json::array();
            for (const auto& page : corpus.pages) {
                auto preds = model.predict_page(page);
                json cells = json::array();
                for (std::size_t c = 0; c < page.cells.size(); ++c) {
                    const auto& cell = page.cells[c];
                    cells.push_back({{"x0", cell.x0},
                                     {"y0", cell.y0},
                                     {"width", cell.width},
                                     {"height", cell.height},
                                     {"label", model.labels().name_of(preds[c].label)},
                                     {"confidence", preds[c].confidence}});
                }
                out_pages.push_back({{"page_id", page.page_id},
                                     {"layout_id", page.layout_id},
                                     {"cells", std::move(cells)}});
            }
            write_json(out_pages, pred_out);
            std::printf("labeled %zu pages into %s\n", corpus.pages.size(), pred_out.c_str());
        } else if (*grid_cmd) {
            Corpus corpus = load_corpus(grid_corpus);
            SplitManifest manifest = load_manifest(grid_manifest);
            std::vector<ModelConfig> configs;
            auto add = [&](Variant v, FeedingMode m, bool dec, int k, int d) {
                ModelConfig c;
                c.variant = v;
                c.mode = m;
                c.active_decoder = dec;
                c.layers = k;
                c.dim = d;
                c.schema = m == FeedingMode::Indexed ? SchemaKind::Geometric4 : SchemaKind::Full12;
                configs.push_back(c);
            };
            if (grid_spec == "ablation") {
                add(Variant::Model0, FeedingMode::Direct, true, 1, 128);
                add(Variant::Model0, FeedingMode::Indexed, true, 2, 64);
                add(Variant::Model1, FeedingMode::Indexed, true, 2, 64);
                add(Variant::Model1, FeedingMode::Indexed, false, 2, 64);
                add(Variant::Model2, FeedingMode::Indexed, true, 2, 64);
                add(Variant::Model2, FeedingMode::Indexed, false, 2, 64);
                add(Variant::Model2, FeedingMode::Stacked, false, 2, 64);
                add(Variant::Model3, FeedingMode::Indexed, true, 2, 64);
                add(Variant::Model3, FeedingMode::Indexed, false, 2, 64);
                add(Variant::Model3, FeedingMode::Stacked, false, 2, 64);
                add(Variant::Model4, FeedingMode::Indexed, true, 2, 64);
                add(Variant::Model4, FeedingMode::Indexed, false, 2, 64);
                add(Variant::Model4, FeedingMode::Stacked, false, 2, 64);
            } else {
                // rows like model-2:stacked:off:2:64 separated by commas
                std::stringstream ss(grid_spec);
                std::string row;
                while (std::getline(ss, row, ',')) {
                    std::stringstream rs(row);
                    std::string v, m, dec, ks, ds;
                    std::getline(rs, v, ':');
                    std::getline(rs, m, ':');
                    std::getline(rs, dec, ':');
                    std::getline(rs, ks, ':');
                    std::getline(rs, ds, ':');
                    add(variant_from_string(v), feeding_mode_from_string(m), dec == "on",
                        ks.empty() ? 2 : std::stoi(ks), ds.empty() ? 64 : std::stoi(ds));
                }
            }
            TrainOptions opts;
            opts.max_epochs = grid_epochs;
            opts.seed = grid_seed;
            auto rows = grid_search(corpus, manifest, configs, opts, grid_jobs);
            std::fputs(grid_table(rows).c_str(), stdout);
            if (!grid_out.empty()) {
                write_json(grid_to_json(rows), grid_out);
            }
        } else if (*serve_cmd) {
            Model model = Model::load(serve_model);
            ServerOptions opts;
            opts.host = serve_host;
            opts.port = serve_port;
            opts.max_batch_pages = serve_batch;
            std::printf("serving %s on %s:%d\n", model.model_id().c_str(), serve_host.c_str(),
                        serve_port);
            std::fflush(stdout);
            InferenceServer server(std::move(model), opts);
            if (!server.run()) {
                throw IoError("failed to bind " + serve_host + ":" + std::to_string(serve_port));
            }
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    }
}
