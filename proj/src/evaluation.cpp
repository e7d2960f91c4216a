#include "pdfstruct/evaluation.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <thread>

using nlohmann::json;

namespace pdfstruct {

ConfusionMatrix::ConfusionMatrix(int n_labels)
    : n_(n_labels), counts_(static_cast<std::size_t>(n_labels) * n_labels, 0) {
    if (n_labels < 1) {
        throw ConfigError("confusion matrix needs at least one label");
    }
}

void ConfusionMatrix::add(int truth, int predicted) {
    if (truth < 0 || truth >= n_ || predicted < 0 || predicted >= n_) {
        throw DataError("confusion matrix index out of range");
    }
    ++counts_[static_cast<std::size_t>(truth) * n_ + predicted];
    ++total_;
}

std::int64_t ConfusionMatrix::at(int truth, int predicted) const {
    return counts_[static_cast<std::size_t>(truth) * n_ + predicted];
}

std::int64_t ConfusionMatrix::row_sum(int truth) const {
    std::int64_t s = 0;
    for (int j = 0; j < n_; ++j) s += at(truth, j);
    return s;
}

std::int64_t ConfusionMatrix::col_sum(int predicted) const {
    std::int64_t s = 0;
    for (int i = 0; i < n_; ++i) s += at(i, predicted);
    return s;
}

ConfusionMatrix confusion(const std::vector<int>& predictions, const std::vector<int>& truth,
                          int n_labels) {
    if (predictions.size() != truth.size()) {
        throw DataError("confusion: prediction/truth length mismatch");
    }
    ConfusionMatrix cm(n_labels);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        cm.add(truth[i], predictions[i]);
    }
    return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) {
        throw DataError("metrics undefined for an all-zero confusion matrix");
    }
    MetricsReport rep;
    rep.per_label.resize(static_cast<std::size_t>(cm.size()));
    double wp = 0.0, wr = 0.0, wf = 0.0;
    std::int64_t support_total = 0;
    for (int l = 0; l < cm.size(); ++l) {
        auto& m = rep.per_label[static_cast<std::size_t>(l)];
        const std::int64_t tp = cm.at(l, l);
        const std::int64_t support = cm.row_sum(l);
        const std::int64_t predicted = cm.col_sum(l);
        m.support = support;
        m.precision = predicted > 0 ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
        m.recall = support > 0 ? static_cast<double>(tp) / static_cast<double>(support) : 0.0;
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
        wp += static_cast<double>(support) * m.precision;
        wr += static_cast<double>(support) * m.recall;
        wf += static_cast<double>(support) * m.f1;
        support_total += support;
    }
    rep.weighted_precision = wp / static_cast<double>(support_total);
    rep.weighted_recall = wr / static_cast<double>(support_total);
    rep.weighted_f1 = wf / static_cast<double>(support_total);
    return rep;
}

json metrics_to_json(const MetricsReport& report, const std::vector<std::string>& labels) {
    json per_label = json::array();
    for (std::size_t l = 0; l < report.per_label.size(); ++l) {
        const auto& m = report.per_label[l];
        per_label.push_back({{"label", l < labels.size() ? labels[l] : std::to_string(l)},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"support", m.support}});
    }
    return json{{"per_label", std::move(per_label)},
                {"weighted_precision", report.weighted_precision},
                {"weighted_recall", report.weighted_recall},
                {"weighted_f1", report.weighted_f1},
                {"ms_per_page", report.ms_per_page},
                {"model_bytes", report.model_bytes},
                {"param_count", report.param_count}};
}

ConfusionMatrix evaluate_confusion(const Model& model, const Corpus& corpus,
                                   const std::vector<std::string>& page_ids) {
    Corpus sub = subset(corpus, page_ids);
    if (sub.label_set.names() != model.labels().names()) {
        throw ConfigError("evaluation corpus label set differs from the model's label set");
    }
    ConfusionMatrix cm(model.labels().size());
    std::vector<std::vector<const Page*>> groups;
    if (model.config().page_concat) {
        groups = group_documents(sub);
    } else {
        for (const auto& p : sub.pages) groups.push_back({&p});
    }
    for (const auto& group : groups) {
        auto preds = model.predict_document(group);
        for (std::size_t pi = 0; pi < group.size(); ++pi) {
            const auto& cells = group[pi]->cells;
            for (std::size_t c = 0; c < cells.size(); ++c) {
                if (cells[c].has_label()) {
                    cm.add(cells[c].label, preds[pi][c].label);
                }
            }
        }
    }
    return cm;
}

MetricsReport evaluate_model(const Model& model, const Corpus& corpus,
                             const std::vector<std::string>& page_ids) {
    return metrics(evaluate_confusion(model, corpus, page_ids));
}

BenchmarkResult benchmark(const Model& model, const std::vector<const Page*>& pages,
                          int repetitions) {
    if (pages.empty()) {
        throw DataError("benchmark needs at least one page");
    }
    repetitions = std::max(repetitions, 3);
    auto run_all = [&]() {
        for (const Page* p : pages) {
            (void)model.predict_page(*p);
        }
    };
    run_all();  // warm-up
    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < repetitions; ++r) {
        run_all();
    }
    const auto end = std::chrono::steady_clock::now();
    const double total_ms = std::chrono::duration<double, std::milli>(end - start).count();

    BenchmarkResult res;
    res.ms_per_page = total_ms / (static_cast<double>(repetitions) * pages.size());
    res.param_count = model.param_count();

    namespace fs = std::filesystem;
    const fs::path tmp = fs::temp_directory_path() /
                         ("bench-" + model.model_id() + "-" + std::to_string(::getpid()) + ".bin");
    model.save(tmp.string());
    res.serialized_bytes = static_cast<std::int64_t>(fs::file_size(tmp));
    fs::remove(tmp);
    fs::remove(tmp.string() + ".json");
    return res;
}

std::vector<GridRow> grid_search(const Corpus& corpus, const SplitManifest& split,
                                 const std::vector<ModelConfig>& configs,
                                 const TrainOptions& options, int jobs) {
    Corpus train_c = subset(corpus, split.train_page_ids);
    Corpus test_c = subset(corpus, split.test_page_ids);

    std::vector<GridRow> rows(configs.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) {
                return;
            }
            GridRow& row = rows[i];
            row.config = configs[i];
            try {
                Model model = Model::build(configs[i], corpus.label_set, options.seed);
                row.training = model.train(train_c, test_c, options);
                row.config = model.config();
                row.report = evaluate_model(model, corpus, split.test_page_ids);
                std::vector<const Page*> bench_pages;
                for (const auto& p : test_c.pages) {
                    bench_pages.push_back(&p);
                    if (bench_pages.size() >= 20) break;
                }
                const auto bench = benchmark(model, bench_pages);
                row.report.ms_per_page = bench.ms_per_page;
                row.report.model_bytes = bench.serialized_bytes;
                row.report.param_count = bench.param_count;
                row.ok = true;
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
        }
    };

    jobs = std::max(1, jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    return rows;
}

std::string grid_table(const std::vector<GridRow>& rows) {
    std::vector<const GridRow*> order;
    for (const auto& r : rows) order.push_back(&r);
    std::stable_sort(order.begin(), order.end(), [](const GridRow* a, const GridRow* b) {
        if (a->ok != b->ok) return a->ok;
        return a->report.weighted_f1 > b->report.weighted_f1;
    });

    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-10s %-8s %-8s %3s %5s %3s %8s %8s %8s %10s %12s\n",
                  "model", "feeding", "decoder", "k", "d", "h", "avg_f1", "avg_r", "avg_p",
                  "time_ms", "size_param");
    out += line;
    for (const GridRow* r : order) {
        if (!r->ok) {
            std::snprintf(line, sizeof(line), "%-10s %-8s %-8s %3d %5d %3s failed: %s\n",
                          to_string(r->config.variant).c_str(),
                          to_string(r->config.mode).c_str(),
                          r->config.active_decoder ? "yes" : "no", r->config.layers,
                          r->config.dim, "-", r->error.c_str());
            out += line;
            continue;
        }
        const bool tf = r->config.variant == Variant::Model5;
        std::snprintf(line, sizeof(line), "%-10s %-8s %-8s %3d %5d %3s %8.3f %8.3f %8.3f %10.1f %12zu\n",
                      to_string(r->config.variant).c_str(), to_string(r->config.mode).c_str(),
                      r->config.active_decoder ? "yes" : "no", r->config.layers, r->config.dim,
                      tf ? std::to_string(r->config.heads).c_str() : "-",
                      r->report.weighted_f1, r->report.weighted_recall,
                      r->report.weighted_precision, r->report.ms_per_page,
                      r->report.param_count);
        out += line;
    }
    return out;
}

json grid_to_json(const std::vector<GridRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        json row = {{"variant", to_string(r.config.variant)},
                    {"mode", to_string(r.config.mode)},
                    {"active_decoder", r.config.active_decoder},
                    {"k", r.config.layers},
                    {"d", r.config.dim},
                    {"h", r.config.heads},
                    {"ok", r.ok}};
        if (r.ok) {
            row["weighted_f1"] = r.report.weighted_f1;
            row["weighted_recall"] = r.report.weighted_recall;
            row["weighted_precision"] = r.report.weighted_precision;
            row["ms_per_page"] = r.report.ms_per_page;
            row["model_bytes"] = r.report.model_bytes;
            row["param_count"] = r.report.param_count;
            row["epochs_run"] = r.training.epochs_run;
        } else {
            row["error"] = r.error;
        }
        arr.push_back(std::move(row));
    }
    return arr;
}

}  // namespace pdfstruct
