#include "pdfstruct/server.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

using nlohmann::json;

namespace pdfstruct {

namespace {

Page parse_request_page(const json& pj, int index) {
    if (!pj.is_object()) {
        throw DataError("page " + std::to_string(index) + " is not an object");
    }
    Page page;
    page.page_id = pj.value("page_id", "page-" + std::to_string(index));
    page.page_width = pj.value("width", 1.0);
    page.page_height = pj.value("height", 1.0);
    if (!(page.page_width > 0.0) || !(page.page_height > 0.0)) {
        throw DataError("page " + std::to_string(index) + " has non-positive dimensions");
    }
    for (const auto& cj : pj.value("cells", json::array())) {
        TextCell c;
        c.x0 = cj.at("x0").get<double>();
        c.y0 = cj.at("y0").get<double>();
        c.width = cj.at("width").get<double>();
        c.height = cj.at("height").get<double>();
        c.text_length = cj.value("text_length", 0);
        c.starts_with_capital = cj.value("starts_with_capital", false);
        c.is_bold = cj.value("is_bold", false);
        c.is_italic = cj.value("is_italic", false);
        c.alnum_ratio = cj.value("alnum_ratio", 0.0);
        if (!std::isfinite(c.x0) || !std::isfinite(c.y0) || !std::isfinite(c.width) ||
            !std::isfinite(c.height) || c.width <= 0.0 || c.height <= 0.0) {
            throw DataError("page " + std::to_string(index) + " contains invalid cell geometry");
        }
        page.cells.push_back(c);
    }
    return page;
}

}  // namespace

struct InferenceServer::Impl {
    Model model;
    ServerOptions options;
    httplib::Server server;
    std::thread thread;
    std::atomic<bool> ready{false};
    int bound_port = 0;

    Impl(Model m, ServerOptions opts) : model(std::move(m)), options(std::move(opts)) {
        setup_routes();
        ready.store(true);
    }

    void setup_routes() {
        server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
            json body = {{"ready", ready.load()},
                         {"model_id", model.model_id()},
                         {"schema_hash", model.schema_hash()}};
            res.set_content(body.dump(), "application/json");
        });

        server.Get("/v1/info", [this](const httplib::Request&, httplib::Response& res) {
            const auto& cfg = model.config();
            json body = {{"model_id", model.model_id()},
                         {"labels", model.labels().names()},
                         {"param_count", model.param_count()},
                         {"schema_hash", model.schema_hash()},
                         {"max_batch_pages", options.max_batch_pages},
                         {"config",
                          {{"variant", to_string(cfg.variant)},
                           {"mode", to_string(cfg.mode)},
                           {"active_decoder", cfg.active_decoder},
                           {"layers", cfg.layers},
                           {"dim", cfg.dim},
                           {"heads", cfg.heads},
                           {"n_bins", cfg.n_bins},
                           {"schema", cfg.feature_schema().to_string()},
                           {"page_concat", cfg.page_concat}}}};
            res.set_content(body.dump(), "application/json");
        });

        server.Post("/v1/predict", [this](const httplib::Request& req, httplib::Response& res) {
            handle_predict(req, res);
        });
    }

    void fail(httplib::Response& res, int status, const std::string& message) {
        res.status = status;
        res.set_content(json{{"error", message}}.dump(), "application/json");
    }

    void handle_predict(const httplib::Request& req, httplib::Response& res) {
        if (!ready.load()) {
            fail(res, 503, "model not ready");
            return;
        }
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception& e) {
            fail(res, 400, std::string("invalid JSON: ") + e.what());
            return;
        }
        if (!body.is_object() || !body.contains("pages") || !body["pages"].is_array() ||
            body["pages"].empty()) {
            fail(res, 400, "request must carry a non-empty 'pages' array");
            return;
        }
        const auto& pages_json = body["pages"];
        if (static_cast<int>(pages_json.size()) > options.max_batch_pages) {
            fail(res, 413,
                 "batch of " + std::to_string(pages_json.size()) + " pages exceeds limit of " +
                     std::to_string(options.max_batch_pages));
            return;
        }

        std::vector<Page> pages;
        try {
            int index = 0;
            for (const auto& pj : pages_json) {
                pages.push_back(parse_request_page(pj, index));
                ++index;
            }
        } catch (const Error& e) {
            fail(res, 400, e.what());
            return;
        } catch (const json::exception& e) {
            fail(res, 400, std::string("malformed cell: ") + e.what());
            return;
        }

        std::vector<const Page*> refs;
        refs.reserve(pages.size());
        for (const auto& p : pages) refs.push_back(&p);

        std::vector<std::vector<CellPrediction>> preds;
        try {
            preds = model.predict_document(refs);
        } catch (const Error& e) {
            fail(res, 400, e.what());
            return;
        }

        json out_pages = json::array();
        for (std::size_t pi = 0; pi < pages.size(); ++pi) {
            json cells = json::array();
            for (std::size_t c = 0; c < preds[pi].size(); ++c) {
                cells.push_back({{"index", c},
                                 {"label", model.labels().name_of(preds[pi][c].label)},
                                 {"confidence", preds[pi][c].confidence}});
            }
            out_pages.push_back({{"page_id", pages[pi].page_id}, {"cells", std::move(cells)}});
        }
        json out = {{"model_id", model.model_id()},
                    {"schema_hash", model.schema_hash()},
                    {"pages", std::move(out_pages)}};
        res.set_content(out.dump(), "application/json");
    }
};

InferenceServer::InferenceServer(Model model, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(model), std::move(options))) {}

InferenceServer::~InferenceServer() {
    stop();
}

bool InferenceServer::run() {
    if (impl_->options.port == 0) {
        impl_->bound_port = impl_->server.bind_to_any_port(impl_->options.host);
        if (impl_->bound_port <= 0) return false;
        return impl_->server.listen_after_bind();
    }
    impl_->bound_port = impl_->options.port;
    return impl_->server.listen(impl_->options.host, impl_->options.port);
}

int InferenceServer::start() {
    if (impl_->options.port == 0) {
        impl_->bound_port = impl_->server.bind_to_any_port(impl_->options.host);
    } else {
        if (!impl_->server.bind_to_port(impl_->options.host, impl_->options.port)) {
            throw IoError("cannot bind to port " + std::to_string(impl_->options.port));
        }
        impl_->bound_port = impl_->options.port;
    }
    if (impl_->bound_port <= 0) {
        throw IoError("cannot bind server socket");
    }
    impl_->thread = std::thread([this]() { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->bound_port;
}

void InferenceServer::stop() {
    if (impl_ && impl_->server.is_running()) {
        impl_->server.stop();
    }
    if (impl_ && impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

int InferenceServer::port() const { return impl_->bound_port; }

const Model& InferenceServer::model() const { return impl_->model; }

}  // namespace pdfstruct
