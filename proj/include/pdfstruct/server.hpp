#pragma once

#include <memory>
#include <string>

#include "pdfstruct/labeler.hpp"

namespace pdfstruct {

struct ServerOptions {
    std::string host = "0.0.0.0";
    int port = 8080;          // 0 picks an ephemeral port
    int max_batch_pages = 16;
};

// Stateless inference service: one immutable model loaded at construction,
// shared read-only across requests.
//
//   POST /v1/predict   pages in, per-cell {index,label,confidence} out
//   GET  /v1/health    ready flag, model id, schema hash
//   GET  /v1/info      model configuration summary
//
// Oversized batches get 413, malformed bodies 400.
class InferenceServer {
public:
    InferenceServer(Model model, ServerOptions options);
    ~InferenceServer();
    InferenceServer(const InferenceServer&) = delete;
    InferenceServer& operator=(const InferenceServer&) = delete;

    // Serves until stop(); returns false if binding failed.
    bool run();

    // Serves on a background thread; returns the bound port.
    int start();
    void stop();

    int port() const;
    const Model& model() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace pdfstruct
