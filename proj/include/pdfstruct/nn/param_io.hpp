#pragma once

#include <string>

#include <json.hpp>

#include "pdfstruct/nn/param_store.hpp"

namespace pdfstruct::nn {

// Flat parameter container: 8-byte magic, u64 header length, JSON header,
// then the raw little-endian float32 payload of every parameter in header
// order. `extra` fields are merged into the header object.
void save_params(const ParamStore<float>& store, const std::string& path,
                 const nlohmann::json& extra);

// Loads a container written by save_params. Returns the header; parameters
// are recreated in the returned store in header order.
nlohmann::json load_params(ParamStore<float>& store, const std::string& path);

}  // namespace pdfstruct::nn
