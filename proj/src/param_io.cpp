#include "pdfstruct/nn/param_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "pdfstruct/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "parameter container assumes a little-endian host");

namespace pdfstruct::nn {

namespace {
constexpr char kMagic[8] = {'P', 'S', 'Q', 'M', 'D', 'L', '0', '1'};
}

void save_params(const ParamStore<float>& store, const std::string& path,
                 const nlohmann::json& extra) {
    nlohmann::json header = extra;
    nlohmann::json plist = nlohmann::json::array();
    for (const auto& p : store.params()) {
        plist.push_back({{"name", p->name}, {"rows", p->rows()}, {"cols", p->cols()},
                         {"row_sparse", p->row_sparse}});
    }
    header["params"] = std::move(plist);
    const std::string hs = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t hlen = hs.size();
    out.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const auto& p : store.params()) {
        out.write(reinterpret_cast<const char*>(p->value.data.data()),
                  static_cast<std::streamsize>(p->value.size() * sizeof(float)));
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

nlohmann::json load_params(ParamStore<float>& store, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open: " + path);
    }
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw DataError("not a parameter container: " + path);
    }
    std::uint64_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
    if (!in || hlen > (1u << 26)) {
        throw DataError("corrupt container header: " + path);
    }
    std::string hs(hlen, '\0');
    in.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!in) {
        throw DataError("truncated container header: " + path);
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(hs);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("invalid container header JSON in " + path + ": " + e.what());
    }
    for (const auto& pj : header.at("params")) {
        auto* p = store.create(pj.at("name").get<std::string>(), pj.at("rows").get<int>(),
                               pj.at("cols").get<int>(), pj.value("row_sparse", false));
        in.read(reinterpret_cast<char*>(p->value.data.data()),
                static_cast<std::streamsize>(p->value.size() * sizeof(float)));
        if (!in) {
            throw DataError("truncated parameter payload in " + path + " at '" + p->name + "'");
        }
    }
    return header;
}

}  // namespace pdfstruct::nn
