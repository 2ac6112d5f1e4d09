#include "fnet/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "fnet/config_json.hpp"
#include "fnet/errors.hpp"
#include "fnet/io.hpp"

namespace fnet {

namespace {

constexpr char kMagic[8] = {'F', 'N', 'E', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::string& out, std::uint64_t v) { out.append(reinterpret_cast<const char*>(&v), 8); }

struct Entry {
    std::string name;
    std::vector<int> shape;
    std::uint64_t offset = 0;  // bytes into blob
    std::uint64_t length = 0;  // bytes
};

class Reader {
public:
    Reader(const std::string& data, const std::string& path) : data_(data), path_(path) {}

    const char* take(std::size_t n) {
        if (pos_ + n > data_.size()) throw DataError("corrupt checkpoint (truncated): " + path_);
        const char* p = data_.data() + pos_;
        pos_ += n;
        return p;
    }
    std::uint32_t u32() {
        std::uint32_t v;
        std::memcpy(&v, take(4), 4);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        std::memcpy(&v, take(8), 8);
        return v;
    }

private:
    const std::string& data_;
    std::string path_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const Model& model, const TrainState* training) {
    nlohmann::json header;
    header["format_version"] = kVersion;
    header["model"] = to_json(model.config());
    if (training) {
        // -1 encodes "no validation yet"; infinities do not survive JSON
        const double best =
            std::isfinite(training->best_val_mae) ? training->best_val_mae : -1.0;
        header["training"] = {{"iter", training->iter},
                              {"best_val_mae", best},
                              {"adam_t", training->adam.t},
                              {"skipped_steps", training->adam.skipped_steps},
                              {"rng_state", training->rng_state}};
    }
    const std::string header_str = header.dump();

    std::vector<Entry> entries;
    std::string blob;
    auto add_tensor = [&](const std::string& name, const std::vector<int>& shape,
                          const double* data, std::size_t count) {
        Entry e;
        e.name = name;
        e.shape = shape;
        e.offset = blob.size();
        e.length = count * sizeof(double);
        blob.append(reinterpret_cast<const char*>(data), e.length);
        entries.push_back(std::move(e));
    };

    for (const auto& [name, t] : model.params().parameters())
        add_tensor(name, t.shape(), t.data(), t.numel());
    for (const auto& [name, t] : model.params().buffers())
        add_tensor(name, t.shape(), t.data(), t.numel());
    if (training && training->adam.initialized()) {
        const auto params = model.params().parameters();
        if (training->adam.m.size() != params.size())
            throw DataError("save_checkpoint: optimizer state does not match model");
        for (std::size_t i = 0; i < params.size(); ++i) {
            add_tensor("adam.m." + params[i].first, params[i].second.shape(),
                       training->adam.m[i].data(), training->adam.m[i].size());
            add_tensor("adam.v." + params[i].first, params[i].second.shape(),
                       training->adam.v[i].data(), training->adam.v[i].size());
        }
    }

    std::string out;
    out.append(kMagic, 8);
    put_u32(out, kVersion);
    put_u64(out, header_str.size());
    out += header_str;
    put_u64(out, entries.size());
    for (const Entry& e : entries) {
        put_u32(out, static_cast<std::uint32_t>(e.name.size()));
        out += e.name;
        put_u32(out, static_cast<std::uint32_t>(e.shape.size()));
        for (int d : e.shape) put_u32(out, static_cast<std::uint32_t>(d));
        put_u64(out, e.offset);
        put_u64(out, e.length);
    }
    put_u64(out, blob.size());
    out += blob;
    atomic_write_file(path, out);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    Reader r(data, path);
    if (std::memcmp(r.take(8), kMagic, 8) != 0)
        throw DataError("not a checkpoint file: " + path);
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(version) + " in " +
                        path);

    const std::uint64_t header_len = r.u64();
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(std::string(r.take(header_len), header_len));
    } catch (const nlohmann::json::exception& ex) {
        throw DataError("corrupt checkpoint header in " + path + ": " + ex.what());
    }
    const ModelConfig config = model_config_from_json(header.at("model"));

    const std::uint64_t n_entries = r.u64();
    std::vector<Entry> entries(n_entries);
    for (Entry& e : entries) {
        const std::uint32_t name_len = r.u32();
        e.name.assign(r.take(name_len), name_len);
        const std::uint32_t ndim = r.u32();
        e.shape.resize(ndim);
        for (std::uint32_t d = 0; d < ndim; ++d) e.shape[d] = static_cast<int>(r.u32());
        e.offset = r.u64();
        e.length = r.u64();
    }
    const std::uint64_t blob_len = r.u64();
    const char* blob = r.take(blob_len);

    auto find_entry = [&](const std::string& name) -> const Entry* {
        for (const Entry& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    };
    auto read_into = [&](const Entry& e, double* out, std::size_t count,
                         const std::vector<int>& expect_shape) {
        if (e.shape != expect_shape)
            throw DataError("checkpoint tensor '" + e.name + "' has unexpected shape in " + path);
        if (e.offset + e.length > blob_len || e.length != count * sizeof(double))
            throw DataError("corrupt checkpoint manifest for '" + e.name + "' in " + path);
        std::memcpy(out, blob + e.offset, e.length);
    };

    LoadedCheckpoint loaded{Model(config, /*seed=*/0), std::nullopt};
    for (const auto& [name, t] : loaded.model.params().parameters()) {
        const Entry* e = find_entry(name);
        if (!e) throw DataError("checkpoint missing tensor '" + name + "' in " + path);
        ad::Tensor tensor = t;
        read_into(*e, tensor.data(), tensor.numel(), tensor.shape());
    }
    for (const auto& [name, t] : loaded.model.params().buffers()) {
        const Entry* e = find_entry(name);
        if (!e) throw DataError("checkpoint missing buffer '" + name + "' in " + path);
        ad::Tensor tensor = t;
        read_into(*e, tensor.data(), tensor.numel(), tensor.shape());
    }

    if (header.contains("training")) {
        const auto& tj = header.at("training");
        TrainState state;
        state.iter = tj.at("iter").get<std::int64_t>();
        state.best_val_mae = tj.at("best_val_mae").get<double>();
        state.rng_state = tj.value("rng_state", std::string{});
        state.adam.t = tj.at("adam_t").get<std::int64_t>();
        state.adam.skipped_steps = tj.at("skipped_steps").get<std::int64_t>();
        const auto params = loaded.model.params().parameters();
        state.adam.m.resize(params.size());
        state.adam.v.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.adam.m[i].resize(params[i].second.numel());
            state.adam.v[i].resize(params[i].second.numel());
            const Entry* em = find_entry("adam.m." + params[i].first);
            const Entry* ev = find_entry("adam.v." + params[i].first);
            if (!em || !ev)
                throw DataError("checkpoint missing optimizer state for '" + params[i].first +
                                "' in " + path);
            read_into(*em, state.adam.m[i].data(), state.adam.m[i].size(),
                      params[i].second.shape());
            read_into(*ev, state.adam.v[i].data(), state.adam.v[i].size(),
                      params[i].second.shape());
        }
        loaded.training = std::move(state);
    }
    return loaded;
}

}  // namespace fnet
