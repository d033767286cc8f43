#pragma once

// Versioned checkpoint container:
//
//   bytes 0..7   magic "APNETCKP"
//   u32 LE       format version (currently 1)
//   u64 LE       manifest size in bytes
//   ...          JSON manifest: config, epoch, rng_state, vocab, parameter
//                names and shapes in payload order
//   ...          payload: raw little-endian float64, row-major, one block
//                per manifest entry
//   u32 LE       crc32 over manifest + payload
//
// Save -> load round trips are bit-exact; a version bump raises an
// incompatibility error and any byte damage fails the checksum.

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apnet/model.hpp"
#include "apnet/train.hpp"

namespace apnet {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[8] = {'A', 'P', 'N', 'E', 'T', 'C', 'K', 'P'};

struct Checkpoint {
    TrainingConfig config;
    Model model;
    std::size_t epoch = 0;
    std::string rng_state;
};

namespace detail {

inline nlohmann::json config_to_json(const TrainingConfig& c) {
    return nlohmann::json{{"model", to_string(c.model_kind)},
                          {"dim", c.dim},
                          {"filters", c.filters},
                          {"hidden", c.hidden},
                          {"window", c.window},
                          {"minibatch_size", c.minibatch_size},
                          {"margin", c.margin},
                          {"initial_lr", c.initial_lr},
                          {"epochs", c.epochs},
                          {"neg_sample_count", c.neg_sample_count},
                          {"seed", c.seed},
                          {"embeddings_trainable", c.embeddings_trainable},
                          {"lowercase", c.lowercase}};
}

inline TrainingConfig config_from_json(const nlohmann::json& j) {
    TrainingConfig c;
    c.model_kind = model_kind_from_string(j.at("model").get<std::string>());
    c.dim = j.at("dim").get<std::size_t>();
    c.filters = j.at("filters").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.window = j.at("window").get<std::size_t>();
    c.minibatch_size = j.at("minibatch_size").get<std::size_t>();
    c.margin = j.at("margin").get<double>();
    c.initial_lr = j.at("initial_lr").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.neg_sample_count = j.at("neg_sample_count").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.embeddings_trainable = j.at("embeddings_trainable").get<bool>();
    c.lowercase = j.at("lowercase").get<bool>();
    return c;
}

inline void append_u32_le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void append_u64_le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t read_u32_le(const std::string& buf, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[off + i])) << (8 * i);
    return v;
}

inline std::uint64_t read_u64_le(const std::string& buf, std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[off + i])) << (8 * i);
    return v;
}

inline std::uint32_t crc32_of(const char* data, std::size_t len) {
    uLong crc = crc32(0L, Z_NULL, 0);
    while (len > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(len, 1u << 30));
        crc = crc32(crc, reinterpret_cast<const Bytef*>(data), chunk);
        data += chunk;
        len -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

// Allocates a model with the configured shapes and zeroed parameters; the
// loader fills them from the payload.
inline Model model_skeleton(const TrainingConfig& cfg, Vocabulary vocab) {
    Model m;
    m.kind = cfg.model_kind;
    m.embeddings.dim = cfg.dim;
    m.embeddings.trainable = cfg.embeddings_trainable;
    m.embeddings.w0 = Mat(cfg.dim, vocab.size());
    m.embeddings.vocab = std::move(vocab);
    if (is_cnn(cfg.model_kind)) {
        ConvParams conv;
        conv.window = cfg.window;
        conv.filters = cfg.filters;
        conv.w1 = Mat(cfg.filters, cfg.dim * cfg.window);
        conv.b1 = Mat(cfg.filters, 1);
        m.conv = std::move(conv);
    } else {
        BiLstmParams lstm;
        lstm.hidden = cfg.hidden;
        auto make_dir = [&] {
            LstmDirParams d;
            for (LstmGate* g : {&d.in, &d.forget, &d.out, &d.cand}) {
                g->w = Mat(cfg.hidden, cfg.dim);
                g->u = Mat(cfg.hidden, cfg.hidden);
                g->b = Mat(cfg.hidden, 1);
            }
            return d;
        };
        lstm.fwd = make_dir();
        lstm.bwd = make_dir();
        m.lstm = std::move(lstm);
    }
    if (is_attentive(cfg.model_kind)) {
        AttentionParams att;
        att.u = Mat(cfg.channels(), cfg.channels());
        m.attention = std::move(att);
    }
    return m;
}

}  // namespace detail

inline void checkpoint_save(const std::string& path, Checkpoint& ckpt) {
    const std::vector<ParamView> params = ckpt.model.all_params();

    nlohmann::json manifest;
    manifest["version"] = kCheckpointVersion;
    manifest["config"] = detail::config_to_json(ckpt.config);
    manifest["epoch"] = ckpt.epoch;
    manifest["rng_state"] = ckpt.rng_state;
    manifest["vocab"] = ckpt.model.embeddings.vocab.tokens;
    nlohmann::json plist = nlohmann::json::array();
    for (const auto& v : params)
        plist.push_back({{"name", v.name}, {"rows", v.value->rows}, {"cols", v.value->cols}});
    manifest["params"] = plist;
    const std::string manifest_bytes = manifest.dump();

    std::string body = manifest_bytes;
    for (const auto& v : params)
        for (double x : v.value->data)
            detail::append_u64_le(body, std::bit_cast<std::uint64_t>(x));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    std::string header(kCheckpointMagic, sizeof(kCheckpointMagic));
    detail::append_u32_le(header, kCheckpointVersion);
    detail::append_u64_le(header, manifest_bytes.size());
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    std::string crc;
    detail::append_u32_le(crc, detail::crc32_of(body.data(), body.size()));
    out.write(crc.data(), static_cast<std::streamsize>(crc.size()));
    if (!out) throw DataError("write failed for checkpoint: " + path);
}

inline Checkpoint checkpoint_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    constexpr std::size_t header_size = sizeof(kCheckpointMagic) + 4 + 8;
    if (buf.size() < header_size + 4) throw DataError(path + ": truncated checkpoint");
    if (buf.compare(0, sizeof(kCheckpointMagic), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
        throw DataError(path + ": not an apnet checkpoint (bad magic)");
    const std::uint32_t version = detail::read_u32_le(buf, sizeof(kCheckpointMagic));
    if (version != kCheckpointVersion)
        throw DataError(path + ": unsupported checkpoint version " + std::to_string(version) +
                        " (expected " + std::to_string(kCheckpointVersion) + ")");
    const std::uint64_t manifest_size = detail::read_u64_le(buf, sizeof(kCheckpointMagic) + 4);
    if (header_size + manifest_size + 4 > buf.size())
        throw DataError(path + ": truncated checkpoint");

    const std::size_t body_size = buf.size() - header_size - 4;
    const std::uint32_t stored_crc = detail::read_u32_le(buf, header_size + body_size);
    const std::uint32_t actual_crc = detail::crc32_of(buf.data() + header_size, body_size);
    if (stored_crc != actual_crc)
        throw DataError(path + ": checkpoint checksum mismatch");

    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(buf.substr(header_size, manifest_size));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": bad checkpoint manifest: " + e.what());
    }
    if (manifest.at("version").get<std::uint32_t>() != kCheckpointVersion)
        throw DataError(path + ": unsupported checkpoint version " +
                        manifest.at("version").dump());

    Checkpoint ckpt;
    ckpt.config = detail::config_from_json(manifest.at("config"));
    ckpt.epoch = manifest.at("epoch").get<std::size_t>();
    ckpt.rng_state = manifest.at("rng_state").get<std::string>();

    Vocabulary vocab;
    for (const auto& tok : manifest.at("vocab")) vocab.add(tok.get<std::string>());
    ckpt.model = detail::model_skeleton(ckpt.config, std::move(vocab));

    std::vector<ParamView> params = ckpt.model.all_params();
    std::size_t off = header_size + manifest_size;
    const auto& plist = manifest.at("params");
    if (plist.size() != params.size())
        throw DataError(path + ": parameter count mismatch");
    for (std::size_t p = 0; p < params.size(); ++p) {
        const auto& entry = plist[p];
        if (entry.at("name").get<std::string>() != params[p].name ||
            entry.at("rows").get<std::size_t>() != params[p].value->rows ||
            entry.at("cols").get<std::size_t>() != params[p].value->cols)
            throw DataError(path + ": parameter layout mismatch at '" + params[p].name + "'");
        Mat& m = *params[p].value;
        if (off + 8 * m.data.size() > buf.size() - 4)
            throw DataError(path + ": truncated parameter payload");
        for (double& x : m.data) {
            x = std::bit_cast<double>(detail::read_u64_le(buf, off));
            off += 8;
        }
    }
    if (off != header_size + body_size)
        throw DataError(path + ": trailing bytes in checkpoint payload");
    return ckpt;
}

}  // namespace apnet
