#pragma once

// Vocabulary plus embedding matrix. Word embeddings are column vectors of a
// d x |V| matrix; index 0 is the shared out-of-vocabulary column. Loaders
// for the word2vec text and binary formats, a writer for each (round trips
// are exact), and seeded construction from a token stream.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "apnet/error.hpp"
#include "apnet/mat.hpp"
#include "apnet/rng.hpp"

namespace apnet {

inline constexpr const char* kOovToken = "<unk>";

struct Vocabulary {
    std::unordered_map<std::string, std::size_t> token_to_index;
    std::vector<std::string> tokens;  // index order; tokens[0] is the OOV token

    std::size_t size() const { return tokens.size(); }

    // Any string resolves to a valid index; unknown tokens fall back to 0.
    std::size_t lookup(const std::string& token) const {
        auto it = token_to_index.find(token);
        return it == token_to_index.end() ? 0 : it->second;
    }

    bool contains(const std::string& token) const {
        return token_to_index.find(token) != token_to_index.end();
    }

    // Appends a token; returns its index (existing index if already present).
    std::size_t add(const std::string& token) {
        auto it = token_to_index.find(token);
        if (it != token_to_index.end()) return it->second;
        const std::size_t idx = tokens.size();
        tokens.push_back(token);
        token_to_index.emplace(token, idx);
        return idx;
    }

    static Vocabulary with_oov() {
        Vocabulary v;
        v.add(kOovToken);
        return v;
    }
};

struct EmbeddingTable {
    Vocabulary vocab;
    Mat w0;  // d x |V|, embeddings as columns
    std::size_t dim = 0;
    bool trainable = false;

    std::size_t vocab_size() const { return vocab.size(); }
};

namespace detail {

inline Vec random_embedding(Rng& rng, std::size_t d) {
    Vec v(d);
    for (double& x : v) x = rand_uniform(rng, -0.1, 0.1);
    return v;
}

}  // namespace detail

// Text format: header "count dim", then one row per token:
// "token v1 ... vd". The table gains an OOV column at index 0, so
// |V| = count + 1.
inline EmbeddingTable load_word2vec_text(const std::string& path, std::uint64_t oov_seed = 0) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embedding file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": missing header line");
    std::size_t count = 0, dim = 0;
    {
        std::istringstream hs(line);
        if (!(hs >> count >> dim) || count == 0 || dim == 0)
            throw DataError(path + ": malformed header '" + line + "'");
    }
    EmbeddingTable table;
    table.vocab = Vocabulary::with_oov();
    table.dim = dim;
    table.w0 = Mat(dim, count + 1);
    Rng rng(oov_seed);
    table.w0.set_col(0, detail::random_embedding(rng, dim));
    for (std::size_t row = 0; row < count; ++row) {
        if (!std::getline(in, line))
            throw DataError(path + ": expected " + std::to_string(count) + " rows, got " +
                            std::to_string(row));
        const std::size_t line_no = row + 2;
        std::istringstream ls(line);
        std::string token;
        if (!(ls >> token))
            throw DataError(path + ":" + std::to_string(line_no) + ": empty row");
        Vec v(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            if (!(ls >> v[i]))
                throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                                std::to_string(dim) + " values");
        }
        double extra;
        if (ls >> extra)
            throw DataError(path + ":" + std::to_string(line_no) + ": more than " +
                            std::to_string(dim) + " values");
        const std::size_t idx = table.vocab.add(token);
        if (idx != row + 1)
            throw DataError(path + ":" + std::to_string(line_no) + ": duplicate token '" +
                            token + "'");
        table.w0.set_col(idx, v);
    }
    return table;
}

// Writes every non-OOV column with round-trippable precision (%.17g).
inline void save_word2vec_text(const std::string& path, const EmbeddingTable& table) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write embedding file: " + path);
    out << (table.vocab_size() - 1) << " " << table.dim << "\n";
    char buf[64];
    for (std::size_t j = 1; j < table.vocab_size(); ++j) {
        out << table.vocab.tokens[j];
        for (std::size_t i = 0; i < table.dim; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", table.w0(i, j));
            out << ' ' << buf;
        }
        out << '\n';
    }
}

// Binary format: ASCII header "count dim\n", then per entry the token bytes
// terminated by a single space followed by dim little-endian float32 values,
// optionally followed by '\n'. Values are widened to double exactly.
inline EmbeddingTable load_word2vec_binary(const std::string& path, std::uint64_t oov_seed = 0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open embedding file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw DataError(path + ": missing header line");
    std::size_t count = 0, dim = 0;
    {
        std::istringstream hs(header);
        if (!(hs >> count >> dim) || count == 0 || dim == 0)
            throw DataError(path + ": malformed header '" + header + "'");
    }
    EmbeddingTable table;
    table.vocab = Vocabulary::with_oov();
    table.dim = dim;
    table.w0 = Mat(dim, count + 1);
    Rng rng(oov_seed);
    table.w0.set_col(0, detail::random_embedding(rng, dim));
    std::uint64_t offset = static_cast<std::uint64_t>(header.size()) + 1;
    for (std::size_t entry = 0; entry < count; ++entry) {
        std::string token;
        int ch;
        while ((ch = in.get()) != ' ') {
            if (ch == EOF)
                throw DataError(path + ": truncated token at byte offset " +
                                std::to_string(offset + token.size()));
            if (ch == '\n') {  // leading newline between entries
                ++offset;
                continue;
            }
            token.push_back(static_cast<char>(ch));
        }
        offset += token.size() + 1;
        Vec v(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            unsigned char bytes[4];
            if (!in.read(reinterpret_cast<char*>(bytes), 4))
                throw DataError(path + ": truncated vector at byte offset " +
                                std::to_string(offset));
            std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) |
                                 (static_cast<std::uint32_t>(bytes[1]) << 8) |
                                 (static_cast<std::uint32_t>(bytes[2]) << 16) |
                                 (static_cast<std::uint32_t>(bytes[3]) << 24);
            v[i] = static_cast<double>(std::bit_cast<float>(bits));
            offset += 4;
        }
        const std::size_t idx = table.vocab.add(token);
        if (idx != entry + 1)
            throw DataError(path + ": duplicate token '" + token + "'");
        table.w0.set_col(idx, v);
    }
    return table;
}

// Values are narrowed to float32; exact round trip for tables that came from
// a binary file, lossy for arbitrary doubles.
inline void save_word2vec_binary(const std::string& path, const EmbeddingTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write embedding file: " + path);
    out << (table.vocab_size() - 1) << " " << table.dim << "\n";
    for (std::size_t j = 1; j < table.vocab_size(); ++j) {
        out << table.vocab.tokens[j] << ' ';
        for (std::size_t i = 0; i < table.dim; ++i) {
            const float f = static_cast<float>(table.w0(i, j));
            const auto bits = std::bit_cast<std::uint32_t>(f);
            const char bytes[4] = {static_cast<char>(bits & 0xff),
                                   static_cast<char>((bits >> 8) & 0xff),
                                   static_cast<char>((bits >> 16) & 0xff),
                                   static_cast<char>((bits >> 24) & 0xff)};
            out.write(bytes, 4);
        }
        out << '\n';
    }
}

// Column t is the embedding of token t; unknown tokens hit the OOV column.
inline Mat lookup_sequence(const EmbeddingTable& table, const std::vector<std::string>& tokens) {
    if (tokens.empty()) throw std::invalid_argument("lookup_sequence: empty token sequence");
    Mat out(table.dim, tokens.size());
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const std::size_t idx = table.vocab.lookup(tokens[t]);
        for (std::size_t i = 0; i < table.dim; ++i) out(i, t) = table.w0(i, idx);
    }
    return out;
}

inline std::vector<std::size_t> lookup_indices(const EmbeddingTable& table,
                                               const std::vector<std::string>& tokens) {
    std::vector<std::size_t> out(tokens.size());
    for (std::size_t t = 0; t < tokens.size(); ++t) out[t] = table.vocab.lookup(tokens[t]);
    return out;
}

// Builds a table over the corpus stream in first-seen order. Tokens covered
// by `pretrained` keep their pretrained vectors; everything else (including
// the OOV column) is drawn uniformly from [-0.1, 0.1]. Deterministic in
// (corpus order, pretrained, d, seed).
inline EmbeddingTable build_vocab(const std::vector<std::string>& corpus_tokens,
                                  const EmbeddingTable* pretrained, std::size_t d,
                                  std::uint64_t seed) {
    if (d == 0) throw std::invalid_argument("build_vocab: dimension must be positive");
    if (pretrained && pretrained->dim != d)
        throw std::invalid_argument("build_vocab: pretrained dim " +
                                    std::to_string(pretrained->dim) + " != requested " +
                                    std::to_string(d));
    Vocabulary vocab = Vocabulary::with_oov();
    for (const auto& tok : corpus_tokens) vocab.add(tok);

    EmbeddingTable table;
    table.dim = d;
    table.w0 = Mat(d, vocab.size());
    Rng rng(seed);
    for (std::size_t j = 0; j < vocab.size(); ++j) {
        const std::string& tok = vocab.tokens[j];
        if (j > 0 && pretrained && pretrained->vocab.contains(tok)) {
            const std::size_t src = pretrained->vocab.lookup(tok);
            for (std::size_t i = 0; i < d; ++i) table.w0(i, j) = pretrained->w0(i, src);
        } else {
            table.w0.set_col(j, detail::random_embedding(rng, d));
        }
    }
    table.vocab = std::move(vocab);
    return table;
}

}  // namespace apnet
