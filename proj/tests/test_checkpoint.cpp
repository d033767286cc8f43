#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <fstream>

#include "apnet/checkpoint.hpp"
#include "support/oracles.hpp"
#include "support/temp.hpp"
#include "support/toy_corpus.hpp"

using namespace apnet;
using apnet_test::bit_equal;
using apnet_test::make_toy_corpus;
using apnet_test::TempDir;

namespace {

TrainingConfig small_config(ModelKind kind) {
    TrainingConfig cfg;
    cfg.model_kind = kind;
    cfg.dim = 6;
    cfg.filters = is_cnn(kind) ? 5 : 0;
    cfg.hidden = is_cnn(kind) ? 0 : 3;
    cfg.window = is_cnn(kind) ? 2 : 1;
    cfg.minibatch_size = 4;
    cfg.margin = 0.5;
    cfg.initial_lr = 1.1;
    cfg.epochs = 7;
    cfg.seed = 21;
    return cfg;
}

TrainState trained_state(ModelKind kind, const std::vector<QAExample>& data,
                         std::size_t epochs) {
    TrainingConfig cfg = small_config(kind);
    EmbeddingTable emb = build_vocab(corpus_tokens(data), nullptr, cfg.dim, cfg.seed);
    TrainState state = init_training(cfg, std::move(emb));
    if (epochs > 0) run_epochs(state, data, epochs);
    return state;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

bool models_bit_equal(Model& a, Model& b) {
    const auto va = a.all_params();
    const auto vb = b.all_params();
    if (va.size() != vb.size()) return false;
    for (std::size_t i = 0; i < va.size(); ++i) {
        if (va[i].name != vb[i].name) return false;
        if (!bit_equal(*va[i].value, *vb[i].value)) return false;
    }
    return a.embeddings.vocab.tokens == b.embeddings.vocab.tokens;
}

}  // namespace

TEST_CASE("checkpoint round trip is bit-exact for every architecture") {
    const auto data = make_toy_corpus();
    TempDir tmp;
    for (ModelKind kind : {ModelKind::qa_cnn, ModelKind::ap_cnn, ModelKind::qa_bilstm,
                           ModelKind::ap_bilstm}) {
        TrainState state = trained_state(kind, data, 1);
        Checkpoint ckpt{state.config, state.model, state.epochs_done,
                        rng_state_string(state.rng)};
        const auto path = tmp.file("ckpt_" + to_string(kind));
        checkpoint_save(path, ckpt);
        Checkpoint back = checkpoint_load(path);

        REQUIRE(models_bit_equal(back.model, state.model));
        REQUIRE(back.epoch == state.epochs_done);
        REQUIRE(back.rng_state == rng_state_string(state.rng));
        REQUIRE(back.config.model_kind == state.config.model_kind);
        REQUIRE(back.config.dim == state.config.dim);
        REQUIRE(back.config.margin == state.config.margin);
        REQUIRE(back.config.initial_lr == state.config.initial_lr);
        REQUIRE(back.config.seed == state.config.seed);
        REQUIRE(back.config.minibatch_size == state.config.minibatch_size);
    }
}

TEST_CASE("a reloaded model scores pairs bit-identically") {
    const auto data = make_toy_corpus();
    TempDir tmp;
    TrainState state = trained_state(ModelKind::ap_cnn, data, 2);
    Checkpoint ckpt{state.config, state.model, state.epochs_done, rng_state_string(state.rng)};
    const auto path = tmp.file("score.ckpt");
    checkpoint_save(path, ckpt);
    Checkpoint back = checkpoint_load(path);

    std::size_t pairs = 0;
    for (const auto& ex : data) {
        for (const auto& cand : ex.candidates) {
            const double s1 = score_pair(state.model, ex.question, cand.tokens).score;
            const double s2 = score_pair(back.model, ex.question, cand.tokens).score;
            REQUIRE(std::memcmp(&s1, &s2, sizeof(double)) == 0);
            if (++pairs >= 50) break;
        }
        if (pairs >= 50) break;
    }
    REQUIRE(pairs >= 50);
}

TEST_CASE("bumped format version is rejected with a version message") {
    const auto data = make_toy_corpus();
    TempDir tmp;
    TrainState state = trained_state(ModelKind::qa_cnn, data, 0);
    Checkpoint ckpt{state.config, state.model, 0, rng_state_string(state.rng)};
    const auto path = tmp.file("version.ckpt");
    checkpoint_save(path, ckpt);

    std::string blob = read_file(path);
    blob[8] = 2;  // format version lives right after the 8-byte magic
    const auto bumped = tmp.file("bumped.ckpt");
    write_file(bumped, blob);
    try {
        checkpoint_load(bumped);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        REQUIRE(std::string(e.what()).find("version") != std::string::npos);
    }
}

TEST_CASE("payload corruption fails the checksum") {
    const auto data = make_toy_corpus();
    TempDir tmp;
    TrainState state = trained_state(ModelKind::qa_cnn, data, 0);
    Checkpoint ckpt{state.config, state.model, 0, rng_state_string(state.rng)};
    const auto path = tmp.file("corrupt.ckpt");
    checkpoint_save(path, ckpt);

    std::string blob = read_file(path);
    blob[blob.size() / 2] ^= 0x10;
    const auto corrupted = tmp.file("flipped.ckpt");
    write_file(corrupted, blob);
    try {
        checkpoint_load(corrupted);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        REQUIRE(std::string(e.what()).find("checksum") != std::string::npos);
    }
}

TEST_CASE("truncated files and foreign files are rejected") {
    const auto data = make_toy_corpus();
    TempDir tmp;
    TrainState state = trained_state(ModelKind::qa_cnn, data, 0);
    Checkpoint ckpt{state.config, state.model, 0, rng_state_string(state.rng)};
    const auto path = tmp.file("full.ckpt");
    checkpoint_save(path, ckpt);

    const std::string blob = read_file(path);
    const auto truncated = tmp.file("short.ckpt");
    write_file(truncated, blob.substr(0, blob.size() / 3));
    try {
        checkpoint_load(truncated);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        const bool mentioned = msg.find("truncated") != std::string::npos ||
                               msg.find("checksum") != std::string::npos;
        REQUIRE(mentioned);
    }

    const auto foreign = tmp.file("foreign.ckpt");
    write_file(foreign, "definitely not a checkpoint, far too short? no: " + blob.substr(8));
    REQUIRE_THROWS_AS(checkpoint_load(foreign), DataError);
    REQUIRE_THROWS_AS(checkpoint_load(tmp.file("missing.ckpt")), DataError);
}

TEST_CASE("resuming mid-run reproduces the uninterrupted trajectory bit-for-bit") {
    const auto data = make_toy_corpus();
    TempDir tmp;

    // uninterrupted: 5 epochs straight
    TrainState full = trained_state(ModelKind::ap_cnn, data, 5);

    // interrupted: 3 epochs, checkpoint, reload, 2 more
    TrainState half = trained_state(ModelKind::ap_cnn, data, 3);
    Checkpoint ckpt{half.config, half.model, half.epochs_done, rng_state_string(half.rng)};
    const auto path = tmp.file("resume.ckpt");
    checkpoint_save(path, ckpt);

    Checkpoint loaded = checkpoint_load(path);
    TrainState resumed;
    resumed.config = loaded.config;
    resumed.model = std::move(loaded.model);
    resumed.rng = rng_from_state(loaded.rng_state);
    resumed.epochs_done = loaded.epoch;
    run_epochs(resumed, data, 5);

    REQUIRE(resumed.epochs_done == full.epochs_done);
    REQUIRE(models_bit_equal(resumed.model, full.model));
    REQUIRE(rng_state_string(resumed.rng) == rng_state_string(full.rng));
}

TEST_CASE("rng state round trips through its string form") {
    Rng rng(1234);
    for (int i = 0; i < 10; ++i) rand_uniform(rng, 0.0, 1.0);
    const std::string state = rng_state_string(rng);
    Rng restored = rng_from_state(state);
    for (int i = 0; i < 100; ++i) {
        const double a = rand_uniform(rng, -1.0, 1.0);
        const double b = rand_uniform(restored, -1.0, 1.0);
        REQUIRE(std::memcmp(&a, &b, sizeof(double)) == 0);
    }
}
