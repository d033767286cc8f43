#pragma once

// Attention-weight export: one JSON object per (question, candidate) pair,
// one per line. Schema version 1 fields: version, model, k, question_id,
// candidate_id, score, q_tokens, q_weights, a_tokens, a_weights. Weights are
// the attention vectors from scoring, serialized with round-trippable
// precision; only attentive models carry a trace.

#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "apnet/dataset.hpp"
#include "apnet/model.hpp"

namespace apnet {

inline constexpr int kAttentionExportVersion = 1;

struct AttentionExport {
    int version = kAttentionExportVersion;
    std::string model;
    std::size_t window = 1;
    std::string question_id;
    std::string candidate_id;
    double score = 0.0;
    std::vector<std::string> q_tokens;
    Vec q_weights;
    std::vector<std::string> a_tokens;
    Vec a_weights;
};

inline AttentionExport make_attention_export(const Model& model, const QAExample& ex,
                                             const Candidate& cand) {
    if (!is_attentive(model.kind))
        throw DataError("model '" + to_string(model.kind) +
                        "' has no attention trace; use an ap-* model");
    ScoreResult res = score_pair(model, ex.question, cand.tokens);
    AttentionExport exp;
    exp.model = to_string(model.kind);
    exp.window = model.window();
    exp.question_id = ex.question_id;
    exp.candidate_id = cand.id;
    exp.score = res.score;
    exp.q_tokens = ex.question;
    exp.q_weights = res.trace->sigma_q;
    exp.a_tokens = cand.tokens;
    exp.a_weights = res.trace->sigma_a;
    return exp;
}

inline nlohmann::json to_json(const AttentionExport& e) {
    return nlohmann::json{{"version", e.version},
                          {"model", e.model},
                          {"k", e.window},
                          {"question_id", e.question_id},
                          {"candidate_id", e.candidate_id},
                          {"score", e.score},
                          {"q_tokens", e.q_tokens},
                          {"q_weights", e.q_weights},
                          {"a_tokens", e.a_tokens},
                          {"a_weights", e.a_weights}};
}

inline AttentionExport attention_export_from_json(const nlohmann::json& j) {
    AttentionExport e;
    e.version = j.at("version").get<int>();
    if (e.version != kAttentionExportVersion)
        throw DataError("unsupported attention export version " + std::to_string(e.version));
    e.model = j.at("model").get<std::string>();
    e.window = j.at("k").get<std::size_t>();
    e.question_id = j.at("question_id").get<std::string>();
    e.candidate_id = j.at("candidate_id").get<std::string>();
    e.score = j.at("score").get<double>();
    e.q_tokens = j.at("q_tokens").get<std::vector<std::string>>();
    e.q_weights = j.at("q_weights").get<Vec>();
    e.a_tokens = j.at("a_tokens").get<std::vector<std::string>>();
    e.a_weights = j.at("a_weights").get<Vec>();
    return e;
}

// Every candidate of every example, dataset order, one JSON line each.
inline void export_attention(const Model& model, const std::vector<QAExample>& examples,
                             const std::string& out_path) {
    std::ofstream out(out_path);
    if (!out) throw DataError("cannot write attention export: " + out_path);
    for (const auto& ex : examples)
        for (const auto& cand : ex.candidates)
            out << to_json(make_attention_export(model, ex, cand)).dump() << '\n';
}

inline std::vector<AttentionExport> load_attention_export(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open attention export: " + path);
    std::vector<AttentionExport> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(attention_export_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": bad export line: " +
                            e.what());
        }
    }
    return out;
}

}  // namespace apnet
