#pragma once

// Ranking and IR metrics. A RankedPool is a question's candidates sorted by
// descending score, ties broken by ascending candidate id (lexicographic).
// MAP / MRR follow the trec_eval definitions on binary relevance; P@1 is the
// fraction of questions whose top candidate is relevant.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apnet/dataset.hpp"
#include "apnet/model.hpp"

namespace apnet {

struct RankedCandidate {
    std::string id;
    double score = 0.0;
    int label = 0;
};

struct RankedPool {
    std::string question_id;
    std::vector<RankedCandidate> ranked;  // descending score, ties by ascending id
};

inline void sort_ranked(std::vector<RankedCandidate>& v) {
    std::sort(v.begin(), v.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
}

inline RankedPool rank_pool(const Model& model, const QAExample& ex) {
    if (ex.candidates.empty())
        throw std::invalid_argument("rank_pool: no candidates for question " + ex.question_id);
    RankedPool pool;
    pool.question_id = ex.question_id;
    pool.ranked.reserve(ex.candidates.size());
    for (const auto& c : ex.candidates) {
        double s;
        try {
            s = score_pair(model, ex.question, c.tokens).score;
        } catch (const std::exception& e) {
            throw ScoringError("scoring candidate '" + c.id + "' of question '" +
                               ex.question_id + "': " + e.what());
        }
        pool.ranked.push_back({c.id, s, c.label});
    }
    sort_ranked(pool.ranked);
    return pool;
}

inline std::vector<RankedPool> rank_all(const Model& model,
                                        const std::vector<QAExample>& examples) {
    std::vector<RankedPool> pools;
    pools.reserve(examples.size());
    for (const auto& ex : examples) pools.push_back(rank_pool(model, ex));
    return pools;
}

namespace detail {

inline void require_positives(const std::vector<RankedPool>& pools, const char* op) {
    if (pools.empty()) throw std::invalid_argument(std::string(op) + ": no pools");
    for (const auto& p : pools) {
        bool any = false;
        for (const auto& c : p.ranked) any |= c.label == 1;
        if (!any)
            throw std::invalid_argument(std::string(op) + ": question '" + p.question_id +
                                        "' has no positive candidate");
    }
}

}  // namespace detail

inline double precision_at_1(const std::vector<RankedPool>& pools) {
    detail::require_positives(pools, "precision_at_1");
    std::size_t hits = 0;
    for (const auto& p : pools) hits += p.ranked.front().label == 1;
    return static_cast<double>(hits) / static_cast<double>(pools.size());
}

inline double mean_average_precision(const std::vector<RankedPool>& pools) {
    detail::require_positives(pools, "mean_average_precision");
    double total = 0.0;
    for (const auto& p : pools) {
        std::size_t relevant_seen = 0;
        double ap = 0.0;
        for (std::size_t rank = 1; rank <= p.ranked.size(); ++rank) {
            if (p.ranked[rank - 1].label == 1) {
                ++relevant_seen;
                ap += static_cast<double>(relevant_seen) / static_cast<double>(rank);
            }
        }
        total += ap / static_cast<double>(relevant_seen);
    }
    return total / static_cast<double>(pools.size());
}

inline double mean_reciprocal_rank(const std::vector<RankedPool>& pools) {
    detail::require_positives(pools, "mean_reciprocal_rank");
    double total = 0.0;
    for (const auto& p : pools) {
        for (std::size_t rank = 1; rank <= p.ranked.size(); ++rank) {
            if (p.ranked[rank - 1].label == 1) {
                total += 1.0 / static_cast<double>(rank);
                break;
            }
        }
    }
    return total / static_cast<double>(pools.size());
}

struct LengthBucket {
    std::size_t max_length = 0;
    double accuracy = 0.0;
    std::size_t question_count = 0;  // cumulative, nondecreasing over edges
};

// P@1 restricted to questions whose ground-truth answer (first positive
// candidate) has at most max_length tokens; empty buckets are omitted.
inline std::vector<LengthBucket> accuracy_by_answer_length(
    const std::vector<RankedPool>& pools, const std::vector<QAExample>& examples,
    const std::vector<std::size_t>& bucket_edges) {
    for (std::size_t i = 1; i < bucket_edges.size(); ++i)
        if (bucket_edges[i] <= bucket_edges[i - 1])
            throw std::invalid_argument("accuracy_by_answer_length: edges must be increasing");
    std::map<std::string, std::size_t> gt_length;
    for (const auto& ex : examples) {
        const Candidate* pos = ex.first_positive();
        if (pos) gt_length[ex.question_id] = pos->tokens.size();
    }
    std::vector<LengthBucket> out;
    for (std::size_t edge : bucket_edges) {
        std::size_t count = 0, hits = 0;
        for (const auto& p : pools) {
            auto it = gt_length.find(p.question_id);
            if (it == gt_length.end() || it->second > edge) continue;
            ++count;
            hits += p.ranked.front().label == 1;
        }
        if (count == 0) continue;
        out.push_back({edge, static_cast<double>(hits) / static_cast<double>(count), count});
    }
    return out;
}

}  // namespace apnet
