#pragma once

// Canonical dataset format: one candidate per line,
//
//   question_id TAB candidate_id TAB label TAB question-tokens TAB answer-tokens
//
// tokens space-separated, label 0 or 1, UTF-8. Lines sharing a question_id
// are grouped into one example preserving first-seen order. Blank lines are
// skipped; a trailing '\r' is tolerated.

#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "apnet/error.hpp"

namespace apnet {

struct Candidate {
    std::string id;
    std::vector<std::string> tokens;
    int label = 0;
};

struct QAExample {
    std::string question_id;
    std::vector<std::string> question;
    std::vector<Candidate> candidates;

    bool has_positive() const {
        for (const auto& c : candidates)
            if (c.label == 1) return true;
        return false;
    }

    const Candidate* first_positive() const {
        for (const auto& c : candidates)
            if (c.label == 1) return &c;
        return nullptr;
    }
};

enum class DatasetMode {
    training,    // grouping and field validation only
    evaluation,  // additionally every question must have a positive candidate
};

inline std::vector<std::string> split_tokens(const std::string& field) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (begin < field.size()) {
        const std::size_t end = field.find(' ', begin);
        if (end == std::string::npos) {
            out.push_back(field.substr(begin));
            break;
        }
        if (end > begin) out.push_back(field.substr(begin, end - begin));
        begin = end + 1;
    }
    return out;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

inline void ascii_lowercase(std::vector<std::string>& tokens) {
    for (auto& t : tokens)
        for (char& ch : t)
            if (ch >= 'A' && ch <= 'Z') ch += 'a' - 'A';
}

inline std::vector<QAExample> load_dataset(const std::string& path, DatasetMode mode,
                                           bool lowercase = false) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset: " + path);
    std::vector<QAExample> examples;
    std::unordered_map<std::string, std::size_t> index_of;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t begin = 0;
        for (;;) {
            const std::size_t end = line.find('\t', begin);
            if (end == std::string::npos) {
                fields.push_back(line.substr(begin));
                break;
            }
            fields.push_back(line.substr(begin, end - begin));
            begin = end + 1;
        }
        const std::string where = path + ":" + std::to_string(line_no);
        if (fields.size() != 5)
            throw DataError(where + ": expected 5 tab-separated fields, got " +
                            std::to_string(fields.size()));
        const std::string& qid = fields[0];
        const std::string& cid = fields[1];
        int label;
        if (fields[2] == "0") label = 0;
        else if (fields[2] == "1") label = 1;
        else throw DataError(where + ": label must be 0 or 1, got '" + fields[2] + "'");
        std::vector<std::string> q_tokens = split_tokens(fields[3]);
        std::vector<std::string> a_tokens = split_tokens(fields[4]);
        if (q_tokens.empty()) throw DataError(where + ": empty question tokens");
        if (a_tokens.empty()) throw DataError(where + ": empty answer tokens");
        if (lowercase) {
            ascii_lowercase(q_tokens);
            ascii_lowercase(a_tokens);
        }

        auto it = index_of.find(qid);
        if (it == index_of.end()) {
            it = index_of.emplace(qid, examples.size()).first;
            examples.push_back(QAExample{qid, std::move(q_tokens), {}});
        }
        QAExample& ex = examples[it->second];
        for (const auto& c : ex.candidates)
            if (c.id == cid)
                throw DataError(where + ": duplicate candidate id '" + cid + "' for question '" +
                                qid + "'");
        ex.candidates.push_back(Candidate{cid, std::move(a_tokens), label});
    }
    if (mode == DatasetMode::evaluation) {
        for (const auto& ex : examples)
            if (!ex.has_positive())
                throw DataError(path + ": question '" + ex.question_id +
                                "' has no positive candidate");
    }
    return examples;
}

inline void save_dataset(const std::string& path, const std::vector<QAExample>& examples) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset: " + path);
    for (const auto& ex : examples) {
        const std::string q = join_tokens(ex.question);
        for (const auto& c : ex.candidates)
            out << ex.question_id << '\t' << c.id << '\t' << c.label << '\t' << q << '\t'
                << join_tokens(c.tokens) << '\n';
    }
}

// Flat token stream (question tokens then answer tokens, input order) for
// vocabulary construction.
inline std::vector<std::string> corpus_tokens(const std::vector<QAExample>& examples) {
    std::vector<std::string> out;
    for (const auto& ex : examples) {
        out.insert(out.end(), ex.question.begin(), ex.question.end());
        for (const auto& c : ex.candidates)
            out.insert(out.end(), c.tokens.begin(), c.tokens.end());
    }
    return out;
}

}  // namespace apnet
