#pragma once

#include <array>
#include <string>
#include <vector>

#include "punct/train.hpp"

namespace punct {

/// a.b / (|a||b|), clamped to [-1, 1] against rounding. Errors on a zero
/// vector or a length mismatch.
Scalar cosine_similarity(const VectorX& a, const VectorX& b);

struct SimilarityReport {
    struct Row {
        std::string id;
        Scalar similarity;
    };
    std::vector<Row> rows;
    std::size_t skipped = 0;            // samples whose stripped form was empty
    std::array<std::size_t, 20> histogram{};  // 20 bins over [-1, 1]
    Scalar mean = 0, min = 0, max = 0;
};

std::size_t similarity_bin(Scalar s);

/// Embeds each sample's text with and without punctuation through the same
/// model and records the cosine similarity. For the proposed variant, gold
/// trees are used only when a sample ships trees for both versions;
/// otherwise both versions use the flat fallback tree.
SimilarityReport punctuation_sensitivity_report(ModelParams& params,
                                                const ModelConfig& config,
                                                const Vocabulary& vocab,
                                                std::span<const Sample> samples);

/// report.csv (id,similarity) and histogram.csv (bin_low,bin_high,count).
void write_similarity_report(const SimilarityReport& report, const std::string& out_dir);

struct CasePair {
    std::string id;
    std::string group;  // e.g. meaning_change / meaning_preserve / random_punct
    std::string with_text;
    std::string without_text;
    std::vector<std::string> with_trees;
    std::vector<std::string> without_trees;
};

/// JSONL rows: id, group, with{text,trees}, without{text,trees}.
std::vector<CasePair> load_case_pairs(const std::string& path);

struct CaseModel {
    std::string name;  // variant label for the output file
    ModelParams* params;
    const ModelConfig* config;
    const Vocabulary* vocab;
};

struct CaseResult {
    std::string id;
    std::string variant;
    Scalar similarity;
};

std::vector<CaseResult> case_study(std::span<const CaseModel> models,
                                   std::span<const CasePair> pairs);

/// Delimited text: id,with,without,variant,similarity (quoted fields).
void write_case_study(const std::string& path, std::span<const CasePair> pairs,
                      std::span<const CaseResult> results);

/// Replaces every punctuation token with a uniform seeded draw from
/// {".", ",", "!", "?"}; word tokens pass through untouched.
std::vector<Token> randomize_punctuation(std::span<const Token> tokens, std::uint64_t seed);

}  // namespace punct
