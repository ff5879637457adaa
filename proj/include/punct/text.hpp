#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "punct/tensor.hpp"

namespace punct {

struct Token {
    std::string surface;
    bool is_punctuation = false;

    bool operator==(const Token&) const = default;
};

bool is_punctuation_codepoint(std::uint32_t cp);

/// Lowercases, splits punctuation marks into single-character tokens, and
/// splits clitics before the apostrophe ("let's" -> "let", "'s"). A token is
/// punctuation iff every character of it is a punctuation mark.
std::vector<Token> tokenize(std::string_view text);

/// Drops punctuation tokens. Clitic tokens such as "'s" contain letters and
/// are kept.
std::vector<Token> strip_punctuation(const std::vector<Token>& tokens);

std::vector<Token> truncate(std::vector<Token> tokens, std::size_t max_len = 128);

/// Token-to-index map with PAD = 0 and UNK = 1. Entries are ordered by
/// descending frequency, ties broken lexicographically, so indices are
/// stable across runs.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    Vocabulary();

    /// Words below min_count are dropped; tree node symbols (labels and
    /// traversal leaves) are always kept.
    static Vocabulary build(const std::vector<std::vector<Token>>& texts,
                            const std::vector<std::vector<std::string>>& tree_symbols,
                            int min_count = 1);

    /// Rebuild from an ordered token list (index 0 must be PAD, 1 UNK).
    static Vocabulary from_token_list(std::vector<std::string> tokens);

    int lookup(std::string_view token) const;  // UNK when absent
    bool contains(std::string_view token) const;
    const std::string& token(int index) const;
    int size() const { return static_cast<int>(tokens_.size()); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    std::vector<int> ids_of(const std::vector<Token>& tokens) const;
    std::vector<int> ids_of(const std::vector<std::string>& symbols) const;

private:
    struct TransparentHash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept {
            return std::hash<std::string_view>{}(s);
        }
    };

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int, TransparentHash, std::equal_to<>> index_;
};

/// Word/label embedding rows, one table shared by text tokens and tree node
/// symbols. The PAD row is all-zero and never trained.
struct EmbeddingTable {
    Parameter vectors;                 // |V| x dim
    std::vector<bool> pretrained_mask; // true for rows loaded from file

    Index rows() const { return vectors.rows(); }
    Index dim() const { return vectors.cols(); }
};

struct PretrainedLoadStats {
    std::size_t matched = 0;
    std::size_t missing = 0;  // in-vocab tokens absent from the file
};

/// All rows seeded uniform in [-0.1, 0.1] (except PAD), reproducible per row.
EmbeddingTable random_embedding_table(const Vocabulary& vocab, Index dim, std::uint64_t seed);

/// GloVe text format: one token per line followed by `dim` floats. In-vocab
/// tokens found in the file take the file vector; everything else gets a
/// seeded random row as in random_embedding_table.
std::pair<EmbeddingTable, PretrainedLoadStats> load_pretrained_vectors(
    const std::string& path, const Vocabulary& vocab, Index dim, std::uint64_t seed);

}  // namespace punct
