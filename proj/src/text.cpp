#include "punct/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace punct {

namespace {

// decodes one UTF-8 codepoint starting at i; malformed bytes come back as-is
std::uint32_t decode_utf8(std::string_view s, std::size_t& i) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    auto cont = [&](std::size_t k) {
        return i + k < s.size() &&
               (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    if (b0 < 0x80) {
        i += 1;
        return b0;
    }
    if ((b0 & 0xE0) == 0xC0 && cont(1)) {
        std::uint32_t cp = (b0 & 0x1Fu) << 6 |
                           (static_cast<unsigned char>(s[i + 1]) & 0x3Fu);
        i += 2;
        return cp;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        std::uint32_t cp = (b0 & 0x0Fu) << 12 |
                           (static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 6 |
                           (static_cast<unsigned char>(s[i + 2]) & 0x3Fu);
        i += 3;
        return cp;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        std::uint32_t cp = (b0 & 0x07u) << 18 |
                           (static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 12 |
                           (static_cast<unsigned char>(s[i + 2]) & 0x3Fu) << 6 |
                           (static_cast<unsigned char>(s[i + 3]) & 0x3Fu);
        i += 4;
        return cp;
    }
    i += 1;
    return b0;
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

bool is_ascii_alpha(std::uint32_t cp) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
}

bool is_apostrophe(std::uint32_t cp) { return cp == '\'' || cp == 0x2019; }

bool is_ws(std::uint32_t cp) {
    return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' ||
           cp == '\v' || cp == 0xA0;
}

}  // namespace

bool is_punctuation_codepoint(std::uint32_t cp) {
    switch (cp) {
        case '.': case ',': case '!': case '?': case ';': case ':':
        case '\'': case '"': case '(': case ')': case '[': case ']':
        case '{': case '}': case '-':
        case 0x2014:  // em dash
        case 0x2026:  // ellipsis
        case 0x2018: case 0x2019: case 0x201C: case 0x201D:  // curly quotes
            return true;
        default:
            return false;
    }
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::string word;
    bool word_all_punct = true;

    auto flush = [&] {
        if (!word.empty()) {
            out.push_back(Token{word, word_all_punct});
            word.clear();
        }
        word_all_punct = true;
    };

    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t start = i;
        std::uint32_t cp = decode_utf8(text, i);
        if (is_ws(cp)) {
            flush();
            continue;
        }
        if (is_punctuation_codepoint(cp)) {
            // clitic: apostrophe between letters starts a new token that
            // keeps the apostrophe ("let's" -> "let" + "'s")
            bool letter_before = !word.empty() && is_ascii_alpha(
                static_cast<unsigned char>(word.back()));
            std::size_t peek = i;
            bool letter_after =
                peek < text.size() && is_ascii_alpha(decode_utf8(text, peek));
            if (is_apostrophe(cp) && letter_before && letter_after) {
                flush();
                append_utf8(word, cp);
                continue;  // letters will follow, leaving is_punctuation false
            }
            flush();
            out.push_back(Token{std::string(text.substr(start, i - start)), true});
            continue;
        }
        if (cp < 0x80) {
            word += static_cast<char>(std::tolower(static_cast<int>(cp)));
        } else {
            append_utf8(word, cp);
        }
        word_all_punct = word_all_punct && is_punctuation_codepoint(cp);
    }
    flush();
    return out;
}

std::vector<Token> strip_punctuation(const std::vector<Token>& tokens) {
    std::vector<Token> out;
    out.reserve(tokens.size());
    for (const Token& t : tokens)
        if (!t.is_punctuation) out.push_back(t);
    return out;
}

std::vector<Token> truncate(std::vector<Token> tokens, std::size_t max_len) {
    if (max_len < 1) throw Error("truncate: max_len must be >= 1");
    if (tokens.size() > max_len) tokens.resize(max_len);
    return tokens;
}

Vocabulary::Vocabulary() {
    tokens_ = {"<pad>", "<unk>"};
    index_.emplace(tokens_[0], kPad);
    index_.emplace(tokens_[1], kUnk);
}

Vocabulary Vocabulary::build(const std::vector<std::vector<Token>>& texts,
                             const std::vector<std::vector<std::string>>& tree_symbols,
                             int min_count) {
    if (min_count < 1) throw Error("build_vocab: min_count must be >= 1");

    std::map<std::string, std::pair<std::size_t, bool>> seen;  // count, always_keep
    for (const auto& toks : texts)
        for (const Token& t : toks) seen[t.surface].first += 1;
    for (const auto& syms : tree_symbols)
        for (const std::string& s : syms) {
            auto& e = seen[s];
            e.first += 1;
            e.second = true;
        }

    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [tok, e] : seen)
        if (e.second || e.first >= static_cast<std::size_t>(min_count))
            kept.emplace_back(tok, e.first);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary v;
    for (auto& [tok, count] : kept) {
        v.index_.emplace(tok, static_cast<int>(v.tokens_.size()));
        v.tokens_.push_back(tok);
    }
    return v;
}

Vocabulary Vocabulary::from_token_list(std::vector<std::string> tokens) {
    if (tokens.size() < 2 || tokens[0] != "<pad>" || tokens[1] != "<unk>")
        throw Error("Vocabulary: token list must begin with <pad>, <unk>");
    Vocabulary v;
    v.tokens_ = std::move(tokens);
    v.index_.clear();
    for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
        auto [it, fresh] = v.index_.emplace(v.tokens_[i], static_cast<int>(i));
        if (!fresh) throw Error("Vocabulary: duplicate token '" + v.tokens_[i] + "'");
    }
    return v;
}

int Vocabulary::lookup(std::string_view token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
    return index_.find(token) != index_.end();
}

const std::string& Vocabulary::token(int index) const {
    if (index < 0 || index >= size())
        throw Error("Vocabulary: index " + std::to_string(index) + " out of range");
    return tokens_[static_cast<std::size_t>(index)];
}

std::vector<int> Vocabulary::ids_of(const std::vector<Token>& tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const Token& t : tokens) ids.push_back(lookup(t.surface));
    return ids;
}

std::vector<int> Vocabulary::ids_of(const std::vector<std::string>& symbols) const {
    std::vector<int> ids;
    ids.reserve(symbols.size());
    for (const std::string& s : symbols) ids.push_back(lookup(s));
    return ids;
}

namespace {

// per-row seeding keeps OOV vectors stable regardless of file order
void fill_random_row(MatrixX& m, Index r, std::uint64_t seed) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(r) + 1);
    std::uniform_real_distribution<Scalar> dist(-0.1, 0.1);
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
}

}  // namespace

EmbeddingTable random_embedding_table(const Vocabulary& vocab, Index dim, std::uint64_t seed) {
    EmbeddingTable table;
    MatrixX m = MatrixX::Zero(vocab.size(), dim);
    for (Index r = 1; r < m.rows(); ++r) fill_random_row(m, r, seed);
    table.vectors = Parameter(std::move(m));
    table.pretrained_mask.assign(static_cast<std::size_t>(vocab.size()), false);
    return table;
}

std::pair<EmbeddingTable, PretrainedLoadStats> load_pretrained_vectors(
    const std::string& path, const Vocabulary& vocab, Index dim, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open vectors file: " + path);

    EmbeddingTable table = random_embedding_table(vocab, dim, seed);
    MatrixX& m = table.vectors.value;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream iss(line);
        std::string tok;
        iss >> tok;
        int id = vocab.lookup(tok);
        bool wanted = id != Vocabulary::kUnk && id != Vocabulary::kPad;
        VectorX v(dim);
        for (Index c = 0; c < dim; ++c) {
            if (!(iss >> v(c)))
                throw Error(path + ":" + std::to_string(line_no) +
                            ": expected " + std::to_string(dim) + " values for '" + tok + "'");
        }
        Scalar extra;
        if (iss >> extra)
            throw Error(path + ":" + std::to_string(line_no) +
                        ": more than " + std::to_string(dim) + " values for '" + tok + "'");
        if (wanted && !table.pretrained_mask[static_cast<std::size_t>(id)]) {
            m.row(id) = v.transpose();
            table.pretrained_mask[static_cast<std::size_t>(id)] = true;
        }
    }

    PretrainedLoadStats stats;
    for (int i = Vocabulary::kUnk; i < vocab.size(); ++i) {
        if (table.pretrained_mask[static_cast<std::size_t>(i)])
            ++stats.matched;
        else
            ++stats.missing;  // UNK always lands here
    }
    return {std::move(table), stats};
}

}  // namespace punct
