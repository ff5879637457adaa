#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "punct/text.hpp"

using namespace punct;

namespace {

std::vector<std::string> surfaces(const std::vector<Token>& toks) {
    std::vector<std::string> out;
    for (const Token& t : toks) out.push_back(t.surface);
    return out;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("tokenize splits punctuation and clitics") {
    auto toks = tokenize("Let's eat, grandma!");
    CHECK(surfaces(toks) ==
          std::vector<std::string>{"let", "'s", "eat", ",", "grandma", "!"});
    CHECK_FALSE(toks[1].is_punctuation);  // 's keeps its letters
    CHECK(toks[3].is_punctuation);
    CHECK(toks[5].is_punctuation);
}

TEST_CASE("tokenize keeps sentence-final periods separate") {
    CHECK(surfaces(tokenize("Help. wanted.")) ==
          std::vector<std::string>{"help", ".", "wanted", "."});
}

TEST_CASE("tokenize of empty text is empty") {
    CHECK(tokenize("").empty());
    CHECK(tokenize("   \t\n").empty());
}

TEST_CASE("hyphenated words split into three tokens") {
    auto toks = tokenize("twenty-four");
    CHECK(surfaces(toks) == std::vector<std::string>{"twenty", "-", "four"});
    CHECK(toks[1].is_punctuation);
}

TEST_CASE("unicode punctuation becomes single tokens") {
    auto toks = tokenize("wait—no… “fine”");
    CHECK(surfaces(toks) == std::vector<std::string>{"wait", "—", "no", "…",
                                                     "“", "fine", "”"});
    for (std::size_t i : {std::size_t{1}, std::size_t{3}, std::size_t{4}, std::size_t{6}})
        CHECK(toks[i].is_punctuation);
}

TEST_CASE("quoted words keep quotes as their own tokens") {
    CHECK(surfaces(tokenize("called 'love'?")) ==
          std::vector<std::string>{"called", "'", "love", "'", "?"});
}

TEST_CASE("strip_punctuation keeps words and clitics") {
    auto toks = tokenize("Let's eat, grandma!");
    CHECK(surfaces(strip_punctuation(toks)) ==
          std::vector<std::string>{"let", "'s", "eat", "grandma"});

    auto clean = tokenize("nothing to remove here");
    CHECK(strip_punctuation(clean) == clean);

    CHECK(strip_punctuation(tokenize(". !")).empty());
}

TEST_CASE("strip_punctuation is idempotent") {
    auto once = strip_punctuation(tokenize("Well, well... who is it?"));
    CHECK(strip_punctuation(once) == once);
}

TEST_CASE("stripping matches deleting punctuation characters from the text") {
    // holds for texts without intra-word marks such as clitics or hyphens
    const char* corpus[] = {
        "Help. wanted.",
        "eat , grandma !",
        "When the plot kicks in, the film loses credibility.",
        "what? is this thing called love?",
        "No, investments will be made over three years.",
    };
    for (const char* text : corpus) {
        std::string deleted;
        for (char c : std::string(text)) {
            if (!is_punctuation_codepoint(static_cast<unsigned char>(c))) deleted += c;
        }
        CHECK(surfaces(strip_punctuation(tokenize(text))) == surfaces(tokenize(deleted)));
    }
}

TEST_CASE("truncate caps the token count") {
    std::vector<Token> toks(200, Token{"w", false});
    CHECK(truncate(toks).size() == 128);
    CHECK(truncate(std::vector<Token>(5, Token{"w", false})).size() == 5);
    CHECK(truncate(toks, 1).size() == 1);
    CHECK_THROWS_AS(truncate(toks, 0), Error);
}

TEST_CASE("vocabulary honours min_count and keeps tree labels") {
    std::vector<std::vector<Token>> texts = {
        {Token{"a", false}, Token{"a", false}, Token{"b", false}}};
    Vocabulary v = Vocabulary::build(texts, {}, 2);
    CHECK(v.size() == 3);  // <pad>, <unk>, a
    CHECK(v.lookup("a") == 2);
    CHECK(v.lookup("b") == Vocabulary::kUnk);

    Vocabulary all = Vocabulary::build(texts, {}, 1);
    CHECK(all.size() == 4);

    Vocabulary with_labels = Vocabulary::build(texts, {{"NP", "VP"}}, 2);
    CHECK(with_labels.contains("NP"));
    CHECK(with_labels.contains("VP"));
    CHECK_FALSE(with_labels.contains("b"));
}

TEST_CASE("vocabulary breaks frequency ties lexicographically") {
    std::vector<std::vector<Token>> texts = {{Token{"b", false}, Token{"a", false},
                                              Token{"b", false}, Token{"a", false}}};
    Vocabulary v = Vocabulary::build(texts, {}, 1);
    CHECK(v.lookup("a") == 2);
    CHECK(v.lookup("b") == 3);
}

TEST_CASE("vocabulary indices are stable across rebuilds") {
    std::vector<std::vector<Token>> texts = {
        tokenize("the movie was great"), tokenize("the plot was thin, really thin")};
    Vocabulary v1 = Vocabulary::build(texts, {{"ROOT", "S"}}, 1);
    Vocabulary v2 = Vocabulary::build(texts, {{"ROOT", "S"}}, 1);
    CHECK(v1.tokens() == v2.tokens());
}

TEST_CASE("empty corpus reduces to the reserved entries") {
    Vocabulary v = Vocabulary::build({}, {}, 1);
    CHECK(v.size() == 2);
    CHECK(v.lookup("anything") == Vocabulary::kUnk);
}

TEST_CASE("pretrained vectors land on their rows, the rest are seeded") {
    std::vector<std::vector<Token>> texts = {tokenize("cat sat")};
    Vocabulary vocab = Vocabulary::build(texts, {{"NP"}}, 1);
    auto path = temp_file("punct_vectors_ok.txt",
                          "cat 1.0 2.0 3.0\n"
                          "dog 9.0 9.0 9.0\n");

    auto [table, stats] = load_pretrained_vectors(path.string(), vocab, 3, 7);
    CHECK(stats.matched == 1);
    CHECK(stats.missing == static_cast<std::size_t>(vocab.size()) - 2);

    int cat = vocab.lookup("cat");
    CHECK(table.vectors.value(cat, 0) == 1.0);
    CHECK(table.vectors.value(cat, 2) == 3.0);
    CHECK(table.pretrained_mask[static_cast<std::size_t>(cat)]);

    // PAD row stays zero; the label row is random but reproducible
    CHECK(table.vectors.value.row(Vocabulary::kPad).isZero(0));
    auto [table2, stats2] = load_pretrained_vectors(path.string(), vocab, 3, 7);
    CHECK(table.vectors.value == table2.vectors.value);

    int np = vocab.lookup("NP");
    CHECK_FALSE(table.pretrained_mask[static_cast<std::size_t>(np)]);
    CHECK_FALSE(table.vectors.value.row(np).isZero(0));
    for (Index c = 0; c < 3; ++c) {
        CHECK(table.vectors.value(np, c) >= -0.1);
        CHECK(table.vectors.value(np, c) <= 0.1);
    }

    std::filesystem::remove(path);
}

TEST_CASE("vector rows with the wrong width name the line") {
    Vocabulary vocab = Vocabulary::build({tokenize("cat")}, {}, 1);
    auto path = temp_file("punct_vectors_bad.txt",
                          "dog 1.0 2.0 3.0\n"
                          "cat 1.0 2.0\n");
    try {
        load_pretrained_vectors(path.string(), vocab, 3, 0);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("missing vectors file raises an i/o error") {
    Vocabulary vocab;
    CHECK_THROWS_AS(load_pretrained_vectors("/nonexistent/vectors.txt", vocab, 3, 0), Error);
}

TEST_CASE("random embedding tables freeze the pad row") {
    Vocabulary vocab = Vocabulary::build({tokenize("a b c")}, {}, 1);
    EmbeddingTable t = random_embedding_table(vocab, 4, 11);
    CHECK(t.rows() == vocab.size());
    CHECK(t.dim() == 4);
    CHECK(t.vectors.value.row(Vocabulary::kPad).isZero(0));
    CHECK_FALSE(t.vectors.value.row(Vocabulary::kUnk).isZero(0));
}
