#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "punct/model.hpp"

using namespace punct;

namespace {

ModelConfig toy_config(Variant variant) {
    ModelConfig c;
    c.variant = variant;
    c.num_classes = 2;
    c.embedding_dim = 4;
    c.text_hidden = 3;
    c.tree_hidden = 2;
    c.fusion_hidden = 5;
    c.fusion_out = 4;
    c.cls_hidden1 = 4;
    c.cls_hidden2 = 3;
    c.max_tokens = 16;
    c.max_tree_nodes = 64;
    c.seed = 17;
    return c;
}

Vocabulary toy_vocab() {
    std::vector<std::vector<Token>> texts = {
        tokenize("what is this thing called love ? the movie was great a b"),
    };
    std::vector<std::vector<std::string>> labels = {
        {"ROOT", "S", "SBARQ", "SQ", "WHNP", "WP", "VBZ", "NP", "DT", "NN", "VP", "VBN",
         ".", "TOK", "PUNCT", "JJ"}};
    return Vocabulary::build(texts, labels, 1);
}

ModelParams toy_params(const ModelConfig& c, const Vocabulary& v) {
    return ModelParams::init(c, random_embedding_table(v, c.embedding_dim, c.seed));
}

std::size_t bigru_count(Index in, Index h) {
    return 2 * 3 * static_cast<std::size_t>(h * in + h * h + h);
}

std::size_t linear_count(Index out, Index in) {
    return static_cast<std::size_t>(out * in + out);
}

std::size_t expected_count(const ModelConfig& c, Index vocab_size) {
    std::size_t n = static_cast<std::size_t>(vocab_size * c.embedding_dim);
    if (c.external_text_dim == 0) {
        n += bigru_count(c.embedding_dim, c.text_hidden);
        if (c.variant != Variant::BiGru) n += static_cast<std::size_t>(2 * c.text_hidden);
    }
    if (c.variant == Variant::Proposed) {
        n += bigru_count(c.embedding_dim, c.tree_hidden);
        n += linear_count(c.fusion_hidden, c.text_context_dim() + 2 * c.tree_hidden);
        n += linear_count(c.fusion_out, c.fusion_hidden);
    }
    n += linear_count(c.cls_hidden1, c.classifier_input_dim());
    n += linear_count(c.cls_hidden2, c.cls_hidden1);
    n += linear_count(c.num_classes, c.cls_hidden2);
    return n;
}

const std::vector<std::string> kFig2With = {
    "(SBARQ (WHNP (WP what)) (. ?))",
    "(SQ (VBZ is) (NP (DT this) (NN thing)) (VP (VBN called) (NP (NN love))) (. ?))"};
const std::vector<std::string> kFig2Without = {
    "(SBARQ (WHNP (WP what)) (SQ (VBZ is) (NP (DT this) (NN thing)) "
    "(VP (VBN called) (NP (NN love)))))"};

}  // namespace

TEST_CASE("parameter counts match the closed form for every variant") {
    Vocabulary vocab = toy_vocab();
    for (Variant v : {Variant::BiGru, Variant::BiGruAttn, Variant::Proposed}) {
        ModelConfig c = toy_config(v);
        ModelParams p = toy_params(c, vocab);
        CHECK(p.parameter_count() == expected_count(c, vocab.size()));
    }
    ModelConfig ext = toy_config(Variant::Proposed);
    ext.external_text_dim = 6;
    ModelParams p = toy_params(ext, vocab);
    CHECK(p.parameter_count() == expected_count(ext, vocab.size()));
}

TEST_CASE("encode_text is deterministic and pools a single token trivially") {
    ModelConfig attn_cfg = toy_config(Variant::BiGruAttn);
    Vocabulary vocab = toy_vocab();
    ModelParams params = toy_params(attn_cfg, vocab);

    std::vector<int> ids = {vocab.lookup("love")};
    Tape t1;
    MatrixX a = encode_text(t1, params, attn_cfg, ids, {true}).value();
    Tape t2;
    MatrixX b = encode_text(t2, params, attn_cfg, ids, {true}).value();
    CHECK(a == b);
    CHECK(a.rows() == 2 * attn_cfg.text_hidden);

    // with one position, attention pooling and last-step pooling coincide
    ModelConfig plain_cfg = attn_cfg;
    plain_cfg.variant = Variant::BiGru;
    Tape t3;
    CHECK(encode_text(t3, params, plain_cfg, ids, {true}).value() == a);

    Tape t4;
    CHECK_THROWS_AS(encode_text(t4, params, attn_cfg, {}, {}), Error);
}

TEST_CASE("encode_tree reduces to single cell steps on a one-node traversal") {
    ModelConfig c = toy_config(Variant::Proposed);
    Vocabulary vocab = toy_vocab();
    ModelParams params = toy_params(c, vocab);

    std::vector<int> ids = {vocab.lookup("ROOT")};
    Tape t;
    MatrixX got = encode_tree(t, params, c, ids).value();

    Tensor emb = row(t.param(params.embedding.vectors), ids[0]);
    MatrixX fwd =
        gru_cell_step(t, params.tree_rnn->forward_cell, emb, t.zeros(c.tree_hidden)).value();
    MatrixX bwd =
        gru_cell_step(t, params.tree_rnn->backward_cell, emb, t.zeros(c.tree_hidden)).value();
    CHECK(got.block(0, 0, c.tree_hidden, 1) == fwd);
    CHECK(got.block(c.tree_hidden, 0, c.tree_hidden, 1) == bwd);
}

TEST_CASE("encode_tree separates traversals that differ in one symbol") {
    ModelConfig c = toy_config(Variant::Proposed);
    Vocabulary vocab = toy_vocab();
    ModelParams params = toy_params(c, vocab);

    std::vector<int> s_a = {vocab.lookup("S"), vocab.lookup("a")};
    std::vector<int> s_b = {vocab.lookup("S"), vocab.lookup("b")};
    Tape t;
    MatrixX ea = encode_tree(t, params, c, s_a).value();
    MatrixX eb = encode_tree(t, params, c, s_b).value();
    CHECK((ea - eb).cwiseAbs().maxCoeff() > 0);

    Tape t2;
    CHECK(encode_tree(t2, params, c, s_a).value() == ea);
    CHECK_THROWS_AS(encode_tree(t2, params, c, {}), Error);
}

TEST_CASE("fuse with zero weights yields tanh of the bias") {
    ModelParams params;
    params.fusion1 = LinearParams{Parameter(MatrixX::Zero(3, 4)),
                                  Parameter(MatrixX::Zero(3, 1))};
    params.fusion2 = LinearParams{Parameter(MatrixX::Zero(2, 3)),
                                  Parameter((MatrixX(2, 1) << 0.5, -2.0).finished())};
    Tape t;
    MatrixX hf = fuse(t, params, t.vector({1, 2}), t.vector({3, 4})).value();
    CHECK(hf(0, 0) == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
    CHECK(hf(1, 0) == doctest::Approx(std::tanh(-2.0)).epsilon(1e-15));
    for (Index i = 0; i < hf.rows(); ++i) CHECK(std::abs(hf(i, 0)) < 1.0);
}

TEST_CASE("fuse matches plain matrix arithmetic on toy dims") {
    MatrixX w1(3, 4), b1(3, 1), w2(2, 3), b2(2, 1);
    w1 << 0.1, -0.2, 0.3, 0.4, 0.5, 0.0, -0.5, 0.2, -0.1, 0.6, 0.2, -0.3;
    b1 << 0.05, -0.1, 0.2;
    w2 << 1.0, -1.0, 0.5, 0.25, 0.75, -0.25;
    b2 << 0.0, 0.1;

    ModelParams params;
    params.fusion1 = LinearParams{Parameter(w1), Parameter(b1)};
    params.fusion2 = LinearParams{Parameter(w2), Parameter(b2)};

    VectorX ht(2), hr(2);
    ht << 0.7, -0.4;
    hr << 0.2, 0.9;
    MatrixX joint(4, 1);
    joint << 0.7, -0.4, 0.2, 0.9;
    MatrixX o = (w1 * joint + b1).array().tanh();
    MatrixX expected = (w2 * o + b2).array().tanh();

    Tape t;
    MatrixX got = fuse(t, params, t.vector({0.7, -0.4}), t.vector({0.2, 0.9})).value();
    CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("classifier probabilities behave") {
    ModelConfig c = toy_config(Variant::BiGruAttn);
    Vocabulary vocab = toy_vocab();
    ModelParams params = toy_params(c, vocab);

    const MatrixX input = MatrixX::Constant(2 * c.text_hidden, 1, 0.3);
    Tape t;
    MatrixX p = classify(t, params, t.constant(input)).value();
    CHECK(std::abs(p.sum() - 1.0) <= 1e-9);

    // zero final layer -> uniform distribution
    params.cls3.weight.value.setZero();
    params.cls3.bias.value.setZero();
    Tape t2;
    MatrixX uniform = classify(t2, params, t2.constant(input)).value();
    for (Index i = 0; i < uniform.rows(); ++i)
        CHECK(uniform(i, 0) == doctest::Approx(0.5).epsilon(1e-12));

    // logits (0, ln 3) -> (0.25, 0.75)
    params.cls3.bias.value << 0.0, std::log(3.0);
    Tape t3;
    MatrixX skewed = classify(t3, params, t3.constant(input)).value();
    CHECK(skewed(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(skewed(1, 0) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("the plain bigru variant ignores trees entirely") {
    ModelConfig c = toy_config(Variant::BiGru);
    Vocabulary vocab = toy_vocab();
    ModelParams params = toy_params(c, vocab);

    PreparedInput with = prepare_input("the movie was great", kFig2With, vocab, c);
    PreparedInput without = prepare_input("the movie was great", {}, vocab, c);
    Tape t;
    MatrixX pw = forward(t, params, c, with).probabilities.value();
    MatrixX po = forward(t, params, c, without).probabilities.value();
    CHECK(pw == po);
}

TEST_CASE("proposed embeddings separate the two figure-2 readings") {
    ModelConfig c = toy_config(Variant::Proposed);
    Vocabulary vocab = toy_vocab();
    ModelParams params = toy_params(c, vocab);

    VectorX with = sentence_embedding(params, c, vocab,
                                      "what? is this thing called love?", kFig2With);
    VectorX without = sentence_embedding(params, c, vocab,
                                         "what is this thing called love", kFig2Without);
    CHECK((with - without).cwiseAbs().maxCoeff() > 0);
}

TEST_CASE("proposed forward exposes every intermediate representation") {
    ModelConfig c = toy_config(Variant::Proposed);
    Vocabulary vocab = toy_vocab();
    ModelParams params = toy_params(c, vocab);

    PreparedInput input = prepare_input("this thing called love", kFig2Without, vocab, c);
    Tape t;
    ForwardResult r = forward(t, params, c, input);
    REQUIRE(r.tree_context.has_value());
    REQUIRE(r.fused.has_value());
    CHECK(r.sentence_embedding.value() == r.fused->value());
    CHECK(r.text_context.rows() == 2 * c.text_hidden);
    CHECK(r.tree_context->rows() == 2 * c.tree_hidden);
    for (Index i = 0; i < r.fused->rows(); ++i)
        CHECK(std::abs(r.fused->value()(i, 0)) < 1.0);

    ModelConfig base = toy_config(Variant::BiGruAttn);
    ModelParams bparams = toy_params(base, vocab);
    PreparedInput binput = prepare_input("this thing called love", {}, vocab, base);
    Tape t2;
    ForwardResult br = forward(t2, bparams, base, binput);
    CHECK(br.sentence_embedding.value() == br.text_context.value());
    CHECK_FALSE(br.tree_context.has_value());
}

TEST_CASE("prepare_input without trees errors when the fallback is disabled") {
    ModelConfig c = toy_config(Variant::Proposed);
    Vocabulary vocab = toy_vocab();
    CHECK_THROWS_AS(prepare_input("the movie was great", {}, vocab, c, false), Error);
    CHECK_NOTHROW(prepare_input("the movie was great", {}, vocab, c, true));
}

TEST_CASE("identical seeds give identical models and outputs") {
    ModelConfig c = toy_config(Variant::Proposed);
    Vocabulary vocab = toy_vocab();
    ModelParams p1 = toy_params(c, vocab);
    ModelParams p2 = toy_params(c, vocab);

    VectorX e1 = sentence_embedding(p1, c, vocab, "the movie was great", {});
    VectorX e2 = sentence_embedding(p2, c, vocab, "the movie was great", {});
    CHECK(e1 == e2);
}

TEST_CASE("gradient check through the full proposed forward") {
    ModelConfig c = toy_config(Variant::Proposed);
    Vocabulary vocab = toy_vocab();
    ModelParams params = toy_params(c, vocab);
    PreparedInput input = prepare_input("what? is this thing called love?", kFig2With,
                                        vocab, c);

    auto loss_fn = [&](Tape& t) {
        ForwardResult r = forward(t, params, c, input);
        return cross_entropy(t, r.probabilities, 1);
    };
    std::vector<Parameter*> ps;
    for (auto& [name, p] : params.parameters()) ps.push_back(p);
    CHECK(grad_check(loss_fn, ps, 1e-4) < 1e-4);
}

TEST_CASE("external text contexts replace the text encoder") {
    ModelConfig c = toy_config(Variant::Proposed);
    c.external_text_dim = 3;
    Vocabulary vocab = toy_vocab();
    ModelParams params = toy_params(c, vocab);
    CHECK_FALSE(params.text_rnn.has_value());

    ExternalContexts contexts;
    contexts["s1"] = (VectorX(3) << 0.2, -0.4, 0.9).finished();
    contexts["s2"] = (VectorX(3) << -0.8, 0.1, 0.3).finished();

    PreparedInput i1 = prepare_input("the movie was great", {}, vocab, c, true,
                                     &contexts, "s1");
    PreparedInput i2 = prepare_input("the movie was great", {}, vocab, c, true,
                                     &contexts, "s2");
    Tape t;
    ForwardResult r1 = forward(t, params, c, i1);
    ForwardResult r2 = forward(t, params, c, i2);
    CHECK(r1.text_context.value() == contexts["s1"]);
    CHECK((r1.sentence_embedding.value() - r2.sentence_embedding.value())
              .cwiseAbs()
              .maxCoeff() > 0);

    CHECK_THROWS_AS(prepare_input("x", {}, vocab, c, true, &contexts, "missing"), Error);
    CHECK_THROWS_AS(prepare_input("x", {}, vocab, c, true, nullptr, "s1"), Error);
}

TEST_CASE("external context files round trip") {
    auto path = (std::filesystem::temp_directory_path() / "punct_ctx.txt").string();
    std::vector<std::pair<std::string, VectorX>> rows = {
        {"a", (VectorX(3) << 1.0, -0.125, 0.5).finished()},
        {"b", (VectorX(3) << 0.0, 2.0, -3.5).finished()}};
    write_external_contexts(path, 3, rows);

    ExternalContexts loaded = load_external_contexts(path);
    REQUIRE(loaded.size() == 2);
    CHECK((loaded["a"] - rows[0].second).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((loaded["b"] - rows[1].second).cwiseAbs().maxCoeff() < 1e-8);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(load_external_contexts("/nonexistent/ctx.txt"), Error);
}
