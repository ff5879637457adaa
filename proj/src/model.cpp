#include "punct/model.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace punct {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::BiGru: return "bigru";
        case Variant::BiGruAttn: return "bigru_attn";
        case Variant::Proposed: return "proposed";
    }
    throw Error("unknown variant");
}

Variant variant_from_string(std::string_view s) {
    if (s == "bigru") return Variant::BiGru;
    if (s == "bigru_attn") return Variant::BiGruAttn;
    if (s == "proposed") return Variant::Proposed;
    throw Error("unknown variant '" + std::string(s) +
                "' (expected bigru, bigru_attn, or proposed)");
}

void ModelConfig::validate() const {
    auto positive = [](Index v, const char* name) {
        if (v < 1) throw Error(std::string("ModelConfig: ") + name + " must be positive");
    };
    positive(embedding_dim, "embedding_dim");
    positive(text_hidden, "text_hidden");
    positive(tree_hidden, "tree_hidden");
    positive(fusion_hidden, "fusion_hidden");
    positive(fusion_out, "fusion_out");
    positive(cls_hidden1, "cls_hidden1");
    positive(cls_hidden2, "cls_hidden2");
    positive(max_tokens, "max_tokens");
    positive(max_tree_nodes, "max_tree_nodes");
    if (num_classes < 2) throw Error("ModelConfig: num_classes must be >= 2");
    if (external_text_dim < 0) throw Error("ModelConfig: external_text_dim must be >= 0");
}

ModelParams ModelParams::init(const ModelConfig& config, EmbeddingTable embedding) {
    config.validate();
    if (embedding.dim() != config.embedding_dim)
        throw Error("ModelParams: embedding table dim " + std::to_string(embedding.dim()) +
                    " does not match config embedding_dim " +
                    std::to_string(config.embedding_dim));

    std::mt19937_64 rng(config.seed);
    ModelParams p;
    p.embedding = std::move(embedding);
    if (config.external_text_dim == 0)
        p.text_rnn = BiGruParams::init(config.embedding_dim, config.text_hidden, rng);
    if (config.variant != Variant::BiGru && config.external_text_dim == 0)
        p.attention = AttentionParams::init(2 * config.text_hidden, rng);
    if (config.variant == Variant::Proposed) {
        p.tree_rnn = BiGruParams::init(config.embedding_dim, config.tree_hidden, rng);
        p.fusion1 = LinearParams::init(
            config.fusion_hidden, config.text_context_dim() + 2 * config.tree_hidden, rng);
        p.fusion2 = LinearParams::init(config.fusion_out, config.fusion_hidden, rng);
    }
    p.cls1 = LinearParams::init(config.cls_hidden1, config.classifier_input_dim(), rng);
    p.cls2 = LinearParams::init(config.cls_hidden2, config.cls_hidden1, rng);
    p.cls3 = LinearParams::init(config.num_classes, config.cls_hidden2, rng);
    return p;
}

NamedParams ModelParams::parameters() {
    NamedParams out;
    out.emplace_back("embedding", &embedding.vectors);
    auto extend = [&out](NamedParams more) {
        out.insert(out.end(), std::make_move_iterator(more.begin()),
                   std::make_move_iterator(more.end()));
    };
    if (text_rnn) extend(text_rnn->parameters("text"));
    if (attention) extend(attention->parameters("attention"));
    if (tree_rnn) extend(tree_rnn->parameters("tree"));
    if (fusion1) extend(fusion1->parameters("fusion1"));
    if (fusion2) extend(fusion2->parameters("fusion2"));
    extend(cls1.parameters("cls1"));
    extend(cls2.parameters("cls2"));
    extend(cls3.parameters("cls3"));
    return out;
}

std::size_t ModelParams::parameter_count() {
    std::size_t n = 0;
    for (auto& [name, p] : parameters()) n += static_cast<std::size_t>(p->size());
    return n;
}

namespace {

std::vector<std::string> traversal_symbols(const std::vector<std::string>& trees,
                                           const std::vector<Token>& tokens,
                                           const ModelConfig& config,
                                           bool allow_tree_fallback) {
    ConstituencyTree merged;
    if (!trees.empty()) {
        std::vector<ConstituencyTree> parsed;
        parsed.reserve(trees.size());
        for (const std::string& s : trees) parsed.push_back(parse_bracketed(s));
        merged = merge_under_root(std::move(parsed));
    } else {
        if (!allow_tree_fallback)
            throw Error("proposed variant: sample has no trees and fallback is disabled");
        if (tokens.empty()) throw Error("proposed variant: empty token sequence");
        merged = flat_fallback_tree(tokens);  // already rooted
    }
    return traverse(merged, static_cast<std::size_t>(config.max_tree_nodes));
}

}  // namespace

PreparedInput prepare_tokens(const std::vector<Token>& tokens,
                             const std::vector<std::string>& trees,
                             const Vocabulary& vocab, const ModelConfig& config,
                             bool allow_tree_fallback, const ExternalContexts* contexts,
                             const std::string& sample_id) {
    std::vector<Token> kept = truncate(tokens, static_cast<std::size_t>(config.max_tokens));
    PreparedInput input;
    input.token_ids = vocab.ids_of(kept);
    input.mask.assign(input.token_ids.size(), true);

    if (config.variant == Variant::Proposed)
        input.traversal_ids =
            vocab.ids_of(traversal_symbols(trees, kept, config, allow_tree_fallback));

    if (config.external_text_dim > 0) {
        if (contexts == nullptr)
            throw Error("config declares external text contexts but none were provided");
        auto it = contexts->find(sample_id);
        if (it == contexts->end())
            throw Error("no external context for sample '" + sample_id + "'");
        if (it->second.size() != config.external_text_dim)
            throw Error("external context for '" + sample_id + "' has width " +
                        std::to_string(it->second.size()) + ", expected " +
                        std::to_string(config.external_text_dim));
        input.external_context = it->second;
    }
    return input;
}

PreparedInput prepare_input(const std::string& text, const std::vector<std::string>& trees,
                            const Vocabulary& vocab, const ModelConfig& config,
                            bool allow_tree_fallback, const ExternalContexts* contexts,
                            const std::string& sample_id) {
    return prepare_tokens(tokenize(text), trees, vocab, config, allow_tree_fallback,
                          contexts, sample_id);
}

namespace {

std::vector<Tensor> embed_ids(Tape& t, ModelParams& params, const std::vector<int>& ids) {
    Tensor table = t.param(params.embedding.vectors);
    std::vector<Tensor> rows;
    rows.reserve(ids.size());
    for (int id : ids) rows.push_back(row(table, id));
    return rows;
}

}  // namespace

Tensor encode_text(Tape& t, ModelParams& params, const ModelConfig& config,
                   const std::vector<int>& token_ids, const std::vector<bool>& mask) {
    if (token_ids.empty()) throw Error("encode_text: empty input");
    if (!params.text_rnn) throw Error("encode_text: model has no text encoder");

    std::vector<Tensor> seq = embed_ids(t, params, token_ids);
    std::vector<Tensor> outputs = bigru_forward(t, *params.text_rnn, seq, mask);

    if (config.variant == Variant::BiGru) {
        // context is the last unmasked position's output
        std::size_t last = 0;
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) last = i;
        return outputs[last];
    }
    return attention_pool(t, *params.attention, outputs, mask);
}

Tensor encode_tree(Tape& t, ModelParams& params, const ModelConfig& config,
                   const std::vector<int>& traversal_ids) {
    if (traversal_ids.empty()) throw Error("encode_tree: empty traversal");
    if (static_cast<Index>(traversal_ids.size()) > config.max_tree_nodes)
        throw Error("encode_tree: traversal longer than max_tree_nodes");
    if (!params.tree_rnn) throw Error("encode_tree: model has no tree encoder");

    std::vector<Tensor> seq = embed_ids(t, params, traversal_ids);
    std::vector<bool> mask(seq.size(), true);
    std::vector<Tensor> outputs = bigru_forward(t, *params.tree_rnn, seq, mask);

    // last output of each direction: forward at the final position, backward
    // at the first
    Index h = config.tree_hidden;
    Tensor fwd_last = slice(outputs.back(), 0, h);
    Tensor bwd_last = slice(outputs.front(), h, h);
    return concat(fwd_last, bwd_last);
}

Tensor fuse(Tape& t, ModelParams& params, Tensor text_context, Tensor tree_context) {
    if (!params.fusion1 || !params.fusion2) throw Error("fuse: model has no fusion layers");
    Tensor joint = concat(text_context, tree_context);
    if (joint.rows() != params.fusion1->in_dim())
        throw Error("fuse: concatenated context has length " + std::to_string(joint.rows()) +
                    ", fusion expects " + std::to_string(params.fusion1->in_dim()));
    Tensor o = tanh(linear(t, *params.fusion1, joint));
    return tanh(linear(t, *params.fusion2, o));
}

Tensor classify(Tape& t, ModelParams& params, Tensor embedding) {
    if (embedding.rows() != params.cls1.in_dim())
        throw Error("classify: embedding length " + std::to_string(embedding.rows()) +
                    " does not match classifier input " + std::to_string(params.cls1.in_dim()));
    Tensor h1 = tanh(linear(t, params.cls1, embedding));
    Tensor h2 = tanh(linear(t, params.cls2, h1));
    return softmax(linear(t, params.cls3, h2));
}

ForwardResult forward(Tape& t, ModelParams& params, const ModelConfig& config,
                      const PreparedInput& input) {
    ForwardResult r{};
    if (config.external_text_dim > 0) {
        if (!input.external_context)
            throw Error("forward: config declares an external text context but the "
                        "input carries none");
        r.text_context = t.constant(*input.external_context);
    } else {
        r.text_context = encode_text(t, params, config, input.token_ids, input.mask);
    }

    if (config.variant == Variant::Proposed) {
        r.tree_context = encode_tree(t, params, config, input.traversal_ids);
        r.fused = fuse(t, params, r.text_context, *r.tree_context);
        r.sentence_embedding = *r.fused;
    } else {
        r.sentence_embedding = r.text_context;
    }
    r.probabilities = classify(t, params, r.sentence_embedding);
    return r;
}

Tensor cross_entropy(Tape& t, Tensor probabilities, int label) {
    if (label < 0 || label >= probabilities.size())
        throw Error("cross_entropy: label " + std::to_string(label) +
                    " out of range for " + std::to_string(probabilities.size()) + " classes");
    return scale(log(element(probabilities, label)), -1.0);
}

VectorX sentence_embedding(ModelParams& params, const ModelConfig& config,
                           const Vocabulary& vocab, const std::string& text,
                           const std::vector<std::string>& trees,
                           bool allow_tree_fallback) {
    Tape tape;
    PreparedInput input = prepare_input(text, trees, vocab, config, allow_tree_fallback);
    ForwardResult r = forward(tape, params, config, input);
    return r.sentence_embedding.value().col(0);
}

ExternalContexts load_external_contexts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open external context file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(path + ": empty file");
    std::istringstream header(line);
    std::string word;
    Index dim = 0;
    header >> word >> dim;
    if (word != "dim" || dim < 1)
        throw Error(path + ":1: expected header 'dim <width>'");

    ExternalContexts out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream iss(line);
        std::string id;
        iss >> id;
        VectorX v(dim);
        for (Index i = 0; i < dim; ++i) {
            if (!(iss >> v(i)))
                throw Error(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(dim) + " values for '" + id + "'");
        }
        out[id] = std::move(v);
    }
    return out;
}

void write_external_contexts(const std::string& path, Index dim,
                             const std::vector<std::pair<std::string, VectorX>>& rows) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "dim " << dim << "\n";
    char buf[32];
    for (const auto& [id, v] : rows) {
        if (v.size() != dim)
            throw Error("write_external_contexts: row '" + id + "' has width " +
                        std::to_string(v.size()));
        out << id;
        for (Index i = 0; i < dim; ++i) {
            std::snprintf(buf, sizeof buf, " %.9g", v(i));
            out << buf;
        }
        out << "\n";
    }
}

}  // namespace punct
