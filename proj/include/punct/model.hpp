#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "punct/layers.hpp"
#include "punct/text.hpp"
#include "punct/tree.hpp"

namespace punct {

enum class Variant { BiGru, BiGruAttn, Proposed };

std::string to_string(Variant v);
Variant variant_from_string(std::string_view s);

struct ModelConfig {
    Variant variant = Variant::Proposed;
    int num_classes = 2;
    Index embedding_dim = 100;
    Index text_hidden = 256;
    Index tree_hidden = 128;
    Index fusion_hidden = 512;
    Index fusion_out = 512;
    Index cls_hidden1 = 512;
    Index cls_hidden2 = 128;
    Index max_tokens = 128;
    Index max_tree_nodes = 256;
    /// When nonzero, the text context comes from an external per-sample
    /// vector of this width instead of the text encoder.
    Index external_text_dim = 0;
    std::uint64_t seed = 0;

    Index text_context_dim() const {
        return external_text_dim > 0 ? external_text_dim : 2 * text_hidden;
    }
    Index classifier_input_dim() const {
        return variant == Variant::Proposed ? fusion_out : text_context_dim();
    }
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

struct ModelParams {
    EmbeddingTable embedding;
    std::optional<BiGruParams> text_rnn;        // absent when external_text_dim > 0
    std::optional<AttentionParams> attention;   // absent for the plain BiGru variant
    std::optional<BiGruParams> tree_rnn;        // proposed only
    std::optional<LinearParams> fusion1;        // proposed only
    std::optional<LinearParams> fusion2;
    LinearParams cls1, cls2, cls3;

    static ModelParams init(const ModelConfig& config, EmbeddingTable embedding);

    /// Stable name -> parameter listing; order fixed across runs. Drives the
    /// optimizer and the checkpoint format.
    NamedParams parameters();
    std::size_t parameter_count();
};

/// Token ids plus (for the proposed variant) the tree traversal symbol ids.
struct PreparedInput {
    std::vector<int> token_ids;
    std::vector<bool> mask;                   // true = real token
    std::vector<int> traversal_ids;           // empty unless proposed
    std::optional<VectorX> external_context;  // set when external_text_dim > 0
};

using ExternalContexts = std::unordered_map<std::string, VectorX>;

/// Tokenize -> truncate -> ids; for the proposed variant, parse and merge the
/// given per-sentence trees (or fall back to a flat tree over the tokens) and
/// linearize them. `sample_id` selects the row of `contexts` when the config
/// declares an external text width.
PreparedInput prepare_input(const std::string& text,
                            const std::vector<std::string>& trees,
                            const Vocabulary& vocab, const ModelConfig& config,
                            bool allow_tree_fallback = true,
                            const ExternalContexts* contexts = nullptr,
                            const std::string& sample_id = {});

/// Same, starting from an already tokenized (and possibly stripped) text.
PreparedInput prepare_tokens(const std::vector<Token>& tokens,
                             const std::vector<std::string>& trees,
                             const Vocabulary& vocab, const ModelConfig& config,
                             bool allow_tree_fallback = true,
                             const ExternalContexts* contexts = nullptr,
                             const std::string& sample_id = {});

Tensor encode_text(Tape& t, ModelParams& params, const ModelConfig& config,
                   const std::vector<int>& token_ids, const std::vector<bool>& mask);

Tensor encode_tree(Tape& t, ModelParams& params, const ModelConfig& config,
                   const std::vector<int>& traversal_ids);

/// o = tanh(W1 (H'||H_T) + b1); H_F = tanh(W2 o + b2)
Tensor fuse(Tape& t, ModelParams& params, Tensor text_context, Tensor tree_context);

/// linear -> tanh -> linear -> tanh -> linear -> softmax
Tensor classify(Tape& t, ModelParams& params, Tensor embedding);

struct ForwardResult {
    Tensor probabilities;
    Tensor text_context;                  // H'
    std::optional<Tensor> tree_context;   // H_T, proposed only
    std::optional<Tensor> fused;          // H_F, proposed only
    Tensor sentence_embedding;            // H_F for proposed, H' otherwise
};

ForwardResult forward(Tape& t, ModelParams& params, const ModelConfig& config,
                      const PreparedInput& input);

/// -log p[label]
Tensor cross_entropy(Tape& t, Tensor probabilities, int label);

/// Convenience: builds a private tape and returns a plain copy of the
/// sentence embedding for one text.
VectorX sentence_embedding(ModelParams& params, const ModelConfig& config,
                           const Vocabulary& vocab, const std::string& text,
                           const std::vector<std::string>& trees,
                           bool allow_tree_fallback = true);

/// External text-context file: header "dim <width>", then one line per
/// sample: id followed by <width> floats.
ExternalContexts load_external_contexts(const std::string& path);
void write_external_contexts(const std::string& path, Index dim,
                             const std::vector<std::pair<std::string, VectorX>>& rows);

}  // namespace punct
