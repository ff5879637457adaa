#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "punct/model.hpp"

namespace punct {

struct Sample {
    std::string id;
    std::string text;
    int label = 0;
    std::vector<std::string> trees;          // bracketed, one per sentence
    std::vector<std::string> trees_without;  // optional: trees for the stripped text
};

struct Dataset {
    std::vector<Sample> samples;
    int num_classes = 2;

    std::size_t size() const { return samples.size(); }
};

/// JSONL records with keys id, text, label, optional trees / trees_without;
/// an optional first-line header {"classes": C}. Files ending in .tsv are
/// read as SST-2-style "sentence<TAB>label" rows instead. Malformed lines
/// are reported with their line numbers.
Dataset load_dataset(const std::string& path);

struct SplitSpec {
    int folds = 10;
    int train_pct = 45;
    int val_pct = 5;  // test takes the remainder
    std::uint64_t seed = 0;
};

struct Split {
    std::vector<std::size_t> train, val, test;
};

/// `folds` independent seeded shuffles, each cut at the configured ratios.
/// Every fold is an exact disjoint partition of 0..n-1.
std::vector<Split> make_splits(std::size_t n, const SplitSpec& spec);

/// Token vocabulary over the samples' texts plus every tree label seen
/// (gold trees when present, otherwise the flat fallback labels).
Vocabulary build_vocabulary(std::span<const Sample> samples, const ModelConfig& config,
                            int min_count = 1);

struct TrainConfig {
    Scalar learning_rate = 1e-3;
    int batch_size = 32;
    int max_epochs = 30;
    Scalar beta1 = 0.9;
    Scalar beta2 = 0.999;
    Scalar epsilon = 1e-8;
    std::uint64_t seed = 0;
    int patience = 5;  // early stop on validation accuracy
    int threads = 1;
    bool allow_tree_fallback = true;

    void validate() const;
};

class AdamOptimizer {
public:
    AdamOptimizer(NamedParams params, Scalar lr, Scalar beta1, Scalar beta2, Scalar epsilon);

    void zero_grad();
    void step();
    long steps_taken() const { return t_; }

private:
    NamedParams params_;
    std::vector<MatrixX> m_, v_;
    Scalar lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

struct EpochLog {
    int epoch;
    Scalar train_loss;
    Scalar val_accuracy;
};

struct TrainResult {
    std::vector<EpochLog> log;
    int best_epoch = -1;
    Scalar best_val_accuracy = 0;
};

/// Mini-batch Adam on the mean cross-entropy. Parameters are left at the
/// best-validation-accuracy epoch. Throws on a non-finite batch loss.
TrainResult train(ModelParams& params, const ModelConfig& model_config,
                  const TrainConfig& train_config, const Vocabulary& vocab,
                  std::span<const Sample> train_set, std::span<const Sample> val_set,
                  const ExternalContexts* contexts = nullptr);

/// Fraction of samples whose argmax class equals the label; ties argmax to
/// the lower class index.
Scalar evaluate_accuracy(ModelParams& params, const ModelConfig& config,
                         const Vocabulary& vocab, std::span<const Sample> samples,
                         bool allow_tree_fallback = true,
                         const ExternalContexts* contexts = nullptr);

/// Mean cross-entropy without updating anything.
Scalar mean_loss(ModelParams& params, const ModelConfig& config, const Vocabulary& vocab,
                 std::span<const Sample> samples, bool allow_tree_fallback = true,
                 const ExternalContexts* contexts = nullptr);

/// Binary checkpoint: magic, version, config, vocabulary, then named float32
/// parameter blobs. Round trip reproduces values to float32 rounding.
void save_checkpoint(const std::string& path, ModelParams& params,
                     const ModelConfig& config, const Vocabulary& vocab);

struct Checkpoint {
    ModelConfig config;
    Vocabulary vocab;
    ModelParams params;
};

Checkpoint load_checkpoint(const std::string& path,
                           std::optional<Variant> expected_variant = {});

}  // namespace punct
