#include "punct/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "punct/analysis.hpp"
#include "punct/train.hpp"

namespace punct {

namespace {

// wrong or missing flags; reported with exit code 1
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// flag name -> PUNCT_EMBED_FLAG_NAME
std::string env_name(std::string flag) {
    std::string out = "PUNCT_EMBED_";
    for (char c : flag) {
        if (c == '-') {
            if (!out.empty() && out.back() == '_') continue;
            out += '_';
        } else {
            out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
    }
    return out;
}

CLI::Option* opt(CLI::App* cmd, const std::string& flag, auto& target,
                 const std::string& help) {
    return cmd->add_option(flag, target, help)->envname(env_name(flag.substr(2)));
}

// flat key=value config files, keys mirroring the long flag names; values
// given on the command line win. Unknown keys are fatal.
void apply_config_file(CLI::App* cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    std::string line;
    std::size_t line_no = 0;
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        std::string entry = trim(line);
        if (entry.empty() || entry[0] == '#') continue;
        auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw Error(path + ":" + std::to_string(line_no) + ": expected key=value");
        std::string key = trim(entry.substr(0, eq));
        std::string value = trim(entry.substr(eq + 1));
        if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
            value.back() == value.front())
            value = value.substr(1, value.size() - 2);

        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config")
            throw Error(path + ":" + std::to_string(line_no) + ": unknown config key '" +
                        key + "'");
        if (opt->count() == 0) {  // command-line flags take precedence
            opt->add_result(value);
            opt->run_callback();
        }
    }
}

CLI::App* make_command(CLI::App& app, const std::string& name, const std::string& help,
                       std::string& config_path) {
    CLI::App* cmd = app.add_subcommand(name, help);
    opt(cmd, "--config", config_path, "flat key=value config file; flags take precedence");
    return cmd;
}

struct DataOptions {
    std::string data;
    long subset = 0;  // 0 = use everything
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
    opt(cmd, "--data", o.data, "dataset file (.jsonl records or SST-2 .tsv)");
    opt(cmd, "--subset", o.subset, "cap the dataset at the first N samples");
}

void require_value(const std::string& v, const char* flag) {
    if (v.empty()) throw UsageError(std::string("missing required option ") + flag);
}

Dataset load_data(const DataOptions& o) {
    require_value(o.data, "--data");
    Dataset ds = load_dataset(o.data);
    if (o.subset > 0 && ds.samples.size() > static_cast<std::size_t>(o.subset))
        ds.samples.resize(static_cast<std::size_t>(o.subset));
    return ds;
}

struct ModelFlags {
    std::string variant = "proposed";
    long embedding_dim = 100;
    long text_hidden = 256;
    long tree_hidden = 128;
    long fusion_hidden = 512;
    long fusion_out = 512;
    long cls_hidden1 = 512;
    long cls_hidden2 = 128;
    long max_tokens = 128;
    long max_tree_nodes = 256;
    long external_text_dim = 0;
};

void add_model_flags(CLI::App* cmd, ModelFlags& m) {
    opt(cmd, "--variant", m.variant, "bigru | bigru_attn | proposed")
        ->check(CLI::IsMember({"bigru", "bigru_attn", "proposed"}));
    opt(cmd, "--embedding-dim", m.embedding_dim, "word/label embedding width");
    opt(cmd, "--text-hidden", m.text_hidden, "text BiGRU hidden size");
    opt(cmd, "--tree-hidden", m.tree_hidden, "tree BiGRU hidden size");
    opt(cmd, "--fusion-hidden", m.fusion_hidden, "fusion first layer width");
    opt(cmd, "--fusion-out", m.fusion_out, "fused representation width");
    opt(cmd, "--cls-hidden1", m.cls_hidden1, "classifier first hidden width");
    opt(cmd, "--cls-hidden2", m.cls_hidden2, "classifier second hidden width");
    opt(cmd, "--max-tokens", m.max_tokens, "token truncation length");
    opt(cmd, "--max-tree-nodes", m.max_tree_nodes, "traversal truncation length");
    opt(cmd, "--external-text-dim", m.external_text_dim,
        "width of external text contexts (0 = use the text encoder)");
}

ModelConfig to_config(const ModelFlags& m, int num_classes, std::uint64_t seed) {
    ModelConfig c;
    c.variant = variant_from_string(m.variant);
    c.num_classes = num_classes;
    c.embedding_dim = m.embedding_dim;
    c.text_hidden = m.text_hidden;
    c.tree_hidden = m.tree_hidden;
    c.fusion_hidden = m.fusion_hidden;
    c.fusion_out = m.fusion_out;
    c.cls_hidden1 = m.cls_hidden1;
    c.cls_hidden2 = m.cls_hidden2;
    c.max_tokens = m.max_tokens;
    c.max_tree_nodes = m.max_tree_nodes;
    c.external_text_dim = m.external_text_dim;
    c.seed = seed;
    c.validate();
    return c;
}

std::optional<ExternalContexts> maybe_contexts(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return load_external_contexts(path);
}

int run_train(const DataOptions& data_opts, const ModelFlags& model_flags,
              const std::string& val_data, double val_fraction,
              const std::string& vectors, const std::string& out,
              const std::string& external, long min_count, bool no_fallback,
              TrainConfig tc) {
    require_value(out, "--out");
    Dataset ds = load_data(data_opts);
    if (ds.samples.empty()) throw Error("train: dataset is empty");

    std::vector<Sample> train_set;
    std::vector<Sample> val_set;
    if (!val_data.empty()) {
        train_set = ds.samples;
        Dataset vds = load_dataset(val_data);
        val_set = std::move(vds.samples);
    } else {
        std::vector<std::size_t> idx(ds.samples.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::seed_seq seq{tc.seed, std::uint64_t{0x76616C}};  // val-split stream
        std::mt19937_64 rng(seq);
        std::shuffle(idx.begin(), idx.end(), rng);
        auto n_val = static_cast<std::size_t>(val_fraction * static_cast<double>(idx.size()));
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_val ? val_set : train_set).push_back(ds.samples[idx[i]]);
    }
    if (train_set.empty()) throw Error("train: no training samples after the split");

    ModelConfig mc = to_config(model_flags, ds.num_classes, tc.seed);
    Vocabulary vocab = build_vocabulary(train_set, mc, static_cast<int>(min_count));
    std::printf("vocabulary: %d entries, %d classes\n", vocab.size(), ds.num_classes);

    EmbeddingTable table;
    if (!vectors.empty()) {
        auto [loaded, stats] = load_pretrained_vectors(vectors, vocab, mc.embedding_dim, mc.seed);
        table = std::move(loaded);
        std::printf("pretrained vectors: %zu matched, %zu missing\n", stats.matched,
                    stats.missing);
    } else {
        table = random_embedding_table(vocab, mc.embedding_dim, mc.seed);
    }

    ModelParams params = ModelParams::init(mc, std::move(table));
    tc.allow_tree_fallback = !no_fallback;
    auto contexts = maybe_contexts(external);

    TrainResult result = train(params, mc, tc, vocab, train_set, val_set,
                               contexts ? &*contexts : nullptr);
    for (const EpochLog& e : result.log)
        std::printf("epoch %d: train_loss=%.4f val_acc=%.4f\n", e.epoch, e.train_loss,
                    e.val_accuracy);

    save_checkpoint(out, params, mc, vocab);
    std::ofstream log(out + ".log", std::ios::app);
    if (!log) throw Error("cannot open for writing: " + out + ".log");
    for (const EpochLog& e : result.log) {
        char line[80];
        std::snprintf(line, sizeof line, "%d,%.6f,%.6f\n", e.epoch, e.train_loss,
                      e.val_accuracy);
        log << line;
    }
    std::printf("checkpoint written to %s (best epoch %d, val_acc=%.4f)\n", out.c_str(),
                result.best_epoch, result.best_val_accuracy);
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"punctuation-aware sentence embeddings: train, evaluate, and analyze"};
    app.require_subcommand(1);
    app.fallthrough(false);

    // train ------------------------------------------------------------
    DataOptions train_data;
    ModelFlags train_model;
    TrainConfig tc;
    std::string train_val_data, train_vectors, train_out = "model.ckpt", train_external;
    double val_fraction = 0.1;
    long min_count = 1;
    long train_seed = 0, train_epochs = tc.max_epochs, train_batch = tc.batch_size;
    long train_patience = tc.patience, train_threads = 1;
    double train_lr = tc.learning_rate;
    bool train_no_fallback = false;

    std::string cfg_train, cfg_eval, cfg_embed, cfg_rep, cfg_case, cfg_splits;
    CLI::App* cmd_train =
        make_command(app, "train", "train a model and write a checkpoint", cfg_train);
    add_data_options(cmd_train, train_data);
    add_model_flags(cmd_train, train_model);
    opt(cmd_train, "--val-data", train_val_data, "explicit validation dataset");
    opt(cmd_train, "--val-fraction", val_fraction,
        "validation share carved from --data when --val-data is absent")
        ->check(CLI::Range(0.0, 0.9));
    opt(cmd_train, "--vectors", train_vectors, "pretrained GloVe-format vectors");
    opt(cmd_train, "--out", train_out, "checkpoint output path");
    opt(cmd_train, "--external-context", train_external, "external text-context file");
    opt(cmd_train, "--min-count", min_count, "vocabulary frequency cutoff");
    opt(cmd_train, "--seed", train_seed, "root seed for init, splits, and shuffles");
    opt(cmd_train, "--epochs", train_epochs, "maximum training epochs");
    opt(cmd_train, "--batch-size", train_batch, "mini-batch size");
    opt(cmd_train, "--lr", train_lr, "Adam learning rate");
    opt(cmd_train, "--patience", train_patience, "early-stop patience (epochs)");
    opt(cmd_train, "--threads", train_threads, "batch-parallel workers");
    cmd_train->add_flag("--no-tree-fallback", train_no_fallback,
                        "error on proposed-variant samples without trees");

    // eval ---------------------------------------------------------------
    DataOptions eval_data;
    std::string eval_ckpt, eval_variant, eval_external;
    bool eval_no_fallback = false;
    CLI::App* cmd_eval =
        make_command(app, "eval", "report accuracy of a checkpoint", cfg_eval);
    add_data_options(cmd_eval, eval_data);
    opt(cmd_eval, "--checkpoint", eval_ckpt, "checkpoint path");
    opt(cmd_eval, "--variant", eval_variant, "require the checkpoint to hold this variant")
        ->check(CLI::IsMember({"bigru", "bigru_attn", "proposed"}));
    opt(cmd_eval, "--external-context", eval_external, "external text-context file");
    cmd_eval->add_flag("--no-tree-fallback", eval_no_fallback,
                       "error on proposed-variant samples without trees");

    // embed --------------------------------------------------------------
    DataOptions embed_data;
    std::string embed_ckpt, embed_out = "embeddings.txt", embed_external;
    CLI::App* cmd_embed =
        make_command(app, "embed", "write per-sample sentence embeddings", cfg_embed);
    add_data_options(cmd_embed, embed_data);
    opt(cmd_embed, "--checkpoint", embed_ckpt, "checkpoint path");
    opt(cmd_embed, "--out", embed_out, "output file (external-context format)");
    opt(cmd_embed, "--external-context", embed_external, "external text-context file");

    // report-similarity ----------------------------------------------------
    DataOptions rep_data;
    std::string rep_ckpt, rep_out = "reports";
    CLI::App* cmd_rep = make_command(
        app, "report-similarity",
        "cosine similarity of embeddings with and without punctuation", cfg_rep);
    add_data_options(cmd_rep, rep_data);
    opt(cmd_rep, "--checkpoint", rep_ckpt, "checkpoint path");
    opt(cmd_rep, "--out", rep_out, "output directory for report.csv and histogram.csv");

    // case-study ------------------------------------------------------------
    std::string cs_pairs, cs_out = "case_study.csv";
    std::vector<std::string> cs_ckpts;
    CLI::App* cmd_case = make_command(
        app, "case-study", "per-pair similarity for one or more checkpoints", cfg_case);
    opt(cmd_case, "--pairs", cs_pairs, "sentence-pair fixture file (JSONL)");
    opt(cmd_case, "--checkpoint", cs_ckpts, "checkpoint path (repeatable)");
    opt(cmd_case, "--out", cs_out, "output CSV path");

    // make-splits --------------------------------------------------------
    DataOptions sp_data;
    SplitSpec spec;
    std::string sp_out = "splits.json";
    long sp_folds = spec.folds, sp_train_pct = spec.train_pct, sp_val_pct = spec.val_pct;
    long sp_seed = 0;
    CLI::App* cmd_splits =
        make_command(app, "make-splits", "deterministic train/val/test folds", cfg_splits);
    add_data_options(cmd_splits, sp_data);
    opt(cmd_splits, "--folds", sp_folds, "number of folds");
    opt(cmd_splits, "--train-pct", sp_train_pct, "train share (percent)");
    opt(cmd_splits, "--val-pct", sp_val_pct, "validation share (percent)");
    opt(cmd_splits, "--seed", sp_seed, "shuffle seed");
    opt(cmd_splits, "--out", sp_out, "output JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exits 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (cmd_train->parsed() && !cfg_train.empty()) apply_config_file(cmd_train, cfg_train);
        if (cmd_eval->parsed() && !cfg_eval.empty()) apply_config_file(cmd_eval, cfg_eval);
        if (cmd_embed->parsed() && !cfg_embed.empty()) apply_config_file(cmd_embed, cfg_embed);
        if (cmd_rep->parsed() && !cfg_rep.empty()) apply_config_file(cmd_rep, cfg_rep);
        if (cmd_case->parsed() && !cfg_case.empty()) apply_config_file(cmd_case, cfg_case);
        if (cmd_splits->parsed() && !cfg_splits.empty())
            apply_config_file(cmd_splits, cfg_splits);

        if (cmd_train->parsed()) {
            tc.seed = static_cast<std::uint64_t>(train_seed);
            tc.max_epochs = static_cast<int>(train_epochs);
            tc.batch_size = static_cast<int>(train_batch);
            tc.learning_rate = train_lr;
            tc.patience = static_cast<int>(train_patience);
            tc.threads = static_cast<int>(train_threads);
            return run_train(train_data, train_model, train_val_data, val_fraction,
                             train_vectors, train_out, train_external, min_count,
                             train_no_fallback, tc);
        }
        if (cmd_eval->parsed()) {
            require_value(eval_ckpt, "--checkpoint");
            std::optional<Variant> expect;
            if (!eval_variant.empty()) expect = variant_from_string(eval_variant);
            Checkpoint ckpt = load_checkpoint(eval_ckpt, expect);
            Dataset ds = load_data(eval_data);
            auto contexts = maybe_contexts(eval_external);
            Scalar acc = evaluate_accuracy(ckpt.params, ckpt.config, ckpt.vocab, ds.samples,
                                           !eval_no_fallback,
                                           contexts ? &*contexts : nullptr);
            std::printf("accuracy=%.4f\n", acc);
            return 0;
        }
        if (cmd_embed->parsed()) {
            require_value(embed_ckpt, "--checkpoint");
            Checkpoint ckpt = load_checkpoint(embed_ckpt);
            Dataset ds = load_data(embed_data);
            auto contexts = maybe_contexts(embed_external);
            std::vector<std::pair<std::string, VectorX>> rows;
            rows.reserve(ds.samples.size());
            for (const Sample& s : ds.samples) {
                Tape tape;
                PreparedInput input = prepare_input(s.text, s.trees, ckpt.vocab, ckpt.config,
                                                    true, contexts ? &*contexts : nullptr,
                                                    s.id);
                ForwardResult r = forward(tape, ckpt.params, ckpt.config, input);
                rows.emplace_back(s.id, r.sentence_embedding.value().col(0));
            }
            Index dim = rows.empty() ? ckpt.config.classifier_input_dim() : rows[0].second.size();
            write_external_contexts(embed_out, dim, rows);
            std::printf("wrote %zu embeddings to %s\n", rows.size(), embed_out.c_str());
            return 0;
        }
        if (cmd_rep->parsed()) {
            require_value(rep_ckpt, "--checkpoint");
            Checkpoint ckpt = load_checkpoint(rep_ckpt);
            Dataset ds = load_data(rep_data);
            SimilarityReport report = punctuation_sensitivity_report(ckpt.params, ckpt.config,
                                                                     ckpt.vocab, ds.samples);
            write_similarity_report(report, rep_out);
            std::printf("samples=%zu skipped=%zu mean=%.4f min=%.4f max=%.4f\n",
                        report.rows.size(), report.skipped, report.mean, report.min,
                        report.max);
            return 0;
        }
        if (cmd_case->parsed()) {
            require_value(cs_pairs, "--pairs");
            if (cs_ckpts.empty()) throw UsageError("missing required option --checkpoint");
            std::vector<CasePair> pairs = load_case_pairs(cs_pairs);
            std::vector<Checkpoint> ckpts;
            ckpts.reserve(cs_ckpts.size());
            for (const std::string& path : cs_ckpts) ckpts.push_back(load_checkpoint(path));
            std::vector<CaseModel> models;
            models.reserve(ckpts.size());
            for (Checkpoint& c : ckpts)
                models.push_back(CaseModel{to_string(c.config.variant), &c.params,
                                           &c.config, &c.vocab});
            std::vector<CaseResult> results = case_study(models, pairs);
            write_case_study(cs_out, pairs, results);
            std::printf("wrote %zu rows to %s\n", results.size(), cs_out.c_str());
            return 0;
        }
        if (cmd_splits->parsed()) {
            Dataset ds = load_data(sp_data);
            spec.folds = static_cast<int>(sp_folds);
            spec.train_pct = static_cast<int>(sp_train_pct);
            spec.val_pct = static_cast<int>(sp_val_pct);
            spec.seed = static_cast<std::uint64_t>(sp_seed);
            std::vector<Split> splits = make_splits(ds.samples.size(), spec);
            nlohmann::json j = nlohmann::json::array();
            for (const Split& s : splits)
                j.push_back({{"train", s.train}, {"val", s.val}, {"test", s.test}});
            std::ofstream out(sp_out);
            if (!out) throw Error("cannot open for writing: " + sp_out);
            out << j.dump() << "\n";
            std::printf("wrote %zu folds to %s\n", splits.size(), sp_out.c_str());
            return 0;
        }
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}

}  // namespace punct
