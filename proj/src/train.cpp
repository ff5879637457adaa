#include "punct/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include <json.hpp>

namespace punct {

using nlohmann::json;

namespace {

[[noreturn]] void data_error(const std::string& path, std::size_t line_no,
                             const std::string& what) {
    throw Error(path + ":" + std::to_string(line_no) + ": " + what);
}

Sample parse_record(const std::string& path, std::size_t line_no, const json& j,
                    int num_classes) {
    auto need = [&](const char* key) -> const json& {
        auto it = j.find(key);
        if (it == j.end()) data_error(path, line_no, std::string("missing field '") + key + "'");
        return *it;
    };
    Sample s;
    const json& id = need("id");
    if (!id.is_string()) data_error(path, line_no, "field 'id' must be a string");
    s.id = id.get<std::string>();
    const json& text = need("text");
    if (!text.is_string()) data_error(path, line_no, "field 'text' must be a string");
    s.text = text.get<std::string>();
    const json& label = need("label");
    if (!label.is_number_integer()) data_error(path, line_no, "field 'label' must be an integer");
    s.label = label.get<int>();
    if (s.label < 0) data_error(path, line_no, "label must be >= 0");
    if (num_classes > 0 && s.label >= num_classes)
        data_error(path, line_no, "label " + std::to_string(s.label) + " >= declared classes " +
                                      std::to_string(num_classes));

    auto read_trees = [&](const char* key, std::vector<std::string>& out) {
        auto it = j.find(key);
        if (it == j.end()) return;
        if (!it->is_array()) data_error(path, line_no, std::string("field '") + key + "' must be a list");
        for (const json& e : *it) {
            if (!e.is_string())
                data_error(path, line_no, std::string("field '") + key + "' must hold strings");
            out.push_back(e.get<std::string>());
        }
        for (const std::string& t : out) {
            try {
                parse_bracketed(t);
            } catch (const Error& e) {
                data_error(path, line_no, e.what());
            }
        }
    };
    read_trees("trees", s.trees);
    read_trees("trees_without", s.trees_without);
    return s;
}

Dataset load_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset: " + path);
    Dataset ds;
    std::string line;
    std::size_t line_no = 0;
    int max_label = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto tab = line.rfind('\t');
        if (tab == std::string::npos)
            data_error(path, line_no, "expected <sentence>TAB<label>");
        std::string text = line.substr(0, tab);
        std::string rest = line.substr(tab + 1);
        if (line_no == 1 && rest == "label") continue;  // header row
        try {
            std::size_t used = 0;
            int label = std::stoi(rest, &used);
            if (used != rest.size() || label < 0) throw std::invalid_argument("");
            char buf[16];
            std::snprintf(buf, sizeof buf, "r%05zu", ds.samples.size() + 1);
            ds.samples.push_back(Sample{buf, std::move(text), label, {}, {}});
            max_label = std::max(max_label, label);
        } catch (const std::logic_error&) {
            data_error(path, line_no, "bad label '" + rest + "'");
        }
    }
    ds.num_classes = std::max(2, max_label + 1);
    return ds;
}

}  // namespace

Dataset load_dataset(const std::string& path) {
    if (path.size() > 4 && path.compare(path.size() - 4, 4, ".tsv") == 0)
        return load_tsv(path);

    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset: " + path);

    Dataset ds;
    ds.num_classes = 0;  // unknown until a header or full scan
    std::string line;
    std::size_t line_no = 0;
    bool first_record = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            data_error(path, line_no, std::string("invalid JSON: ") + e.what());
        }
        if (!j.is_object()) data_error(path, line_no, "expected a JSON object");
        if (first_record && j.contains("classes") && !j.contains("text")) {
            if (!j["classes"].is_number_integer() || j["classes"].get<int>() < 2)
                data_error(path, line_no, "header 'classes' must be an integer >= 2");
            ds.num_classes = j["classes"].get<int>();
            first_record = false;
            continue;
        }
        first_record = false;
        ds.samples.push_back(parse_record(path, line_no, j, ds.num_classes));
    }
    if (ds.num_classes == 0) {
        int max_label = 0;
        for (const Sample& s : ds.samples) max_label = std::max(max_label, s.label);
        ds.num_classes = std::max(2, max_label + 1);
    }
    return ds;
}

std::vector<Split> make_splits(std::size_t n, const SplitSpec& spec) {
    if (spec.folds < 1) throw Error("make_splits: folds must be >= 1");
    if (spec.train_pct < 1 || spec.val_pct < 0 || spec.train_pct + spec.val_pct >= 100)
        throw Error("make_splits: ratios must leave room for a test share");
    if (n < static_cast<std::size_t>(spec.folds))
        throw Error("make_splits: dataset size " + std::to_string(n) +
                    " is smaller than fold count " + std::to_string(spec.folds));

    std::vector<Split> out;
    out.reserve(static_cast<std::size_t>(spec.folds));
    for (int fold = 0; fold < spec.folds; ++fold) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::seed_seq seq{spec.seed, static_cast<std::uint64_t>(fold)};
        std::mt19937_64 rng(seq);
        std::shuffle(idx.begin(), idx.end(), rng);

        std::size_t n_train = n * static_cast<std::size_t>(spec.train_pct) / 100;
        std::size_t n_val = n * static_cast<std::size_t>(spec.val_pct) / 100;
        Split s;
        s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        s.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                     idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
        s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
        out.push_back(std::move(s));
    }
    return out;
}

Vocabulary build_vocabulary(std::span<const Sample> samples, const ModelConfig& config,
                            int min_count) {
    std::vector<std::vector<Token>> texts;
    std::vector<std::vector<std::string>> labels;
    texts.reserve(samples.size());
    for (const Sample& s : samples) {
        std::vector<Token> toks =
            truncate(tokenize(s.text), static_cast<std::size_t>(config.max_tokens));
        if (!s.trees.empty()) {
            for (const std::string& t : s.trees)
                labels.push_back(internal_labels(parse_bracketed(t)));
            for (const std::string& t : s.trees_without)
                labels.push_back(internal_labels(parse_bracketed(t)));
            labels.push_back({"ROOT"});  // added by the per-text merge
        } else if (!toks.empty()) {
            labels.push_back(internal_labels(flat_fallback_tree(toks)));
        }
        texts.push_back(std::move(toks));
    }
    return Vocabulary::build(texts, labels, min_count);
}

void TrainConfig::validate() const {
    if (learning_rate <= 0) throw Error("TrainConfig: learning_rate must be positive");
    if (batch_size < 1) throw Error("TrainConfig: batch_size must be >= 1");
    if (max_epochs < 1) throw Error("TrainConfig: max_epochs must be >= 1");
    if (beta1 <= 0 || beta1 >= 1 || beta2 <= 0 || beta2 >= 1)
        throw Error("TrainConfig: betas must lie in (0, 1)");
    if (epsilon <= 0) throw Error("TrainConfig: epsilon must be positive");
    if (patience < 1) throw Error("TrainConfig: patience must be >= 1");
    if (threads < 1) throw Error("TrainConfig: threads must be >= 1");
}

AdamOptimizer::AdamOptimizer(NamedParams params, Scalar lr, Scalar beta1, Scalar beta2,
                             Scalar epsilon)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (auto& [name, p] : params_) {
        m_.push_back(MatrixX::Zero(p->rows(), p->cols()));
        v_.push_back(MatrixX::Zero(p->rows(), p->cols()));
    }
}

void AdamOptimizer::zero_grad() {
    for (auto& [name, p] : params_) p->zero_grad();
}

void AdamOptimizer::step() {
    ++t_;
    Scalar bc1 = 1.0 - std::pow(beta1_, static_cast<Scalar>(t_));
    Scalar bc2 = 1.0 - std::pow(beta2_, static_cast<Scalar>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Parameter& p = *params_[i].second;
        if (!p.trainable) continue;
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * p.grad;
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
        p.value.array() -=
            lr_ * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + eps_);
    }
}

namespace {

std::vector<PreparedInput> prepare_all(std::span<const Sample> samples,
                                       const Vocabulary& vocab, const ModelConfig& config,
                                       bool allow_tree_fallback,
                                       const ExternalContexts* contexts) {
    std::vector<PreparedInput> out;
    out.reserve(samples.size());
    for (const Sample& s : samples)
        out.push_back(prepare_input(s.text, s.trees, vocab, config, allow_tree_fallback,
                                    contexts, s.id));
    return out;
}

int predict(ModelParams& params, const ModelConfig& config, const PreparedInput& input) {
    Tape tape;
    ForwardResult r = forward(tape, params, config, input);
    const MatrixX& p = r.probabilities.value();
    int best = 0;
    for (Index i = 1; i < p.rows(); ++i)
        if (p(i, 0) > p(best, 0)) best = static_cast<int>(i);
    return best;
}

// one worker's share of a batch: forward/backward into private buffers
struct WorkerResult {
    Scalar loss_sum = 0;
    std::unordered_map<Parameter*, MatrixX> grads;
    std::exception_ptr failure;
};

void run_batch_share(ModelParams& params, const ModelConfig& config,
                     std::span<const PreparedInput> inputs,
                     std::span<const Sample> samples,
                     std::span<const std::size_t> order, std::size_t begin,
                     std::size_t end, std::size_t stride, WorkerResult& result) {
    GradSink sink = [&result](Parameter& p) -> MatrixX* {
        auto [it, fresh] = result.grads.try_emplace(&p);
        if (fresh) it->second = MatrixX::Zero(p.rows(), p.cols());
        return &it->second;
    };
    try {
        Tape tape;
        for (std::size_t k = begin; k < end; k += stride) {
            std::size_t idx = order[k];
            tape.clear();
            ForwardResult r = forward(tape, params, config, inputs[idx]);
            Tensor loss = cross_entropy(tape, r.probabilities, samples[idx].label);
            result.loss_sum += loss.scalar();
            tape.backward(loss, sink);
        }
    } catch (...) {
        result.failure = std::current_exception();
    }
}

}  // namespace

TrainResult train(ModelParams& params, const ModelConfig& model_config,
                  const TrainConfig& train_config, const Vocabulary& vocab,
                  std::span<const Sample> train_set, std::span<const Sample> val_set,
                  const ExternalContexts* contexts) {
    train_config.validate();
    if (train_set.empty()) throw Error("train: empty training set");
    for (const Sample& s : train_set)
        if (s.label >= model_config.num_classes)
            throw Error("train: sample '" + s.id + "' has label " + std::to_string(s.label) +
                        " but the model has " + std::to_string(model_config.num_classes) +
                        " classes");

    std::vector<PreparedInput> train_inputs = prepare_all(
        train_set, vocab, model_config, train_config.allow_tree_fallback, contexts);
    std::vector<PreparedInput> val_inputs = prepare_all(
        val_set, vocab, model_config, train_config.allow_tree_fallback, contexts);

    NamedParams named = params.parameters();
    AdamOptimizer opt(named, train_config.learning_rate, train_config.beta1,
                      train_config.beta2, train_config.epsilon);

    auto val_accuracy = [&]() -> Scalar {
        if (val_inputs.empty()) return 0;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < val_inputs.size(); ++i)
            if (predict(params, model_config, val_inputs[i]) == val_set[i].label) ++correct;
        return static_cast<Scalar>(correct) / static_cast<Scalar>(val_inputs.size());
    };

    TrainResult result;
    std::vector<MatrixX> best_values;
    auto snapshot = [&] {
        best_values.clear();
        for (auto& [name, p] : named) best_values.push_back(p->value);
    };
    snapshot();

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    int epochs_since_best = 0;

    for (int epoch = 0; epoch < train_config.max_epochs; ++epoch) {
        std::seed_seq seq{train_config.seed, static_cast<std::uint64_t>(epoch) + 1};
        std::mt19937_64 rng(seq);
        std::shuffle(order.begin(), order.end(), rng);

        Scalar epoch_loss = 0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(train_config.batch_size), ++batch_index) {
            std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(train_config.batch_size));
            std::size_t batch_n = stop - start;
            opt.zero_grad();

            std::size_t workers =
                std::min<std::size_t>(static_cast<std::size_t>(train_config.threads), batch_n);
            std::vector<WorkerResult> results(workers);
            if (workers <= 1) {
                run_batch_share(params, model_config, train_inputs, train_set, order, start,
                                stop, 1, results[0]);
            } else {
                std::vector<std::thread> pool;
                for (std::size_t w = 0; w < workers; ++w)
                    pool.emplace_back(run_batch_share, std::ref(params),
                                      std::cref(model_config), std::span(train_inputs),
                                      train_set, std::span(order), start + w, stop, workers,
                                      std::ref(results[w]));
                for (std::thread& th : pool) th.join();
            }

            for (std::size_t w = 0; w < workers; ++w)
                if (results[w].failure) std::rethrow_exception(results[w].failure);

            // deterministic reduction in worker order
            Scalar batch_loss = 0;
            for (std::size_t w = 0; w < workers; ++w) batch_loss += results[w].loss_sum;
            batch_loss /= static_cast<Scalar>(batch_n);
            if (!std::isfinite(batch_loss))
                throw Error("train: non-finite loss in epoch " + std::to_string(epoch) +
                            ", batch " + std::to_string(batch_index));
            Scalar inv_n = 1.0 / static_cast<Scalar>(batch_n);
            for (std::size_t w = 0; w < workers; ++w)
                for (auto& [name, p] : named) {
                    auto it = results[w].grads.find(p);
                    if (it != results[w].grads.end()) p->grad += inv_n * it->second;
                }

            opt.step();
            epoch_loss += batch_loss * static_cast<Scalar>(batch_n);
        }
        epoch_loss /= static_cast<Scalar>(order.size());

        Scalar acc = val_accuracy();
        result.log.push_back(EpochLog{epoch, epoch_loss, acc});
        // without a validation set there is nothing to select on: keep the
        // final parameters and never stop early
        if (val_inputs.empty() || result.best_epoch < 0 || acc > result.best_val_accuracy) {
            result.best_epoch = epoch;
            result.best_val_accuracy = acc;
            snapshot();
            epochs_since_best = 0;
        } else if (++epochs_since_best >= train_config.patience) {
            break;
        }
    }

    for (std::size_t i = 0; i < named.size(); ++i) named[i].second->value = best_values[i];
    return result;
}

Scalar evaluate_accuracy(ModelParams& params, const ModelConfig& config,
                         const Vocabulary& vocab, std::span<const Sample> samples,
                         bool allow_tree_fallback, const ExternalContexts* contexts) {
    if (samples.empty()) throw Error("evaluate_accuracy: empty dataset");
    std::size_t correct = 0;
    for (const Sample& s : samples) {
        PreparedInput input =
            prepare_input(s.text, s.trees, vocab, config, allow_tree_fallback, contexts, s.id);
        if (predict(params, config, input) == s.label) ++correct;
    }
    return static_cast<Scalar>(correct) / static_cast<Scalar>(samples.size());
}

Scalar mean_loss(ModelParams& params, const ModelConfig& config, const Vocabulary& vocab,
                 std::span<const Sample> samples, bool allow_tree_fallback,
                 const ExternalContexts* contexts) {
    if (samples.empty()) throw Error("mean_loss: empty dataset");
    Scalar total = 0;
    Tape tape;
    for (const Sample& s : samples) {
        tape.clear();
        PreparedInput input =
            prepare_input(s.text, s.trees, vocab, config, allow_tree_fallback, contexts, s.id);
        ForwardResult r = forward(tape, params, config, input);
        total += cross_entropy(tape, r.probabilities, s.label).scalar();
    }
    return total / static_cast<Scalar>(samples.size());
}

// -- checkpoint i/o ----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'P', 'E', 'M', 'B', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void put_string(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("checkpoint: truncated file");
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

std::uint64_t get_u64(std::istream& in) {
    std::uint64_t lo = get_u32(in);
    std::uint64_t hi = get_u32(in);
    return lo | hi << 32;
}

std::string get_string(std::istream& in) {
    std::uint32_t len = get_u32(in);
    std::string s(len, '\0');
    if (len && !in.read(s.data(), len)) throw Error("checkpoint: truncated file");
    return s;
}

json config_to_json(const ModelConfig& c) {
    return json{{"variant", to_string(c.variant)},
                {"num_classes", c.num_classes},
                {"embedding_dim", c.embedding_dim},
                {"text_hidden", c.text_hidden},
                {"tree_hidden", c.tree_hidden},
                {"fusion_hidden", c.fusion_hidden},
                {"fusion_out", c.fusion_out},
                {"cls_hidden1", c.cls_hidden1},
                {"cls_hidden2", c.cls_hidden2},
                {"max_tokens", c.max_tokens},
                {"max_tree_nodes", c.max_tree_nodes},
                {"external_text_dim", c.external_text_dim},
                {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.variant = variant_from_string(j.at("variant").get<std::string>());
    c.num_classes = j.at("num_classes").get<int>();
    c.embedding_dim = j.at("embedding_dim").get<Index>();
    c.text_hidden = j.at("text_hidden").get<Index>();
    c.tree_hidden = j.at("tree_hidden").get<Index>();
    c.fusion_hidden = j.at("fusion_hidden").get<Index>();
    c.fusion_out = j.at("fusion_out").get<Index>();
    c.cls_hidden1 = j.at("cls_hidden1").get<Index>();
    c.cls_hidden2 = j.at("cls_hidden2").get<Index>();
    c.max_tokens = j.at("max_tokens").get<Index>();
    c.max_tree_nodes = j.at("max_tree_nodes").get<Index>();
    c.external_text_dim = j.at("external_text_dim").get<Index>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

void save_checkpoint(const std::string& path, ModelParams& params,
                     const ModelConfig& config, const Vocabulary& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);

    out.write(kMagic, sizeof kMagic);
    put_u32(out, kVersion);
    put_string(out, config_to_json(config).dump());

    put_u64(out, static_cast<std::uint64_t>(vocab.size()));
    for (const std::string& tok : vocab.tokens()) put_string(out, tok);
    for (int i = 0; i < vocab.size(); ++i)
        out.put(params.embedding.pretrained_mask[static_cast<std::size_t>(i)] ? 1 : 0);

    NamedParams named = params.parameters();
    put_u64(out, named.size());
    for (auto& [name, p] : named) {
        put_string(out, name);
        put_u64(out, static_cast<std::uint64_t>(p->rows()));
        put_u64(out, static_cast<std::uint64_t>(p->cols()));
        std::vector<float> buf;
        buf.reserve(static_cast<std::size_t>(p->size()));
        for (Index r = 0; r < p->rows(); ++r)
            for (Index c = 0; c < p->cols(); ++c)
                buf.push_back(static_cast<float>(p->value(r, c)));
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
    if (!out) throw Error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path, std::optional<Variant> expected_variant) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint: " + path);

    char magic[sizeof kMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw Error(path + ": not a checkpoint file (bad magic)");
    std::uint32_t version = get_u32(in);
    if (version != kVersion)
        throw Error(path + ": unsupported checkpoint version " + std::to_string(version));

    ModelConfig config;
    try {
        config = config_from_json(json::parse(get_string(in)));
    } catch (const json::exception& e) {
        throw Error(path + ": corrupt config block: " + e.what());
    }
    if (expected_variant && config.variant != *expected_variant)
        throw Error(path + ": checkpoint holds a " + to_string(config.variant) +
                    " model, expected " + to_string(*expected_variant));

    std::uint64_t vocab_size = get_u64(in);
    std::vector<std::string> tokens;
    tokens.reserve(vocab_size);
    for (std::uint64_t i = 0; i < vocab_size; ++i) tokens.push_back(get_string(in));
    Vocabulary vocab = Vocabulary::from_token_list(std::move(tokens));
    std::vector<bool> mask(vocab_size);
    for (std::uint64_t i = 0; i < vocab_size; ++i) {
        int ch = in.get();
        if (ch == EOF) throw Error("checkpoint: truncated file");
        mask[i] = ch != 0;
    }

    EmbeddingTable table = random_embedding_table(vocab, config.embedding_dim, config.seed);
    table.pretrained_mask = std::move(mask);
    ModelParams params = ModelParams::init(config, std::move(table));

    NamedParams named = params.parameters();
    std::uint64_t blob_count = get_u64(in);
    if (blob_count != named.size())
        throw Error(path + ": expected " + std::to_string(named.size()) +
                    " parameter blobs, found " + std::to_string(blob_count));
    for (auto& [name, p] : named) {
        std::string stored = get_string(in);
        if (stored != name)
            throw Error(path + ": parameter order mismatch: expected '" + name +
                        "', found '" + stored + "'");
        Index rows = static_cast<Index>(get_u64(in));
        Index cols = static_cast<Index>(get_u64(in));
        if (rows != p->rows() || cols != p->cols())
            throw Error(path + ": parameter '" + name + "' has shape " +
                        shape_str(rows, cols) + ", expected " +
                        shape_str(p->rows(), p->cols()));
        std::vector<float> buf(static_cast<std::size_t>(rows * cols));
        if (!in.read(reinterpret_cast<char*>(buf.data()),
                     static_cast<std::streamsize>(buf.size() * sizeof(float))))
            throw Error("checkpoint: truncated file");
        std::size_t k = 0;
        for (Index r = 0; r < rows; ++r)
            for (Index c = 0; c < cols; ++c) p->value(r, c) = buf[k++];
        p->zero_grad();
    }
    return Checkpoint{config, std::move(vocab), std::move(params)};
}

}  // namespace punct
