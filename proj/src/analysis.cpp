#include "punct/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

namespace punct {

using nlohmann::json;

Scalar cosine_similarity(const VectorX& a, const VectorX& b) {
    if (a.size() != b.size())
        throw Error("cosine_similarity: length mismatch: " + std::to_string(a.size()) +
                    " vs " + std::to_string(b.size()));
    Scalar na = a.norm();
    Scalar nb = b.norm();
    if (na == 0 || nb == 0) throw Error("cosine_similarity: undefined for a zero vector");
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

std::size_t similarity_bin(Scalar s) {
    auto bin = static_cast<long>(std::floor((s + 1.0) * 10.0));
    return static_cast<std::size_t>(std::clamp(bin, 0l, 19l));
}

namespace {

VectorX embed_tokens(ModelParams& params, const ModelConfig& config,
                     const Vocabulary& vocab, const std::vector<Token>& tokens,
                     const std::vector<std::string>& trees) {
    Tape tape;
    PreparedInput input = prepare_tokens(tokens, trees, vocab, config);
    ForwardResult r = forward(tape, params, config, input);
    return r.sentence_embedding.value().col(0);
}

}  // namespace

SimilarityReport punctuation_sensitivity_report(ModelParams& params,
                                                const ModelConfig& config,
                                                const Vocabulary& vocab,
                                                std::span<const Sample> samples) {
    SimilarityReport report;
    for (const Sample& s : samples) {
        std::vector<Token> with = tokenize(s.text);
        std::vector<Token> without = strip_punctuation(with);
        if (without.empty()) {
            ++report.skipped;
            continue;
        }
        // gold trees only when both versions have them; fallback must be
        // symmetric or the tree signal would be an artifact
        bool gold = !s.trees.empty() && !s.trees_without.empty();
        VectorX e_with = embed_tokens(params, config, vocab, with,
                                      gold ? s.trees : std::vector<std::string>{});
        VectorX e_without = embed_tokens(params, config, vocab, without,
                                         gold ? s.trees_without : std::vector<std::string>{});
        report.rows.push_back({s.id, cosine_similarity(e_with, e_without)});
    }

    if (!report.rows.empty()) {
        report.min = report.rows[0].similarity;
        report.max = report.rows[0].similarity;
        Scalar total = 0;
        for (const auto& r : report.rows) {
            total += r.similarity;
            report.min = std::min(report.min, r.similarity);
            report.max = std::max(report.max, r.similarity);
            ++report.histogram[similarity_bin(r.similarity)];
        }
        report.mean = total / static_cast<Scalar>(report.rows.size());
    }
    return report;
}

namespace {

std::string format_sim(Scalar s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", s);
    return buf;
}

std::string csv_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

void write_similarity_report(const SimilarityReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(out_dir + "/report.csv");
        if (!out) throw Error("cannot open for writing: " + out_dir + "/report.csv");
        out << "id,similarity\n";
        for (const auto& r : report.rows)
            out << csv_quote(r.id) << "," << format_sim(r.similarity) << "\n";
    }
    {
        std::ofstream out(out_dir + "/histogram.csv");
        if (!out) throw Error("cannot open for writing: " + out_dir + "/histogram.csv");
        out << "bin_low,bin_high,count\n";
        for (std::size_t b = 0; b < report.histogram.size(); ++b) {
            Scalar low = -1.0 + 0.1 * static_cast<Scalar>(b);
            char line[64];
            std::snprintf(line, sizeof line, "%.1f,%.1f,%zu\n", low, low + 0.1,
                          report.histogram[b]);
            out << line;
        }
    }
}

std::vector<CasePair> load_case_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open pairs file: " + path);
    std::vector<CasePair> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        try {
            CasePair p;
            p.id = j.at("id").get<std::string>();
            p.group = j.value("group", std::string{});
            const json& w = j.at("with");
            const json& wo = j.at("without");
            p.with_text = w.at("text").get<std::string>();
            p.without_text = wo.at("text").get<std::string>();
            if (w.contains("trees"))
                p.with_trees = w["trees"].get<std::vector<std::string>>();
            if (wo.contains("trees"))
                p.without_trees = wo["trees"].get<std::vector<std::string>>();
            for (const auto& t : p.with_trees) parse_bracketed(t);
            for (const auto& t : p.without_trees) parse_bracketed(t);
            pairs.push_back(std::move(p));
        } catch (const json::exception& e) {
            throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return pairs;
}

std::vector<CaseResult> case_study(std::span<const CaseModel> models,
                                   std::span<const CasePair> pairs) {
    if (models.empty()) throw Error("case_study: no models");
    std::vector<CaseResult> results;
    results.reserve(models.size() * pairs.size());
    for (const CasePair& pair : pairs) {
        for (const CaseModel& m : models) {
            VectorX e_with = sentence_embedding(*m.params, *m.config, *m.vocab,
                                                pair.with_text, pair.with_trees);
            VectorX e_without = sentence_embedding(*m.params, *m.config, *m.vocab,
                                                   pair.without_text, pair.without_trees);
            results.push_back({pair.id, m.name, cosine_similarity(e_with, e_without)});
        }
    }
    return results;
}

void write_case_study(const std::string& path, std::span<const CasePair> pairs,
                      std::span<const CaseResult> results) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "id,with,without,variant,similarity\n";
    for (const CaseResult& r : results) {
        auto pair = std::find_if(pairs.begin(), pairs.end(),
                                 [&](const CasePair& p) { return p.id == r.id; });
        if (pair == pairs.end()) throw Error("write_case_study: unknown pair id " + r.id);
        out << csv_quote(r.id) << "," << csv_quote(pair->with_text) << ","
            << csv_quote(pair->without_text) << "," << r.variant << ","
            << format_sim(r.similarity) << "\n";
    }
}

std::vector<Token> randomize_punctuation(std::span<const Token> tokens, std::uint64_t seed) {
    static const std::array<std::string, 4> kMarks = {".", ",", "!", "?"};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, kMarks.size() - 1);
    std::vector<Token> out(tokens.begin(), tokens.end());
    for (Token& t : out)
        if (t.is_punctuation) t.surface = kMarks[pick(rng)];
    return out;
}

}  // namespace punct
