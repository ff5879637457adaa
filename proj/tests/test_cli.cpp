#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "punct/cli.hpp"
#include "support/synthetic.hpp"

using namespace punct;
namespace fs = std::filesystem;

namespace {

int run(std::initializer_list<const char*> args) {
    std::vector<const char*> argv = {"punct_embed"};
    argv.insert(argv.end(), args.begin(), args.end());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() /
                     ("punct_cli_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static inline int counter = 0;
};

std::string read_file(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// keeps the test corpus and model small enough to train in milliseconds
std::vector<const char*> tiny_dims() {
    return {"--embedding-dim", "8",  "--text-hidden", "6",  "--tree-hidden", "4",
            "--fusion-hidden", "8",  "--fusion-out",  "8",  "--cls-hidden1", "8",
            "--cls-hidden2",   "4"};
}

int run_train(const std::string& data, const std::string& out,
              std::initializer_list<const char*> extra = {}) {
    std::vector<const char*> argv = {"punct_embed", "train",   "--data", data.c_str(),
                                     "--out",       out.c_str(), "--epochs", "2",
                                     "--seed",      "7"};
    for (auto d : tiny_dims()) argv.push_back(d);
    argv.insert(argv.end(), extra.begin(), extra.end());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("help and usage errors use the documented exit codes") {
    CHECK(run({"--help"}) == 0);
    CHECK(run({"train", "--help"}) == 0);
    CHECK(run({"eval", "--help"}) == 0);
    CHECK(run({"report-similarity", "--help"}) == 0);
    CHECK(run({"case-study", "--help"}) == 0);
    CHECK(run({"make-splits", "--help"}) == 0);
    CHECK(run({"embed", "--help"}) == 0);

    CHECK(run({}) == 1);                              // no subcommand
    CHECK(run({"frobnicate"}) == 1);                  // unknown subcommand
    CHECK(run({"train"}) == 1);                       // missing required flag
    CHECK(run({"train", "--data", "x", "--bogus"}) == 1);
}

TEST_CASE("data errors exit with code 2") {
    TempDir dir;
    std::string bad = dir.file("bad.jsonl");
    std::ofstream(bad) << R"({"id": "a", "text": "no label"})" << "\n";
    CHECK(run_train(bad, dir.file("m.ckpt")) == 2);
    CHECK(run({"eval", "--checkpoint", "/nonexistent.ckpt", "--data", bad.c_str()}) == 2);
}

TEST_CASE("train, eval, embed, and reports run end to end") {
    TempDir dir;
    std::string data = dir.file("train.jsonl");
    synth::write_jsonl(data, synth::generate(24, 5));
    std::string ckpt = dir.file("model.ckpt");

    CHECK(run_train(data, ckpt, {"--variant", "proposed"}) == 0);
    CHECK(fs::exists(ckpt));
    CHECK(fs::exists(ckpt + ".log"));
    std::string log = read_file(ckpt + ".log");
    CHECK(log.find(',') != std::string::npos);

    CHECK(run({"eval", "--checkpoint", ckpt.c_str(), "--data", data.c_str()}) == 0);
    CHECK(run({"eval", "--checkpoint", ckpt.c_str(), "--data", data.c_str(),
               "--variant", "bigru"}) == 2);  // variant mismatch

    std::string emb = dir.file("emb.txt");
    CHECK(run({"embed", "--checkpoint", ckpt.c_str(), "--data", data.c_str(), "--out",
               emb.c_str()}) == 0);
    CHECK(read_file(emb).rfind("dim 8", 0) == 0);

    std::string reports = dir.file("reports");
    CHECK(run({"report-similarity", "--checkpoint", ckpt.c_str(), "--data", data.c_str(),
               "--out", reports.c_str()}) == 0);
    CHECK(fs::exists(reports + "/report.csv"));
    CHECK(fs::exists(reports + "/histogram.csv"));

    std::string cs = dir.file("case.csv");
    std::string pairs = std::string(PUNCT_DATA_DIR) + "/case_pairs_meaning_change.jsonl";
    CHECK(run({"case-study", "--pairs", pairs.c_str(), "--checkpoint", ckpt.c_str(),
               "--out", cs.c_str()}) == 0);
    CHECK(read_file(cs).rfind("id,with,without,variant,similarity\n", 0) == 0);
}

TEST_CASE("identical invocations produce byte-identical artifacts") {
    TempDir dir;
    std::string data = dir.file("train.jsonl");
    synth::write_jsonl(data, synth::generate(20, 6));

    std::string c1 = dir.file("a.ckpt");
    std::string c2 = dir.file("b.ckpt");
    REQUIRE(run_train(data, c1) == 0);
    REQUIRE(run_train(data, c2) == 0);
    CHECK(read_file(c1) == read_file(c2));

    std::string r1 = dir.file("rep1");
    std::string r2 = dir.file("rep2");
    REQUIRE(run({"report-similarity", "--checkpoint", c1.c_str(), "--data", data.c_str(),
                 "--out", r1.c_str()}) == 0);
    REQUIRE(run({"report-similarity", "--checkpoint", c1.c_str(), "--data", data.c_str(),
                 "--out", r2.c_str()}) == 0);
    CHECK(read_file(r1 + "/report.csv") == read_file(r2 + "/report.csv"));
    CHECK(read_file(r1 + "/histogram.csv") == read_file(r2 + "/histogram.csv"));
}

TEST_CASE("make-splits writes exact 45/5/50 folds") {
    TempDir dir;
    std::string data = dir.file("train.jsonl");
    synth::write_jsonl(data, synth::generate(100, 8));
    std::string out = dir.file("splits.json");

    CHECK(run({"make-splits", "--data", data.c_str(), "--folds", "10", "--seed", "3",
               "--out", out.c_str()}) == 0);
    std::string text = read_file(out);
    CHECK_FALSE(text.empty());
    auto j = nlohmann::json::parse(text);
    REQUIRE(j.size() == 10);
    for (const auto& fold : j) {
        CHECK(fold["train"].size() == 45);
        CHECK(fold["val"].size() == 5);
        CHECK(fold["test"].size() == 50);
    }
}

TEST_CASE("config files supply defaults and flags override them") {
    TempDir dir;
    std::string data = dir.file("train.jsonl");
    synth::write_jsonl(data, synth::generate(16, 9));

    std::string cfg = dir.file("run.cfg");
    std::ofstream(cfg) << "epochs=2\nseed=7\nvariant=\"bigru\"\n";

    std::string via_cfg = dir.file("cfg.ckpt");
    std::vector<const char*> argv = {"punct_embed", "train", "--data", data.c_str(),
                                     "--out", via_cfg.c_str(), "--config", cfg.c_str()};
    for (auto d : tiny_dims()) argv.push_back(d);
    REQUIRE(cli_main(static_cast<int>(argv.size()), argv.data()) == 0);

    std::string via_flags = dir.file("flag.ckpt");
    REQUIRE(run_train(data, via_flags, {"--variant", "bigru"}) == 0);
    CHECK(read_file(via_cfg) == read_file(via_flags));

    // unknown config keys are fatal config errors
    std::string bad_cfg = dir.file("bad.cfg");
    std::ofstream(bad_cfg) << "epochs=2\nnot_a_flag=1\n";
    argv = {"punct_embed", "train",    "--data", data.c_str(),
            "--out",       via_cfg.c_str(), "--config", bad_cfg.c_str()};
    CHECK(cli_main(static_cast<int>(argv.size()), argv.data()) == 2);
}

TEST_CASE("environment variables stand in for flags") {
    TempDir dir;
    std::string data = dir.file("train.jsonl");
    synth::write_jsonl(data, synth::generate(16, 10));

    std::string via_flag = dir.file("flag.ckpt");
    REQUIRE(run_train(data, via_flag) == 0);  // --seed 7

    ::setenv("PUNCT_EMBED_SEED", "7", 1);
    std::string via_env = dir.file("env.ckpt");
    std::vector<const char*> argv = {"punct_embed", "train",   "--data", data.c_str(),
                                     "--out", via_env.c_str(), "--epochs", "2"};
    for (auto d : tiny_dims()) argv.push_back(d);
    int rc = cli_main(static_cast<int>(argv.size()), argv.data());
    ::unsetenv("PUNCT_EMBED_SEED");
    REQUIRE(rc == 0);
    CHECK(read_file(via_flag) == read_file(via_env));
}

TEST_CASE("subset caps the sample count deterministically") {
    TempDir dir;
    std::string big = dir.file("big.jsonl");
    synth::write_jsonl(big, synth::generate(40, 11));
    std::string small = dir.file("small.jsonl");
    synth::write_jsonl(small, synth::generate(16, 11));  // same seed: shared prefix

    std::string from_big = dir.file("big.ckpt");
    std::string from_small = dir.file("small.ckpt");
    REQUIRE(run_train(big, from_big, {"--subset", "16"}) == 0);
    REQUIRE(run_train(small, from_small) == 0);
    CHECK(read_file(from_big) == read_file(from_small));
}
