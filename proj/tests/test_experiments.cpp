#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fixtures.hpp"
#include "qaml/data.hpp"
#include "qaml/experiments.hpp"
#include "qaml/report.hpp"

using namespace qaml;
using nlohmann::json;
using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "qaml_experiments_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// Small enough to keep every subcommand under a couple of seconds.
json tiny_config(const std::string& sub) {
    if (sub == "weak-scaling")
        return {{"encoding", "all"}, {"sizes", {4}}, {"amplitude_sizes", {8}},
                {"trials", 2},       {"eps_grid", {1e-3, 3e-3, 1e-2}}};
    if (sub == "otoc-bound")
        return {{"n", 2}, {"depths", {0, 1}}, {"w_kinds", {"local"}}, {"trials", 200}};
    if (sub == "loe-growth")
        return {{"sizes", {3}}, {"max_layers", 3}, {"samples", 2},
                {"fit_layers", 2}, {"family", "brickwork"}};
    if (sub == "approx-universal")
        return {{"n", 3}, {"circuits", 2}, {"attacks", 2}, {"trials", 200},
                {"eps_grid", {0.0, 0.3}}};
    if (sub == "train-adversary")
        return {{"n", 3},          {"depths", {2}},     {"repetitions", 1},
                {"train_states", 64}, {"test_states", 32}, {"epochs", 2},
                {"batch_size", 16},   {"learning_rate", 0.05}};
    if (sub == "clifford-spoof")
        return {{"n", 3}, {"samples", 4}, {"product_states", 50}};
    if (sub == "mps-bench")
        return {{"n", 6}, {"layers", 3}, {"chi_max", 16}, {"workloads", 2},
                {"compare_n", 4}, {"compare_layers", 2}};
    FAIL("no tiny config for " + sub);
    return {};
}

}  // namespace

TEST_CASE("csv tables format and hash predictably") {
    CsvTable t;
    t.header = {"a", "b", "wall"};
    t.add_row({"1", "0.5", "33.3"});
    t.add_row({"x", "", "9"});
    CHECK(csv_to_string(t) == "a,b,wall\n1,0.5,33.3\nx,,9\n");
    CHECK_THROWS_AS(t.add_row({"too", "narrow"}), std::logic_error);

    // The excluded column is invisible to the hash; kept cells are not.
    CsvTable other = t;
    other.rows[0][2] = "99999";
    CHECK(csv_determinism_hash(t, {"wall"}) == csv_determinism_hash(other, {"wall"}));
    CHECK(csv_determinism_hash(t, {}) != csv_determinism_hash(other, {}));
    other = t;
    other.rows[1][0] = "y";
    CHECK(csv_determinism_hash(t, {"wall"}) != csv_determinism_hash(other, {"wall"}));

    // Doubles print in the shortest form that parses back exactly.
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(-3.0) == "-3");
    for (double v : {1.0 / 3.0, 0.1, 2.0 / 7.0, 1e-12, 123456.789})
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    CHECK(format_int(-42) == "-42");
}

TEST_CASE("every subcommand runs a tiny config end to end") {
    const std::vector<std::string> names = experiment_names();
    REQUIRE(names.size() == 7);
    for (const std::string& sub : names) {
        INFO("subcommand " << sub);
        RunResult res = run_experiment(sub, tiny_config(sub), 99, 1);
        CHECK(res.subcommand == sub);
        CHECK(res.seed == 99);
        REQUIRE(!res.table.header.empty());
        CHECK(std::count(res.table.header.begin(), res.table.header.end(), "wall_time_ms") == 1);
        CHECK(!res.table.rows.empty());
        CHECK(res.determinism_hash == csv_determinism_hash(res.table, {"wall_time_ms"}));
        CHECK(!res.summary.is_null());

        // Overrides land in the resolved config without erasing other defaults.
        const json tiny = tiny_config(sub);
        for (auto it = tiny.begin(); it != tiny.end(); ++it)
            CHECK(res.resolved_config.at(it.key()) == it.value());
        CHECK(res.resolved_config.size() >= tiny.size());  // defaults stay present

        RunResult again = run_experiment(sub, tiny_config(sub), 99, 1);
        CHECK(again.determinism_hash == res.determinism_hash);
    }
}

TEST_CASE("thread count never changes the output bytes") {
    for (const std::string& sub : {std::string("clifford-spoof"), std::string("approx-universal")}) {
        INFO("subcommand " << sub);
        RunResult serial = run_experiment(sub, tiny_config(sub), 7, 1);
        RunResult pooled = run_experiment(sub, tiny_config(sub), 7, 3);
        CHECK(serial.determinism_hash == pooled.determinism_hash);
        CHECK(csv_determinism_hash(serial.table, {"wall_time_ms"}) ==
              csv_determinism_hash(pooled.table, {"wall_time_ms"}));
        CHECK(serial.summary == pooled.summary);
    }
    RunResult a = run_experiment("clifford-spoof", tiny_config("clifford-spoof"), 7, 1);
    RunResult b = run_experiment("clifford-spoof", tiny_config("clifford-spoof"), 8, 1);
    CHECK(a.determinism_hash != b.determinism_hash);
}

TEST_CASE("bad configs are rejected before any work starts") {
    CHECK_THROWS_AS(run_experiment("no-such-thing", json::object(), 1, 1), ConfigError);
    CHECK_THROWS_AS(run_experiment("otoc-bound", json::object(), 1, 0), ConfigError);
    CHECK_THROWS_WITH(run_experiment("otoc-bound", {{"bogus_key", 3}}, 1, 1),
                      ContainsSubstring("unknown config key") && ContainsSubstring("bogus_key"));
    CHECK_THROWS_WITH(run_experiment("otoc-bound", {{"n", "six"}}, 1, 1),
                      ContainsSubstring("wrong type"));
    CHECK_THROWS_AS(run_experiment("otoc-bound", json::array({1, 2}), 1, 1), ConfigError);
    CHECK_THROWS_AS(run_experiment("otoc-bound", {{"n", 40}}, 1, 1), ConfigError);
    CHECK_THROWS_AS(run_experiment("otoc-bound", {{"trials", 0}}, 1, 1), ConfigError);
    CHECK_THROWS_AS(run_experiment("weak-scaling", {{"encoding", "fourier"}}, 1, 1), ConfigError);
    CHECK_THROWS_AS(run_experiment("weak-scaling", {{"eps_grid", {1e-2, 1e-3}}}, 1, 1),
                    ConfigError);
    CHECK_THROWS_WITH(
        run_experiment("weak-scaling", {{"encoding", "dense"}, {"sizes", {3}}}, 1, 1),
        ContainsSubstring("even"));
    CHECK_THROWS_AS(run_experiment("loe-growth", {{"family", "ladder"}}, 1, 1), ConfigError);
    CHECK_THROWS_AS(run_experiment("approx-universal", {{"eps_grid", {0.0, 2.5}}}, 1, 1),
                    ConfigError);
    CHECK_THROWS_AS(
        run_experiment("approx-universal", {{"n", 2}, {"k_measured", 3}}, 1, 1), ConfigError);
    CHECK_THROWS_AS(run_experiment("train-adversary", {{"learning_rate", -0.1}}, 1, 1),
                    ConfigError);
    CHECK_THROWS_AS(run_experiment("train-adversary", {{"mode", "cifar"}}, 1, 1), ConfigError);
    CHECK_THROWS_AS(run_experiment("mps-bench", {{"svd_cut", 1.5}}, 1, 1), ConfigError);
}

TEST_CASE("image-mode adversary training runs the classical pipeline") {
    TempDir tmp;
    fixtures::SynthDigits train = fixtures::make_digits(60, 401);
    fixtures::SynthDigits test = fixtures::make_digits(24, 402);
    auto [train_img, train_lbl] =
        fixtures::write_idx_pair(tmp.path.string(), "train", train, true);
    auto [test_img, test_lbl] = fixtures::write_idx_pair(tmp.path.string(), "t10k", test, false);

    json cfg = {{"mode", "mnist"},
                {"train_images", train_img},
                {"train_labels", train_lbl},
                {"test_images", test_img},
                {"test_labels", test_lbl},
                {"pca_components", 3},
                {"classifier_layers", {1}},
                {"classifier_epochs", 2},
                {"repetitions", 1},
                {"epochs", 2},
                {"batch_size", 16},
                {"learning_rate", 0.05}};
    RunResult res = run_experiment("train-adversary", cfg, 5, 1);
    REQUIRE(res.table.rows.size() == 1);
    const std::vector<std::string>& row = res.table.rows[0];
    CHECK(row[0] == "mnist");
    CHECK(row[1] == "3");  // qubit count follows the projection size
    const double acc = std::strtod(row[4].c_str(), nullptr);
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
    CHECK(res.summary.at("train_samples").get<int>() == 60);
    CHECK(res.summary.at("test_samples").get<int>() == 24);

    // The run ships a verifiable cache of the projected training features.
    auto has_file = [&](const std::string& name) {
        return std::any_of(res.extra_files.begin(), res.extra_files.end(),
                           [&](const auto& kv) { return kv.first == name; });
    };
    REQUIRE(has_file("train_features.json"));
    REQUIRE(has_file("mnist_layers01_rep00.json"));
    for (const auto& [name, content] : res.extra_files) {
        if (name != "train_features.json") continue;
        EncodedDataset cache = encoded_dataset_from_text(content);
        CHECK(cache.n_features == 3);
        CHECK(cache.x.size() == 60);
        CHECK(cache.y.size() == 60);
    }

    CHECK(run_experiment("train-adversary", cfg, 5, 2).determinism_hash ==
          res.determinism_hash);

    json missing = cfg;
    missing["test_labels"] = "";
    CHECK_THROWS_AS(run_experiment("train-adversary", missing, 5, 1), ConfigError);
    json bad_path = cfg;
    bad_path["test_labels"] = (tmp.path / "nope").string();
    CHECK_THROWS_AS(run_experiment("train-adversary", bad_path, 5, 1), IoError);
}

TEST_CASE("write_run persists the csv, the manifest, and the extras") {
    TempDir tmp;
    RunResult res = run_experiment("clifford-spoof", tiny_config("clifford-spoof"), 31, 1);
    res.extra_files.emplace_back("note.txt", "hello\n");
    const std::string out = (tmp.path / "nested" / "run1").string();
    const std::string manifest_path = write_run(res, out, 1.5);
    CHECK(manifest_path == out + "/clifford-spoof_manifest.json");

    const json manifest = json::parse(read_text_file(manifest_path));
    CHECK(manifest.at("subcommand") == "clifford-spoof");
    CHECK(manifest.at("version") == std::string(kVersion));
    CHECK(manifest.at("seed") == 31);
    CHECK(manifest.at("config") == res.resolved_config);
    CHECK(manifest.at("csv") == "clifford-spoof.csv");
    CHECK(manifest.at("rows") == res.table.rows.size());
    CHECK(manifest.at("wall_time_s") == 1.5);
    CHECK(manifest.at("extra_files") == json::array({"note.txt"}));
    char expected_hash[32];
    snprintf(expected_hash, sizeof expected_hash, "%016llx",
             static_cast<unsigned long long>(res.determinism_hash));
    CHECK(manifest.at("determinism_hash") == std::string(expected_hash));

    CHECK(read_text_file(out + "/clifford-spoof.csv") == csv_to_string(res.table));
    CHECK(read_text_file(out + "/note.txt") == "hello\n");

    // A plain file where the directory should go is an I/O error.
    const std::string blocked = (tmp.path / "blocked").string();
    write_text_file(blocked, "file\n");
    CHECK_THROWS_AS(write_run(res, blocked + "/sub", 0.0), IoError);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
    for (int threads : {1, 3, 8}) {
        std::vector<std::atomic<int>> hits(37);
        for (auto& h : hits) h = 0;
        parallel_for(37, threads, [&](int i) { hits[std::size_t(i)]++; });
        for (const auto& h : hits) CHECK(h == 1);
    }

    int calls = 0;
    parallel_for(0, 4, [&](int) { ++calls; });
    CHECK(calls == 0);

    for (int threads : {1, 3}) {
        CHECK_THROWS_WITH(parallel_for(8, threads,
                                       [](int i) {
                                           if (i == 5) throw std::runtime_error("boom at 5");
                                       }),
                          ContainsSubstring("boom"));
    }
}
